//! Sleep information extraction from clinical notes.
//!
//! The crate is organised as a pipeline of independent stages:
//!
//! - [`corpus`]: merge line-oriented note records into documents and drop
//!   near-duplicates by term-frequency cosine similarity.
//! - [`retrieval`]: keep documents containing a sleep keyword, tolerant of
//!   simple morphological variation.
//! - [`ruleng`]: regular-expression concept rules, sentence segmentation,
//!   negation and hypothetical assertion, and majority-vote document labels.
//! - [`mlbase`]: TF-IDF features with logistic-regression and k-NN baselines.
//! - [`eval`]: gold standard handling, confusion counts, metrics, Cohen's
//!   kappa and report rendering.
//! - [`synth`]: a deterministic synthetic corpus generator with known labels.
//! - [`pipeline`]: end-to-end orchestration over the documented file formats.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod io;
pub mod mlbase;
pub mod pipeline;
pub mod retrieval;
pub mod ruleng;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
