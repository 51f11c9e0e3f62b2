//! TF-IDF baselines: one logistic-regression and one k-NN model per concept.

mod knn;
mod logreg;
mod preprocess;
mod tfidf;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use knn::{knn_neighbors, knn_predict, knn_vote, KnnModel, DEFAULT_K};
pub use logreg::{
    logistic_gradient, logistic_loss, predict_logreg, sigmoid, train_logreg, LogisticHyperparams,
    LogisticModel,
};
pub use preprocess::{preprocess, TokenPipelineConfig, DEFAULT_STOPWORDS, STOPWORD_LIST_VERSION};
pub use tfidf::{fit_vectorizer, sparse_cosine, SparseVector, TfidfVectorizer};

use crate::error::{Error, Result};
use crate::ruleng::{ConceptCategory, DocumentLabels};

pub const ARTIFACT_FORMAT: &str = "sleepnote-model";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlConfig {
    pub logreg: LogisticHyperparams,
    pub knn_k: usize,
    /// Scale TF-IDF vectors to unit length before training and prediction.
    pub l2_normalize: bool,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            logreg: LogisticHyperparams::default(),
            knn_k: DEFAULT_K,
            l2_normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptModels {
    pub concept: ConceptCategory,
    pub logreg: LogisticModel,
    /// k-NN labels, parallel to `ModelArtifact::knn_vectors`.
    pub knn_labels: Vec<bool>,
}

/// Everything needed to score new text, in one file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format: String,
    pub version: u32,
    pub pipeline: TokenPipelineConfig,
    pub config: MlConfig,
    pub vectorizer: TfidfVectorizer,
    pub knn_k: usize,
    /// Training vectors shared by every concept's k-NN model.
    pub knn_vectors: Vec<SparseVector>,
    pub concepts: Vec<ConceptModels>,
}

/// Predictions of both baselines for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselinePrediction {
    pub logreg: DocumentLabels,
    pub knn: DocumentLabels,
}

fn features(
    vectorizer: &TfidfVectorizer,
    tokens: &[String],
    normalize: bool,
) -> SparseVector {
    let v = vectorizer.transform(tokens);
    if normalize {
        v.l2_normalized()
    } else {
        v
    }
}

/// Fits the vectorizer on the training texts and one model pair per yes/no
/// concept.
pub fn train_models(
    train: &[(&str, &DocumentLabels)],
    pipeline: &TokenPipelineConfig,
    config: MlConfig,
) -> Result<ModelArtifact> {
    let tokens: Vec<Vec<String>> = train.iter().map(|(t, _)| preprocess(t, pipeline)).collect();
    let vectorizer = fit_vectorizer(&tokens)?;
    let xs: Vec<SparseVector> = tokens
        .iter()
        .map(|t| features(&vectorizer, t, config.l2_normalize))
        .collect();
    let dim = vectorizer.vocabulary_size();
    let k = config.knn_k.min(xs.len());
    if k == 0 {
        return Err(Error::Config("knn_k must be positive".into()));
    }

    let concepts = ConceptCategory::BINARY
        .iter()
        .map(|&concept| {
            let ys: Vec<bool> = train.iter().map(|(_, l)| l.get(concept)).collect();
            Ok(ConceptModels {
                concept,
                logreg: train_logreg(&xs, &ys, dim, config.logreg),
                knn_labels: ys,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ModelArtifact {
        format: ARTIFACT_FORMAT.to_string(),
        version: ARTIFACT_VERSION,
        pipeline: pipeline.clone(),
        config,
        vectorizer,
        knn_k: k,
        knn_vectors: xs,
        concepts,
    })
}

impl ModelArtifact {
    pub fn predict(&self, doc_id: &str, text: &str) -> BaselinePrediction {
        let tokens = preprocess(text, &self.pipeline);
        let x = features(&self.vectorizer, &tokens, self.config.l2_normalize);
        let mut logreg = DocumentLabels::negative(doc_id);
        let mut knn = DocumentLabels::negative(doc_id);
        let nn = knn_neighbors(&self.knn_vectors, &x, self.knn_k);
        for m in &self.concepts {
            logreg.set(m.concept, predict_logreg(&m.logreg, &x).1);
            knn.set(m.concept, !nn.is_empty() && knn_vote(&nn, &m.knn_labels));
        }
        BaselinePrediction { logreg, knn }
    }

    pub fn warnings(&self) -> Vec<String> {
        self.concepts
            .iter()
            .flat_map(|c| c.logreg.warnings.iter().map(move |w| format!("{}: {w}", c.concept)))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        crate::io::write_text(path, &json)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let artifact: ModelArtifact = serde_json::from_str(&src).map_err(|e| Error::InputFormat {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if artifact.format != ARTIFACT_FORMAT || artifact.version != ARTIFACT_VERSION {
            return Err(Error::InputFormat {
                path: path.to_path_buf(),
                line: 1,
                message: format!(
                    "unsupported model artifact {} v{}",
                    artifact.format, artifact.version
                ),
            });
        }
        let consistent = artifact
            .concepts
            .iter()
            .all(|c| c.knn_labels.len() == artifact.knn_vectors.len());
        if !consistent {
            return Err(Error::InputFormat {
                path: path.to_path_buf(),
                line: 1,
                message: "k-NN labels do not match stored vectors".into(),
            });
        }
        Ok(artifact)
    }
}
