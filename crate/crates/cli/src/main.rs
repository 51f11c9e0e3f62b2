mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sleepnote::corpus::{deduplicate, merge_note_lines, read_removed_csv, ClinicalDocument, RawNoteLine, DEFAULT_DEDUP_THRESHOLD};
use sleepnote::eval::{cohens_kappa, evaluate_labels, render_csv, render_report, split_gold, GoldRecord};
use sleepnote::io::{for_each_jsonl, read_jsonl, write_jsonl, write_text};
use sleepnote::mlbase::{train_models, LogisticHyperparams, MlConfig, ModelArtifact, TokenPipelineConfig, DEFAULT_K};
use sleepnote::pipeline::{inherit_labels, label_documents, run_pipeline};
use sleepnote::retrieval::{retrieve, KeywordLexicon, RetrievalHit};
use sleepnote::ruleng::{ConceptCategory, DocumentLabels, RuleSet};
use sleepnote::synth::{generate, SynthConfig};

use config::{synth_pipeline_toml, ConfigSyntax, PipelineFile};

#[derive(Parser)]
#[command(name = "sleepnote", version, about = "Sleep concept extraction from clinical notes")]
struct Cli {
    /// Worker threads for per-document stages (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reassemble note lines into documents.
    Merge {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop near-duplicate documents within each patient.
    Dedup {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        kept: PathBuf,
        #[arg(long)]
        removed: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEDUP_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Keep documents that mention a sleep keyword.
    Retrieve {
        #[arg(long)]
        input: PathBuf,
        /// Keyword file, one per line; built-in list if omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write the retrieved documents themselves.
        #[arg(long)]
        docs_out: Option<PathBuf>,
    },
    /// Apply the rules and vote document labels.
    Extract {
        #[arg(long)]
        input: PathBuf,
        /// Rule file (JSON lines); built-in rules if omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        /// Retrieval hits; documents not listed are labeled all-no.
        #[arg(long)]
        retrieved: Option<PathBuf>,
        /// Removed-pairs report from dedup; removed documents get the labels
        /// of the document kept in their place.
        #[arg(long)]
        removed: Option<PathBuf>,
        #[arg(long)]
        mentions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Fit the TF-IDF baselines on the gold train split.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        ml: MlArgs,
    },
    /// Score documents with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Receives logreg.jsonl and knn.jsonl.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compare predicted labels with gold.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        /// NAME=PATH of a label file; repeat for several systems.
        #[arg(long = "pred", required = true, value_parser = parse_named_path)]
        preds: Vec<(String, PathBuf)>,
        #[arg(long, value_enum, default_value_t = SplitChoice::Test)]
        split: SplitChoice,
        #[command(flatten)]
        split_args: SplitArgs,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cohen's kappa between two annotators' label files.
    Kappa {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus with gold labels.
    Synth {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Corpus size, keeping the default label proportions.
        #[arg(long, conflicts_with = "config")]
        n_docs: Option<usize>,
        /// Full generator settings (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run merge, dedup, retrieve, extract and evaluate from one config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// Reassign splits at this train fraction instead of using the gold file's.
    #[arg(long)]
    train_fraction: Option<f64>,
}

#[derive(Args)]
struct MlArgs {
    #[arg(long, default_value_t = LogisticHyperparams::default().learning_rate)]
    learning_rate: f64,
    #[arg(long, default_value_t = LogisticHyperparams::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = LogisticHyperparams::default().l2_lambda)]
    l2_lambda: f64,
    #[arg(long, default_value_t = LogisticHyperparams::default().threshold)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    no_stem: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitChoice {
    Train,
    Test,
    All,
}

fn parse_named_path(s: &str) -> std::result::Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), path.into())),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

/// Structured record of one invocation, printed to stderr as JSON.
#[derive(Default)]
struct RunLog {
    inputs: Vec<String>,
    outputs: Vec<String>,
    seeds: BTreeMap<&'static str, u64>,
    counts: BTreeMap<&'static str, usize>,
    warnings: Vec<String>,
}

impl RunLog {
    fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }
    fn output(&mut self, p: &Path) {
        self.outputs.push(p.display().to_string());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let name = command_name(&cli.command);
    let start = Instant::now();
    let mut log = RunLog::default();

    let result = match cli.workers {
        Some(0) => Err(sleepnote::Error::Config("--workers must be positive".into()).into()),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("starting worker pool")
            .and_then(|pool| pool.install(|| dispatch(cli.command, &mut log))),
        None => dispatch(cli.command, &mut log),
    };

    let (status, code) = match &result {
        Ok(()) => ("ok".to_string(), 0),
        Err(e) => (format!("{e:#}"), exit_code(e)),
    };
    let record = json!({
        "command": name,
        "status": if code == 0 { "ok" } else { "error" },
        "error": if code == 0 { Value::Null } else { Value::String(status.clone()) },
        "exit_code": code,
        "inputs": log.inputs,
        "outputs": log.outputs,
        "seeds": log.seeds,
        "counts": log.counts,
        "warnings": log.warnings,
        "workers": cli.workers.unwrap_or_else(rayon::current_num_threads),
        "wall_time_ms": start.elapsed().as_millis() as u64,
    });
    if code != 0 {
        eprintln!("error: {status}");
    }
    eprintln!("{record}");
    ExitCode::from(code)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Merge { .. } => "merge",
        Command::Dedup { .. } => "dedup",
        Command::Retrieve { .. } => "retrieve",
        Command::Extract { .. } => "extract",
        Command::Train { .. } => "train",
        Command::Predict { .. } => "predict",
        Command::Evaluate { .. } => "evaluate",
        Command::Kappa { .. } => "kappa",
        Command::Synth { .. } => "synth",
        Command::Pipeline { .. } => "pipeline",
    }
}

/// 1 usage or configuration, 2 bad input data, 3 internal invariant.
fn exit_code(e: &anyhow::Error) -> u8 {
    use sleepnote::Error as E;
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<E>() {
            return match err {
                E::Config(_) => 1,
                E::Invariant(_) => 3,
                E::InputFormat { .. }
                | E::RuleCompile { .. }
                | E::EmptyCorpus
                | E::KeyMismatch { .. }
                | E::Io { .. }
                | E::Json(_) => 2,
            };
        }
        if cause.downcast_ref::<ConfigSyntax>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn read_docs(path: &Path, log: &mut RunLog) -> Result<Vec<ClinicalDocument>> {
    log.input(path);
    let mut docs = Vec::new();
    let mut seen = BTreeSet::new();
    for_each_jsonl(path, |line, d: ClinicalDocument| {
        if !seen.insert(d.doc_id.clone()) {
            return Err(sleepnote::Error::InputFormat {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate doc_id {}", d.doc_id),
            });
        }
        docs.push(d);
        Ok(())
    })?;
    Ok(docs)
}

fn read_lines(path: &Path, log: &mut RunLog) -> Result<Vec<RawNoteLine>> {
    log.input(path);
    let mut lines = Vec::new();
    for_each_jsonl(path, |_, l: RawNoteLine| {
        lines.push(l);
        Ok(())
    })?;
    Ok(lines)
}

fn load_lexicon(path: &Option<PathBuf>, log: &mut RunLog) -> Result<KeywordLexicon> {
    Ok(match path {
        Some(p) => {
            log.input(p);
            KeywordLexicon::from_file(p)?
        }
        None => KeywordLexicon::default(),
    })
}

fn load_rules(path: &Option<PathBuf>, log: &mut RunLog) -> Result<RuleSet> {
    Ok(match path {
        Some(p) => {
            log.input(p);
            RuleSet::from_file(p)?
        }
        None => RuleSet::default(),
    })
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn write_labels(path: &Path, labels: &[DocumentLabels], log: &mut RunLog) -> Result<()> {
    ensure_parent(path)?;
    write_jsonl(path, labels)?;
    log.output(path);
    Ok(())
}

fn dispatch(cmd: Command, log: &mut RunLog) -> Result<()> {
    match cmd {
        Command::Merge { input, out } => {
            let lines = read_lines(&input, log)?;
            log.counts.insert("lines", lines.len());
            let (docs, issues) = merge_note_lines(lines);
            for i in &issues {
                log.warnings.push(format!("{}: {}", i.doc_id, i.message));
            }
            log.counts.insert("documents", docs.len());
            log.counts.insert("skipped", issues.len());
            ensure_parent(&out)?;
            write_jsonl(&out, &docs)?;
            log.output(&out);
        }

        Command::Dedup {
            input,
            kept,
            removed,
            threshold,
            seed,
        } => {
            if !(0.0..=1.0).contains(&threshold) {
                bail!(sleepnote::Error::Config(format!("threshold {threshold} outside [0, 1]")));
            }
            let docs = read_docs(&input, log)?;
            log.seeds.insert("dedup", seed);
            let outcome = deduplicate(&docs, threshold, seed);
            log.counts.insert("documents", docs.len());
            log.counts.insert("kept", outcome.kept.len());
            log.counts.insert("removed", outcome.removed.len());
            ensure_parent(&kept)?;
            ensure_parent(&removed)?;
            write_jsonl(&kept, &outcome.kept)?;
            write_text(&removed, &outcome.removed_csv())?;
            log.output(&kept);
            log.output(&removed);
        }

        Command::Retrieve {
            input,
            lexicon,
            out,
            docs_out,
        } => {
            let docs = read_docs(&input, log)?;
            let lex = load_lexicon(&lexicon, log)?;
            let hits = retrieve(&docs, &lex);
            log.counts.insert("documents", docs.len());
            log.counts.insert("retrieved", hits.len());
            ensure_parent(&out)?;
            write_jsonl(&out, &hits)?;
            log.output(&out);
            if let Some(p) = docs_out {
                let ids: BTreeSet<&str> = hits.iter().map(|h| h.doc_id.as_str()).collect();
                let picked: Vec<&ClinicalDocument> =
                    docs.iter().filter(|d| ids.contains(d.doc_id.as_str())).collect();
                ensure_parent(&p)?;
                write_jsonl(&p, picked)?;
                log.output(&p);
            }
        }

        Command::Extract {
            input,
            rules,
            retrieved,
            removed,
            mentions,
            labels,
        } => {
            let mut docs = read_docs(&input, log)?;
            docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
            let rules = load_rules(&rules, log)?;
            let hits: Vec<RetrievalHit> = match &retrieved {
                Some(p) => {
                    log.input(p);
                    read_jsonl(p)?
                }
                None => docs
                    .iter()
                    .map(|d| RetrievalHit {
                        doc_id: d.doc_id.clone(),
                        matched_keywords: BTreeSet::new(),
                        token_count: 0,
                    })
                    .collect(),
            };
            let (ms, mut ls) = label_documents(&docs, &hits, &rules);
            if let Some(p) = &removed {
                log.input(p);
                let pairs = read_removed_csv(p)?;
                log.counts.insert("inherited", pairs.len());
                inherit_labels(&mut ls, &pairs)?;
            }
            log.counts.insert("documents", docs.len());
            log.counts.insert("mentions", ms.len());
            ensure_parent(&mentions)?;
            write_jsonl(&mentions, &ms)?;
            log.output(&mentions);
            write_labels(&labels, &ls, log)?;
        }

        Command::Train {
            corpus,
            gold,
            out,
            split,
            ml,
        } => {
            let docs = read_docs(&corpus, log)?;
            log.input(&gold);
            let records: Vec<GoldRecord> = read_jsonl(&gold)?;
            log.seeds.insert("split", split.split_seed);
            let (train, _) = split_gold(records, split.train_fraction, split.split_seed)?;
            let text: BTreeMap<&str, &str> = docs.iter().map(|d| (d.doc_id.as_str(), d.text.as_str())).collect();
            let missing: Vec<String> = train
                .iter()
                .filter(|g| !text.contains_key(g.doc_id()))
                .map(|g| g.doc_id().to_string())
                .collect();
            if !missing.is_empty() {
                bail!(sleepnote::Error::KeyMismatch {
                    missing_in_predictions: missing,
                    missing_in_gold: Vec::new(),
                });
            }
            let set: Vec<(&str, &DocumentLabels)> = train.iter().map(|g| (text[g.doc_id()], &g.labels)).collect();
            let tokens = TokenPipelineConfig {
                stemming: !ml.no_stem,
                ..TokenPipelineConfig::default()
            };
            let cfg = MlConfig {
                logreg: LogisticHyperparams {
                    learning_rate: ml.learning_rate,
                    epochs: ml.epochs,
                    l2_lambda: ml.l2_lambda,
                    threshold: ml.threshold,
                },
                knn_k: ml.k,
                l2_normalize: !ml.no_normalize,
            };
            let model = train_models(&set, &tokens, cfg)?;
            log.counts.insert("train_documents", set.len());
            log.counts.insert("vocabulary", model.vectorizer.vocabulary_size());
            log.warnings.extend(model.warnings());
            ensure_parent(&out)?;
            model.save(&out)?;
            log.output(&out);
        }

        Command::Predict { model, input, out_dir } => {
            log.input(&model);
            let model = ModelArtifact::load(&model)?;
            let mut docs = read_docs(&input, log)?;
            docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
            use rayon::prelude::*;
            let preds: Vec<_> = docs.par_iter().map(|d| model.predict(&d.doc_id, &d.text)).collect();
            let lr: Vec<DocumentLabels> = preds.iter().map(|p| p.logreg.clone()).collect();
            let knn: Vec<DocumentLabels> = preds.into_iter().map(|p| p.knn).collect();
            log.counts.insert("documents", docs.len());
            write_labels(&out_dir.join("logreg.jsonl"), &lr, log)?;
            write_labels(&out_dir.join("knn.jsonl"), &knn, log)?;
        }

        Command::Evaluate {
            gold,
            preds,
            split,
            split_args,
            report,
            csv,
        } => {
            log.input(&gold);
            let records: Vec<GoldRecord> = read_jsonl(&gold)?;
            log.seeds.insert("split", split_args.split_seed);
            let (train, test) = split_gold(records, split_args.train_fraction, split_args.split_seed)?;
            let chosen: Vec<DocumentLabels> = match split {
                SplitChoice::Train => train,
                SplitChoice::Test => test,
                SplitChoice::All => train.into_iter().chain(test).collect(),
            }
            .into_iter()
            .map(|g| g.labels)
            .collect();
            let wanted: BTreeSet<&str> = chosen.iter().map(|l| l.doc_id.as_str()).collect();
            let mut reports = Vec::new();
            for (name, path) in &preds {
                log.input(path);
                let all: Vec<DocumentLabels> = read_jsonl(path)?;
                let subset: Vec<DocumentLabels> =
                    all.into_iter().filter(|l| wanted.contains(l.doc_id.as_str())).collect();
                reports.push(evaluate_labels(name, &subset, &chosen)?);
            }
            log.counts.insert("gold_documents", chosen.len());
            log.counts.insert("systems", reports.len());
            ensure_parent(&report)?;
            write_text(&report, &render_report(&reports))?;
            log.output(&report);
            if let Some(p) = csv {
                ensure_parent(&p)?;
                write_text(&p, &render_csv(&reports))?;
                log.output(&p);
            }
        }

        Command::Kappa { a, b, out } => {
            log.input(&a);
            log.input(&b);
            let la: BTreeMap<String, DocumentLabels> =
                read_jsonl::<DocumentLabels>(&a)?.into_iter().map(|l| (l.doc_id.clone(), l)).collect();
            let lb: BTreeMap<String, DocumentLabels> =
                read_jsonl::<DocumentLabels>(&b)?.into_iter().map(|l| (l.doc_id.clone(), l)).collect();
            if la.keys().ne(lb.keys()) {
                bail!(sleepnote::Error::KeyMismatch {
                    missing_in_predictions: la.keys().filter(|k| !lb.contains_key(*k)).cloned().collect(),
                    missing_in_gold: lb.keys().filter(|k| !la.contains_key(*k)).cloned().collect(),
                });
            }
            let mut by_concept = serde_json::Map::new();
            for c in ConceptCategory::ALL {
                let k = if c.is_binary() {
                    let xa: Vec<bool> = la.values().map(|l| l.get(c)).collect();
                    let xb: Vec<bool> = lb.values().map(|l| l.get(c)).collect();
                    cohens_kappa(&xa, &xb)?
                } else {
                    let xa: Vec<_> = la.values().map(|l| l.sleep_duration).collect();
                    let xb: Vec<_> = lb.values().map(|l| l.sleep_duration).collect();
                    cohens_kappa(&xa, &xb)?
                };
                by_concept.insert(
                    c.key().to_string(),
                    json!({
                        "kappa": k.kappa,
                        "observed": k.observed,
                        "expected": k.expected,
                        "degenerate": k.degenerate,
                    }),
                );
            }
            log.counts.insert("items", la.len());
            ensure_parent(&out)?;
            let text = serde_json::to_string_pretty(&Value::Object(by_concept))? + "\n";
            write_text(&out, &text)?;
            log.output(&out);
        }

        Command::Synth {
            seed,
            out,
            n_docs,
            config,
        } => {
            let cfg = match (&config, n_docs) {
                (Some(p), _) => {
                    log.input(p);
                    let src = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    let mut c: SynthConfig =
                        toml::from_str(&src).map_err(|e| ConfigSyntax(format!("{}: {e}", p.display())))?;
                    c.seed = seed;
                    c
                }
                (None, Some(n)) => SynthConfig::scaled(n, seed),
                (None, None) => SynthConfig {
                    seed,
                    ..SynthConfig::default()
                },
            };
            log.seeds.insert("synth", seed);
            let bundle = generate(&cfg)?;
            log.counts.insert("documents", bundle.documents.len());
            log.counts.insert("gold", bundle.gold.len());
            log.counts.insert("plants", bundle.plants.len());
            log.counts.insert("duplicate_pairs", bundle.duplicate_pairs.len());
            for p in bundle.write(&out)? {
                log.output(&p);
            }
            let toml_path = out.join("pipeline.toml");
            write_text(&toml_path, &synth_pipeline_toml(seed))?;
            log.output(&toml_path);
        }

        Command::Pipeline { config } => {
            log.input(&config);
            let cfg = PipelineFile::load(&config)?;
            let missing = cfg.missing_inputs();
            if let Some(p) = missing.first() {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("input file {} does not exist", p.display()),
                )
                .into());
            }
            let mut work = || -> Result<()> {
                let settings = cfg.settings();
                log.seeds.insert("dedup", settings.dedup_seed);
                log.seeds.insert("split", settings.split_seed);
                let lines = read_lines(&cfg.paths.corpus, log)?;
                let lex = load_lexicon(&cfg.paths.lexicon, log)?;
                let rules = load_rules(&cfg.paths.rules, log)?;
                let gold = match &cfg.paths.gold {
                    Some(p) => {
                        log.input(p);
                        Some(read_jsonl::<GoldRecord>(p)?)
                    }
                    None => None,
                };
                let run = run_pipeline(lines, &lex, &rules, gold, &settings)?;
                for i in &run.merge_issues {
                    log.warnings.push(format!("{}: {}", i.doc_id, i.message));
                }
                if let Some(ev) = &run.evaluation {
                    log.warnings.extend(ev.warnings.iter().cloned());
                }
                log.counts.extend(run.counts());
                for p in run.write(&cfg.paths.output_dir)? {
                    log.output(&p);
                }
                Ok(())
            };
            match cfg.workers {
                Some(0) => bail!(sleepnote::Error::Config("workers must be positive".into())),
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .context("starting worker pool")?
                    .install(work)?,
                None => work()?,
            }
        }
    }
    Ok(())
}
