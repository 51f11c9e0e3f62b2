use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sleepnote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sleepnote"))
        .args(args)
        .output()
        .expect("spawn sleepnote")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--seed", "42", "--out", p(dir)];
    args.extend_from_slice(extra);
    let o = sleepnote(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn synth_then_pipeline_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &[]);
    let o = sleepnote(&["pipeline", "--config", p(&tmp.path().join("pipeline.toml"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = fs::read_to_string(tmp.path().join("run/report.txt")).unwrap();
    assert!(report.starts_with("System"));
    assert!(report.contains("Rule-based NLP | 1.00 1.00 1.00 1.00"));
    assert!(report.contains("\nLR "));
    assert!(report.contains("\nKNN "));

    // run log is one JSON object on the last stderr line
    let err = stderr(&o);
    let last = err.lines().last().unwrap();
    let log: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(log["command"], "pipeline");
    assert_eq!(log["counts"]["removed"], 10);
    assert_eq!(log["seeds"]["dedup"], 42);
    assert!(log["wall_time_ms"].is_u64());
}

#[test]
fn pipeline_outputs_are_byte_identical_across_runs_and_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--n-docs", "400"]);
    let cfg = tmp.path().join("pipeline.toml");
    let read_all = || {
        let mut files: Vec<_> = fs::read_dir(tmp.path().join("run"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files
            .into_iter()
            .map(|f| (f.file_name().unwrap().to_owned(), fs::read(&f).unwrap()))
            .collect::<Vec<_>>()
    };
    assert!(sleepnote(&["pipeline", "--config", p(&cfg)]).status.success());
    let first = read_all();
    assert_eq!(first.len(), 8);
    assert!(sleepnote(&["--workers", "3", "pipeline", "--config", p(&cfg)]).status.success());
    assert_eq!(first, read_all());
}

#[test]
fn synth_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synth(a.path(), &["--n-docs", "100"]);
    synth(b.path(), &["--n-docs", "100"]);
    for f in ["notes.jsonl", "gold.jsonl", "plants.jsonl", "duplicates.jsonl"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = sleepnote(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn help_exits_zero() {
    let o = sleepnote(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    for sub in ["merge", "dedup", "retrieve", "extract", "train", "predict", "evaluate", "kappa", "synth", "pipeline"] {
        assert!(out.contains(sub), "{sub}");
    }
}

#[test]
fn malformed_line_is_reported_with_its_number() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("lines.jsonl");
    let mut text = String::new();
    for i in 0..16 {
        text.push_str(&format!(
            "{{\"doc_id\":\"d{i}\",\"line_no\":0,\"patient_id\":\"p\",\"note_date\":\"2020-01-01\",\"text\":\"ok\"}}\n"
        ));
    }
    text.push_str("{\"doc_id\": \"broken\", \n");
    fs::write(&input, text).unwrap();
    let o = sleepnote(&["merge", "--input", p(&input), "--out", p(&tmp.path().join("m.jsonl"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 17"), "{}", stderr(&o));
}

#[test]
fn missing_config_input_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[paths]\ncorpus = \"nope.jsonl\"\noutput_dir = \"out\"\n").unwrap();
    let o = sleepnote(&["pipeline", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.jsonl"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[paths]\ncorpus = \"a\"\noutput_dir = \"o\"\n[dedup]\nthreshhold = 0.8\n").unwrap();
    let o = sleepnote(&["pipeline", "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshhold"));
}

#[test]
fn bad_rule_file_names_the_rule() {
    let tmp = tempfile::tempdir().unwrap();
    let docs = tmp.path().join("docs.jsonl");
    fs::write(&docs, "{\"doc_id\":\"d\",\"patient_id\":\"p\",\"note_date\":\"2020-01-01\",\"text\":\"snoring\"}\n").unwrap();
    let rules = tmp.path().join("rules.jsonl");
    fs::write(
        &rules,
        "{\"concept\":\"snoring\",\"pattern\":\"\\\\bsnor\"}\n{\"concept\":\"napping\",\"pattern\":\"nap(?=s)\"}\n",
    )
    .unwrap();
    let o = sleepnote(&[
        "extract",
        "--input",
        p(&docs),
        "--rules",
        p(&rules),
        "--mentions",
        p(&tmp.path().join("m.jsonl")),
        "--labels",
        p(&tmp.path().join("l.jsonl")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rule 1 (napping)"), "{}", stderr(&o));
}

#[test]
fn stages_rerun_from_intermediate_files_match_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d, &[]);
    assert!(sleepnote(&["pipeline", "--config", p(&d.join("pipeline.toml"))]).status.success());

    let run = |args: &[&str]| {
        let o = sleepnote(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    };
    let s = d.join("stages");
    run(&["merge", "--input", p(&d.join("notes.jsonl")), "--out", p(&s.join("merged.jsonl"))]);
    run(&[
        "dedup",
        "--input",
        p(&s.join("merged.jsonl")),
        "--kept",
        p(&s.join("kept.jsonl")),
        "--removed",
        p(&s.join("removed.csv")),
        "--seed",
        "42",
    ]);
    run(&["retrieve", "--input", p(&s.join("kept.jsonl")), "--out", p(&s.join("retrieved.jsonl"))]);
    run(&[
        "extract",
        "--input",
        p(&s.join("kept.jsonl")),
        "--retrieved",
        p(&s.join("retrieved.jsonl")),
        "--removed",
        p(&s.join("removed.csv")),
        "--mentions",
        p(&s.join("mentions.jsonl")),
        "--labels",
        p(&s.join("labels.jsonl")),
    ]);
    run(&[
        "evaluate",
        "--gold",
        p(&d.join("gold.jsonl")),
        "--pred",
        &format!("Rule-based NLP={}", p(&s.join("labels.jsonl"))),
        "--report",
        p(&s.join("report.txt")),
    ]);
    for f in ["merged.jsonl", "kept.jsonl", "removed.csv", "retrieved.jsonl", "mentions.jsonl", "labels.jsonl"] {
        assert_eq!(
            fs::read(s.join(f)).unwrap(),
            fs::read(d.join("run").join(f)).unwrap(),
            "{f}"
        );
    }
    let staged = fs::read_to_string(s.join("report.txt")).unwrap();
    let full = fs::read_to_string(d.join("run/report.txt")).unwrap();
    let rule_row = |t: &str| t.lines().find(|l| l.starts_with("Rule-based")).unwrap().to_string();
    assert_eq!(rule_row(&staged), rule_row(&full));
}

#[test]
fn train_predict_evaluate() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d, &[]);
    let run = |args: &[&str]| {
        let o = sleepnote(args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        o
    };
    run(&["merge", "--input", p(&d.join("notes.jsonl")), "--out", p(&d.join("docs.jsonl"))]);
    let o = run(&[
        "train",
        "--corpus",
        p(&d.join("docs.jsonl")),
        "--gold",
        p(&d.join("gold.jsonl")),
        "--out",
        p(&d.join("model.json")),
        "--epochs",
        "50",
    ]);
    let log: serde_json::Value = serde_json::from_str(stderr(&o).lines().last().unwrap()).unwrap();
    assert_eq!(log["counts"]["train_documents"], 200);
    run(&[
        "predict",
        "--model",
        p(&d.join("model.json")),
        "--input",
        p(&d.join("docs.jsonl")),
        "--out-dir",
        p(&d.join("preds")),
    ]);
    run(&[
        "evaluate",
        "--gold",
        p(&d.join("gold.jsonl")),
        "--pred",
        &format!("LR={}", p(&d.join("preds/logreg.jsonl"))),
        "--pred",
        &format!("KNN={}", p(&d.join("preds/knn.jsonl"))),
        "--report",
        p(&d.join("r.txt")),
        "--csv",
        p(&d.join("r.csv")),
    ]);
    let csv = fs::read_to_string(d.join("r.csv")).unwrap();
    assert!(csv.starts_with("system,concept,sensitivity,specificity,ppv,f1_positive,f1_weighted,flags"));
    assert_eq!(csv.lines().count(), 1 + 2 * 6);
}

#[test]
fn evaluate_with_missing_prediction_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d, &["--n-docs", "50"]);
    let preds = d.join("preds.jsonl");
    fs::write(&preds, "").unwrap();
    let o = sleepnote(&[
        "evaluate",
        "--gold",
        p(&d.join("gold.jsonl")),
        "--pred",
        &format!("X={}", p(&preds)),
        "--report",
        p(&d.join("r.txt")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing from predictions"));
}

#[test]
fn kappa_of_identical_files_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d, &["--n-docs", "60"]);
    let gold = fs::read_to_string(d.join("gold.jsonl")).unwrap();
    let labels: String = gold
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("split");
            v.to_string() + "\n"
        })
        .collect();
    let a = d.join("a.jsonl");
    fs::write(&a, labels).unwrap();
    let out = d.join("kappa.json");
    let o = sleepnote(&["kappa", "--a", p(&a), "--b", p(&a), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for (_, k) in v.as_object().unwrap() {
        assert_eq!(k["kappa"], 1.0);
    }
}

#[test]
fn infeasible_synth_config_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("s.toml");
    fs::write(&cfg, "n_docs = 5\n[concepts.snoring]\npositive = 9\nnegated = 0\nhypothetical = 0\n").unwrap();
    let o = sleepnote(&["synth", "--config", p(&cfg), "--out", p(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("exceed n_docs"), "{}", stderr(&o));
}
