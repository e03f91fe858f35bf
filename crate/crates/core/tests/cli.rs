//! Smoke tests of the command-line tool on a small synthetic corpus.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use debate_highlights::synth::{generate, SynthConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_debate-highlights"))
}

fn fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let cfg = SynthConfig { debates: 4, blocks_per_debate: 12, seed: 3, ..Default::default() };
    generate(&cfg, true).unwrap().write(&dir.join("data")).unwrap()
}

fn run(args: &[&str], data: &(PathBuf, PathBuf, PathBuf), out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--transcripts")
        .arg(&data.0)
        .arg("--articles")
        .arg(&data.1)
        .arg("--party-map")
        .arg(&data.2)
        .arg("--output-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn match_writes_index_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("out");
    ok(&run(&["match", "--theta", "0.8"], &data, &out));
    let index = std::fs::read_to_string(out.join("quote_index.csv")).unwrap();
    assert!(index.starts_with("# config-hash: "));
    assert!(index.lines().nth(1).unwrap().starts_with("sentence_id,outlet,quote_count"));
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest-match.json")).unwrap()).unwrap();
    assert_eq!(manifest["stage"], "match");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    let hash = manifest["config_hash"].as_str().unwrap();
    assert!(index.contains(hash));

    let first = std::fs::read(out.join("quote_index.csv")).unwrap();
    ok(&run(&["match", "--theta", "0.8"], &data, &out));
    assert_eq!(first, std::fs::read(out.join("quote_index.csv")).unwrap());
}

#[test]
fn staged_run_to_debate_type_slices() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let out = dir.path().join("out");
    for stage in ["ingest", "match"] {
        ok(&run(&[stage], &data, &out));
    }
    ok(&run(&["pairs", "--t", "10"], &data, &out));
    ok(&run(&["featurize", "--t", "10"], &data, &out));
    ok(&run(&["train", "--t", "10"], &data, &out));
    ok(&run(&["evaluate", "--slice", "debate-type"], &data, &out));
    let csv = std::fs::read_to_string(out.join("evaluation.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 4, "{csv}");
    assert!(rows.iter().all(|r| r.starts_with("debate_type,")));
}

#[test]
fn out_of_order_stage_names_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture(dir.path());
    let o = run(&["train"], &data, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run `featurize` first"));
}

#[test]
fn exit_codes() {
    assert_eq!(bin().arg("no-such-command").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["match", "--theta", "nan-ish"]).output().unwrap().status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let missing = bin()
        .args(["match", "--transcripts", "/no/such/file.jsonl", "--output-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));

    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{not json\n").unwrap();
    let articles = dir.path().join("a.jsonl");
    std::fs::write(&articles, "").unwrap();
    let o = bin()
        .args(["ingest", "--transcripts"])
        .arg(&bad)
        .arg("--articles")
        .arg(&articles)
        .arg("--output-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.jsonl:1"));
}

#[test]
fn config_file_round_trip_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "seed = 5\n[matching]\ntheta = 0.7\nmin_len = 5\ncontext_window = 15\nwindow_slack = 0.25\n").unwrap();
    let o = bin().arg("config").arg("--config").arg(&path).args(["--theta", "0.9"]).output().unwrap();
    ok(&o);
    let text = String::from_utf8(o.stdout).unwrap();
    let cfg = debate_highlights::pipeline::RunConfig::from_toml(&text).unwrap();
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.pairs.seed, 5);
    assert_eq!(cfg.matching.theta, 0.9);
}

#[test]
fn lm_train_writes_model() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    std::fs::write(&corpus, "We need jobs.\nWe need good jobs now.\n").unwrap();
    let model = dir.path().join("model.lm");
    let o = bin().args(["lm", "train", "--order", "3", "--min-count", "1"]).arg(&corpus).arg("-o").arg(&model).output().unwrap();
    ok(&o);
    let lm = debate_highlights::ngramlm::LanguageModel::load(&model).unwrap();
    assert_eq!(lm.order(), 3);
    assert!(lm.prob("need", &["we"]) > lm.prob("jobs", &["we"]));
}
