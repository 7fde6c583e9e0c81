use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn movoc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_movoc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = movoc(dir, args);
    assert!(
        out.status.success(),
        "movoc {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

/// Synthetic gold + plain corpus and two models trained on them.
fn fixture() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "gen-synthetic",
            "--seed",
            "42",
            "--words",
            "1500",
            "--prefixes",
            "10",
            "--stems",
            "80",
            "--suffixes",
            "10",
            "--out",
            "gold.tsv",
            "--plain",
            "plain.txt",
        ],
    );
    ok(
        d,
        &[
            "train",
            "--mode",
            "movoc",
            "--corpus",
            "plain.txt",
            "--segmented",
            "gold.tsv",
            "--merges",
            "200",
            "--out",
            "constrained.json",
        ],
    );
    ok(
        d,
        &[
            "train",
            "--mode",
            "bpe",
            "--corpus",
            "plain.txt",
            "--merges",
            "200",
            "--out",
            "plain.json",
        ],
    );
    dir
}

#[test]
fn compare_with_itself_has_zero_deltas() {
    let dir = fixture();
    let out = json(&ok(
        dir.path(),
        &[
            "compare",
            "constrained.json",
            "constrained.json",
            "--gold",
            "gold.tsv",
            "--json",
        ],
    ));
    for (k, v) in out["delta"].as_object().unwrap() {
        assert_eq!(v.as_f64(), Some(0.0), "{k}");
    }
    assert_eq!(out["model_a"], out["model_b"]);
}

#[test]
fn constrained_beats_unconstrained_on_precision() {
    let dir = fixture();
    let out = json(&ok(
        dir.path(),
        &[
            "compare",
            "plain.json",
            "constrained.json",
            "--gold",
            "gold.tsv",
            "--text",
            "plain.txt",
            "--json",
        ],
    ));
    assert!(out["delta"]["boundary_precision"].as_f64().unwrap() > 0.0);
    assert_eq!(out["model_a"]["entropy_unit"], "nats");

    let table = ok(
        dir.path(),
        &[
            "compare",
            "plain.json",
            "constrained.json",
            "--gold",
            "gold.tsv",
        ],
    );
    assert!(table.lines().next().unwrap().contains("delta"));
    assert!(table.contains("boundary_precision"));
}

#[test]
fn missing_gold_exits_2_naming_the_path() {
    let dir = fixture();
    let out = movoc(
        dir.path(),
        &["eval", "--model", "constrained.json", "--gold", "nope.tsv"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("nope.tsv"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(movoc(dir.path(), &["train"]).status.code(), Some(2));
    assert_eq!(movoc(dir.path(), &["frobnicate"]).status.code(), Some(2));
    std::fs::write(dir.path().join("g.tsv"), "ab\ta|b\n").unwrap();
    let out = movoc(
        dir.path(),
        &[
            "train", "--mode", "movoc", "--corpus", "g.tsv", "--merges", "3",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_gold_is_a_runtime_failure() {
    let dir = fixture();
    std::fs::write(dir.path().join("bad.tsv"), "አልሰበሩም\tአል|ሰበር|ም\n").unwrap();
    let out = movoc(
        dir.path(),
        &["eval", "--model", "constrained.json", "--gold", "bad.tsv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 1") && err.contains("አልሰበሩም"), "{err}");
}

#[test]
fn artifacts_get_manifests_and_are_deterministic() {
    let dir = fixture();
    let d = dir.path();
    let manifest =
        json(&std::fs::read_to_string(d.join("constrained.json.manifest.json")).unwrap());
    assert_eq!(manifest["command"], "train");
    let inputs = manifest["inputs"].as_object().unwrap();
    assert!(inputs.contains_key("plain.txt") && inputs.contains_key("gold.tsv"));
    assert_eq!(inputs["plain.txt"].as_str().unwrap().len(), 64);

    ok(
        d,
        &[
            "train",
            "--mode",
            "movoc",
            "--corpus",
            "plain.txt",
            "--segmented",
            "gold.tsv",
            "--merges",
            "200",
            "--out",
            "again.json",
        ],
    );
    assert_eq!(
        std::fs::read(d.join("constrained.json")).unwrap(),
        std::fs::read(d.join("again.json")).unwrap()
    );
}

#[test]
fn encode_decode_round_trip() {
    let dir = fixture();
    let d = dir.path();
    let gold = std::fs::read_to_string(d.join("gold.tsv")).unwrap();
    let words: Vec<&str> = gold
        .lines()
        .take(40)
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    let text = format!("{}\n{}\n", words[..20].join(" "), words[20..].join(" "));
    std::fs::write(d.join("text.txt"), &text).unwrap();
    for model in ["constrained.json", "plain.json"] {
        let ids = ok(d, &["encode", "--model", model, "--ids", "text.txt"]);
        std::fs::write(d.join("ids.txt"), &ids).unwrap();
        assert_eq!(ok(d, &["decode", "--model", model, "ids.txt"]), text);
    }
    let tokens = ok(d, &["encode", "--model", "constrained.json", "text.txt"]);
    assert_eq!(tokens.lines().count(), 2);
    let rows = ok(
        d,
        &[
            "encode",
            "--model",
            "constrained.json",
            "--json",
            "text.txt",
        ],
    );
    let first = json(rows.lines().next().unwrap());
    assert_eq!(first["pretokens"].as_array().unwrap().len(), 20);
}

#[test]
fn normalize_and_pretokenize() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("in.txt"), "  ሰላም፡ለዓለም።\u{200B}  \n").unwrap();
    assert_eq!(ok(dir.path(), &["normalize", "in.txt"]), "ሰላም ለዓለም።\n");
    assert_eq!(ok(dir.path(), &["pretokenize", "in.txt"]), "ሰላም ለዓለም ።\n");
}

fn write_lang(dir: &Path, tag: &str, seed: &str) -> (PathBuf, PathBuf) {
    let gold = dir.join(format!("{tag}.tsv"));
    let plain = dir.join(format!("{tag}.txt"));
    ok(
        dir,
        &[
            "gen-synthetic",
            "--seed",
            seed,
            "--words",
            "600",
            "--prefixes",
            "5",
            "--stems",
            "30",
            "--suffixes",
            "5",
            "--out",
            gold.to_str().unwrap(),
            "--plain",
            plain.to_str().unwrap(),
        ],
    );
    (plain, gold)
}

#[test]
fn pipeline_two_languages_vocab_is_union() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_lang(d, "amh", "1");
    write_lang(d, "tir", "2");
    let config = r#"{"size": 120, "ratio": 0.5, "languages": [
        {"tag": "amh", "plain": "amh.txt", "segmented": "amh.tsv"},
        {"tag": "tir", "plain": "tir.txt", "segmented": "tir.tsv"}]}"#;
    std::fs::write(d.join("config.json"), config).unwrap();
    let summary = json(&ok(
        d,
        &["pipeline", "config.json", "--out", "out", "--json"],
    ));
    let model = json(&std::fs::read_to_string(d.join("out/model.json")).unwrap());
    let vocab = json(&std::fs::read_to_string(d.join("out/vocab.json")).unwrap());
    let n = model["vocab"].as_array().unwrap().len() as u64;
    assert_eq!(summary["sizes"]["deduplicated"].as_u64(), Some(n));
    assert_eq!(vocab["vocab"].as_array().unwrap().len() as u64, n);
    assert_eq!(summary["budgets"][0]["s_lang"], 60);
    assert_eq!(summary["budgets"][1]["s_lang"], 60);
    assert!(d.join("out/model.json.manifest.json").exists());

    ok(
        d,
        &[
            "build-vocab",
            "--size",
            "120",
            "--ratio",
            "0.5",
            "--lang",
            "amh=amh.txt:amh.tsv",
            "--lang",
            "tir=tir.txt:tir.tsv",
            "--out",
            "v.json",
        ],
    );
    let built = json(&std::fs::read_to_string(d.join("v.json")).unwrap());
    assert_eq!(built["vocab"], vocab["vocab"]);
    ok(
        d,
        &[
            "train",
            "--corpus",
            "amh.txt",
            "--segmented",
            "amh.tsv",
            "--vocab",
            "v.json",
            "--merges",
            "50",
            "--out",
            "m.json",
        ],
    );
}

#[test]
fn pipeline_single_language_gets_whole_budget() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_lang(d, "gez", "3");
    std::fs::write(
        d.join("config.json"),
        r#"{"size": 50, "ratio": 0.2, "merges": 10, "languages": [{"tag": "gez", "plain": "gez.txt", "segmented": "gez.tsv"}]}"#,
    )
    .unwrap();
    let summary = json(&ok(
        d,
        &["pipeline", "config.json", "--out", "out", "--json"],
    ));
    assert_eq!(summary["budgets"][0]["s_lang"], 50);
    assert_eq!(summary["budgets"][0]["s_morpheme"], 10);
    assert!(summary["learned_merges"].as_u64().unwrap() <= 10);
}

#[test]
fn pipeline_rejects_bad_ratio_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_lang(d, "gez", "3");
    std::fs::write(
        d.join("config.json"),
        r#"{"size": 50, "ratio": 1.5, "languages": [{"tag": "gez", "plain": "gez.txt", "segmented": "gez.tsv"}]}"#,
    )
    .unwrap();
    let out = movoc(d, &["pipeline", "config.json", "--out", "out"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio"));
    assert!(!d.join("out").exists());
}
