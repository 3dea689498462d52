use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn mini() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mini")
}

fn logiprep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logiprep")).args(args).env_remove("LOGIPREP_SEED").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn packed(tmp: &Path) -> PathBuf {
    let out = tmp.join("shards");
    let cfg = mini().join("pack.toml");
    let o = logiprep(&["pack", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap(), "--workers", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("783 records in 4 shards"), "{}", stdout(&o));
    out
}

#[test]
fn pack_matches_golden_digests_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = packed(tmp.path());
    let golden = fs::read_to_string(mini().join("golden-shards.sha256")).unwrap();
    for line in golden.lines() {
        let (digest, name) = line.split_once("  ").unwrap();
        let got = hex::encode(Sha256::digest(fs::read(out.join(name)).unwrap()));
        assert_eq!(got, digest, "{name}");
    }
    let vocab = mini().join("vocab.txt");
    let o = logiprep(&["verify", out.to_str().unwrap(), "--vocab", vocab.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "ok: 783 records in 4 shards");
}

#[test]
fn hand_edited_shard_is_an_invariant_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = packed(tmp.path());
    let shard = out.join("shard-00001.jsonl");
    let text = fs::read_to_string(&shard).unwrap();
    fs::write(&shard, text.replacen("\"cls\":1", "\"cls\":0", 1)).unwrap();
    let o = logiprep(&["verify", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error[invariant-violation]"), "{}", stderr(&o));
}

#[test]
fn unparseable_shard_is_an_invariant_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let out = packed(tmp.path());
    let shard = out.join("shard-00002.jsonl");
    let text = fs::read_to_string(&shard).unwrap();
    fs::write(&shard, text.replacen("\"cls\":", "\"cls\":9,\"x\":", 1)).unwrap();
    let o = logiprep(&["verify", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error[invariant-violation]"), "{}", stderr(&o));
    assert!(stderr(&o).contains("shard-00002.jsonl"));
}

#[test]
fn missing_config_is_a_config_error() {
    let o = logiprep(&["pack", "-c", "/nonexistent/pack.toml", "-o", "/tmp/never"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[config-error]"), "{}", stderr(&o));
}

#[test]
fn unreadable_and_malformed_corpora() {
    let o = logiprep(&["segment", "/nonexistent/corpus.jsonl"]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[io-error]"));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.jsonl");
    fs::write(&bad, "{\"id\": 0, \"text\": \"Fine.\"}\nnot json\n").unwrap();
    let o = logiprep(&["segment", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("error[input-error]"));
}

#[test]
fn inspect_shows_the_showcase_sentence() {
    let cfg = mini().join("pack.toml");
    let o = logiprep(&["inspect", "-c", cfg.to_str().unwrap(), "0", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("hence") && s.contains("Entailment"), "{s}");
}

#[test]
fn stats_re_renders_the_saved_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = packed(tmp.path());
    let report = out.join("report.json");
    let o = logiprep(&["stats", report.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["sentences_kept"], 783);
}

#[test]
fn train_toy_writes_a_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = packed(tmp.path());
    let curve = tmp.path().join("curve.csv");
    let o = logiprep(&["train-toy", out.to_str().unwrap(), "--steps", "40", "--curve", curve.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("mean total loss"));
    let csv = fs::read_to_string(&curve).unwrap();
    assert_eq!(csv.lines().next(), Some("step,l_smlm,l_ecls,total"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn seed_environment_variable_changes_the_shards() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = mini().join("pack.toml");
    let out = tmp.path().join("reseeded");
    let o = Command::new(env!("CARGO_BIN_EXE_logiprep"))
        .args(["pack", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()])
        .env("LOGIPREP_SEED", "99")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = fs::read_to_string(mini().join("golden-shards.sha256")).unwrap();
    let first = golden.lines().next().unwrap().split_once("  ").unwrap().0;
    assert_ne!(hex::encode(Sha256::digest(fs::read(out.join("shard-00000.jsonl")).unwrap())), first);
}
