use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn lexfoundry(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexfoundry"))
        .args(args)
        .env("LEXFOUNDRY_LOG", "error")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn clean_keeps_eight_of_ten() {
    let out = tempfile::tempdir().unwrap();
    let cfg = data("tiny/config.toml");
    let o = lexfoundry(&["clean", "--config", s(&cfg), "--out", s(out.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.path().join("clean/drop_report.txt")).unwrap();
    assert!(report.contains("kept=8"), "{report}");
    let ingest = fs::read_to_string(out.path().join("clean/ingest_report.csv")).unwrap();
    assert!(ingest.contains("london,10,8,0,0,2"), "{ingest}");
    let corpus = fs::read_to_string(out.path().join("clean/corpus.tsv")).unwrap();
    assert_eq!(corpus.lines().filter(|l| !l.starts_with('#')).count() - 1, 8);
}

#[test]
fn analyze_without_dictionary_exits_2() {
    let out = tempfile::tempdir().unwrap();
    let cfg = data("tiny/config.toml");
    let o = lexfoundry(&["clean", "--config", s(&cfg), "--out", s(out.path())]);
    assert!(o.status.success());
    let o = lexfoundry(&["analyze", "temporal", "--config", s(&cfg), "--out", s(out.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dictionary"));
    assert!(!out.path().join("analyze").exists());
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(lexfoundry(&["clean"]).status.code(), Some(2));
    let cfg = data("tiny/config.toml");
    let o = lexfoundry(&["analyze", "sentiment", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = 1\nunknown_key = 3\n").unwrap();
    assert_eq!(lexfoundry(&["clean", "--config", s(&bad)]).status.code(), Some(2));
}

#[test]
fn missing_review_file_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[[inputs.cities]]\nname = \"x\"\nreviews = \"nope.csv\"\n").unwrap();
    let o = lexfoundry(&["clean", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.csv"));
}

#[test]
fn synth_then_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let proj = dir.path().join("proj");
    let o = lexfoundry(&["synth", s(&proj), "--hosts", "30", "--sentences", "120"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = proj.join("config.toml");
    let mut tables = Vec::new();
    for (name, extra) in [("a", vec!["--deterministic"]), ("b", vec!["--threads", "2"])] {
        let out = dir.path().join(name);
        let mut args = vec!["run", "--config", s(&cfg), "--out", s(&out)];
        args.extend(extra);
        let o = lexfoundry(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
        for stage in ["clean", "induce", "embed", "expand", "cluster", "analyze", "validate-dictionary"] {
            assert!(manifest.contains(&format!("\"{stage}\"")), "{stage}");
        }
        tables.push(fs::read(out.join("analyze/temporal_level1.csv")).unwrap());
        tables.push(fs::read(out.join("cluster/dictionary.dict")).unwrap());
    }
    assert_eq!(tables[0], tables[2]);
    assert_eq!(tables[1], tables[3]);
}
