use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> String {
    root()
        .join("crates/core/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_promptcat"))
        .args(args)
        .current_dir(root())
        .env("RUST_LOG", "error")
        .env_remove("LLM_ENDPOINT")
        .env_remove("LLM_API_KEY")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_run<'a>(task: &'a str, corpus: &'a str, out: &'a str) -> Vec<&'a str> {
    vec![
        "--task",
        task,
        "--corpus",
        corpus,
        "--sample-n",
        "4",
        "--seed-sample",
        "3",
        "--seed-shuffle",
        "5",
        "--out",
        out,
    ]
}

#[test]
fn laws_exit_codes() {
    assert_eq!(
        run(&["laws", &fixture("three.json")]).status.code(),
        Some(0)
    );
    let broken = run(&["laws", &fixture("three_broken.json")]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(stderr(&broken).contains("counterexample"));
    assert_eq!(
        run(&["laws", "no/such/fixture.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["laws", &fixture("corpus.txt")]).status.code(),
        Some(2)
    );
}

#[test]
fn laws_writes_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "laws",
        &fixture("idea.json"),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("laws.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["tasks"][0], "Idea");
}

#[test]
fn missing_settings_are_input_errors() {
    let o = run(&["metagen", "--task", "ideation"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--corpus"));
    let corpus = fixture("corpus.txt");
    let o = run(&[
        "metagen",
        "--task",
        "ideation",
        "--corpus",
        &corpus,
        "--sample-n",
        "3",
        "--seed-sample",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed-shuffle"));
    assert_eq!(run(&["metagen", "--bogus"]).status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "task = \"ideation\"\nsample = 3\n").unwrap();
    let o = run(&["metagen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sample"));
}

#[test]
fn live_backend_without_credentials_fails_before_sending() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.txt");
    let out = tmp.path().display().to_string();
    let mut args = vec!["metagen", "--backend", "live"];
    args.extend(small_run("ideation", &corpus, &out));
    let o = run(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("LLM_ENDPOINT"));
    assert!(!tmp.path().join("pack.json").exists());
}

#[test]
fn replay_misses_exit_three_and_recording_fills_them() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    std::fs::create_dir(&cache).unwrap();
    let corpus = fixture("corpus.txt");
    let (a, b) = (
        tmp.path().join("a").display().to_string(),
        tmp.path().join("b").display().to_string(),
    );
    let cache_s = cache.display().to_string();

    let mut replay = vec!["metagen", "--backend", "replay", "--cache", &cache_s];
    replay.extend(small_run("creativity", &corpus, &a));
    let miss = run(&replay);
    assert_eq!(miss.status.code(), Some(3), "{}", stderr(&miss));
    assert!(stderr(&miss).contains("replay cache miss"));

    let mut record = vec!["record", "--backend", "mock", "--cache", &cache_s];
    record.extend(small_run("creativity", &corpus, &b));
    let rec = run(&record);
    assert_eq!(rec.status.code(), Some(0), "{}", stderr(&rec));

    let hit = run(&replay);
    assert_eq!(hit.status.code(), Some(0), "{}", stderr(&hit));
    for f in ["generated.json", "executions.json", "pack.json"] {
        assert_eq!(
            std::fs::read(tmp.path().join("a").join(f)).unwrap(),
            std::fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        run(&["record", "--backend", "replay", "--task", "ideation"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn staged_commands_match_metagen() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.txt");
    let full = tmp.path().join("full").display().to_string();
    let mut args = vec!["metagen"];
    args.extend(small_run("ideation", &corpus, &full));
    assert_eq!(run(&args).status.code(), Some(0));
    let generated = tmp.path().join("full/generated.json").display().to_string();

    let staged = tmp.path().join("staged").display().to_string();
    let mut pack = vec!["pack", "--generated", &generated];
    pack.extend(small_run("ideation", &corpus, &staged));
    assert_eq!(run(&pack).status.code(), Some(0));
    let mut exec = vec!["execute", "--generated", &generated];
    exec.extend(small_run("ideation", &corpus, &staged));
    assert_eq!(run(&exec).status.code(), Some(0));
    for f in ["pack.json", "executions.json"] {
        assert_eq!(
            std::fs::read(tmp.path().join("full").join(f)).unwrap(),
            std::fs::read(tmp.path().join("staged").join(f)).unwrap(),
            "{f}"
        );
    }

    let mut wrong = vec!["pack", "--generated", &generated];
    wrong.extend(small_run("creativity", &corpus, &staged));
    assert_eq!(run(&wrong).status.code(), Some(2));
}

#[test]
fn analyze_reports_and_rejects_mismatches() {
    let tmp = tempfile::tempdir().unwrap();
    let pack = fixture("synthetic/pack.json");
    let out = tmp.path().join("report").display().to_string();
    let ok = run(&[
        "analyze",
        "--pack",
        &pack,
        "--rankings",
        &fixture("synthetic/rankings_meta.csv"),
        "--out",
        &out,
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(
        stdout.contains("prompts: top-3 meta share 1.000"),
        "{stdout}"
    );
    assert!(stdout.contains("p = 1.907349e-6"), "{stdout}");
    assert!(tmp.path().join("report/summary.json").exists());

    let bad = tmp.path().join("bad.csv");
    std::fs::write(
        &bad,
        "item_id,annotator_id,target,ranking\ndoc-999,a,prompts,m1>m2>m3>b1>b2>b3\n",
    )
    .unwrap();
    let o = run(&[
        "analyze",
        "--pack",
        &pack,
        "--rankings",
        bad.to_str().unwrap(),
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("doc-999"));

    let text = std::fs::read_to_string(&pack).unwrap().replacen(
        "\"schema_version\": 1",
        "\"schema_version\": 9",
        1,
    );
    let old = tmp.path().join("old.json");
    std::fs::write(&old, text).unwrap();
    let o = run(&[
        "analyze",
        "--pack",
        old.to_str().unwrap(),
        "--rankings",
        &fixture("synthetic/rankings_meta.csv"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema version 9"));
}
