use std::path::Path;
use std::process::{Command, Output};

fn nounclass(ws: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nounclass"))
        .arg("--workspace")
        .arg(ws)
        .args(args)
        .env_remove("NOUNCLASS_WORKSPACE")
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn synth(ws: &Path, preset: &str) {
    let out = nounclass(ws, &["synth", "--preset", preset]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["transfer", "--help"], &["pipeline", "--help"]] {
        let out = nounclass(dir.path(), args);
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nounclass(dir.path(), &["transfer", "--bogus"]).status.code(), Some(1));
    assert_eq!(nounclass(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(nounclass(dir.path(), &["baseline", "--kind", "median", "--source", "x"]).status.code(), Some(1));
}

#[test]
fn missing_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = nounclass(dir.path(), &["transfer", "--source", "nope.embjsonl", "--target", "nope2.embjsonl"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "tiny");
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "neighbours = 3\n").unwrap();
    let src = dir.path().join("source.embjsonl");
    let out = nounclass(
        dir.path(),
        &["--config", s(&cfg), "transfer", "--source", s(&src), "--target", s(&dir.path().join("target.embjsonl"))],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn flags_override_config_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "tiny");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "k = 3\nthreshold = 0.5\n").unwrap();
    let (src, tgt) = (dir.path().join("source.embjsonl"), dir.path().join("target.embjsonl"));
    let base = ["transfer", "--source", s(&src), "--target", s(&tgt)];

    let defaults = json(&nounclass(dir.path(), &base));
    assert_eq!(defaults["k"], 5);
    assert_eq!(defaults["threshold"], 0.6);

    let mut with_cfg = vec!["--config", s(&cfg)];
    with_cfg.extend(base);
    let configured = json(&nounclass(dir.path(), &with_cfg));
    assert_eq!(configured["k"], 3);
    assert_eq!(configured["threshold"], 0.5);

    with_cfg.extend(["--k", "1"]);
    let flagged = json(&nounclass(dir.path(), &with_cfg));
    assert_eq!(flagged["k"], 1);
    assert_eq!(flagged["threshold"], 0.5);
}

#[test]
fn synth_then_staged_run() {
    let dir = tempfile::tempdir().unwrap();
    let ws = dir.path();
    synth(ws, "innovation");
    let p = |f: &str| ws.join(f);
    for f in ["source.embjsonl", "target.embjsonl", "corpus.txt", "manifest.json", "inventory.jsonl"] {
        assert!(p(f).is_file(), "{f}");
    }

    let steps: Vec<Vec<String>> = vec![
        vec!["extract".into(), "--corpus".into(), s(&p("corpus.txt")).into()],
        vec!["transfer".into(), "--source".into(), s(&p("source.embjsonl")).into(), "--target".into(), s(&p("target.embjsonl")).into()],
        vec!["cluster".into(), "--target".into(), s(&p("target.embjsonl")).into(), "--candidates".into(), s(&p("candidates.txt")).into()],
        vec!["map".into(), "--inventory".into(), s(&p("inventory.jsonl")).into(), "--candidates".into(), s(&p("candidates.txt")).into()],
        vec!["ensemble".into()],
        vec!["report".into(), "--gold".into(), s(&p("target_gold.jsonl")).into()],
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let out = nounclass(ws, &args);
        assert!(out.status.success(), "{step:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let innovations = std::fs::read_to_string(p("innovations.jsonl")).unwrap();
    assert_eq!(innovations.lines().filter(|l| l.contains("\"prefix\":\"a\"")).count(), 1);
    assert!(std::fs::read_to_string(p("report.txt")).unwrap().contains("accepted"));

    let agree = json(&nounclass(ws, &["agreement"]));
    assert!(agree["rate"].as_f64().unwrap() > 90.0);

    let out = nounclass(ws, &["baseline", "--kind", "random", "--source", s(&p("source.embjsonl")), "--seed", "1"]);
    assert!(out.status.success());
    assert!(p("baseline_random.jsonl").is_file());
}

#[test]
fn pipeline_subcommand_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "tiny");
    let ws = dir.path().join("ws");
    let d = |f: &str| data.join(f);
    let out = nounclass(
        &ws,
        &[
            "pipeline",
            "--source",
            s(&d("source.embjsonl")),
            "--target",
            s(&d("target.embjsonl")),
            "--corpus",
            s(&d("corpus.txt")),
            "--inventory",
            s(&d("inventory.jsonl")),
            "--clusters",
            "4",
            "--min-size",
            "5",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["candidates.txt", "transfer.jsonl", "clusters.jsonl", "profiles.jsonl", "ensemble_accepted.jsonl", "report.txt", "summary.json", "clusters.svg"] {
        assert!(ws.join(f).is_file(), "{f}");
    }
}
