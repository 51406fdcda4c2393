use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .current_dir(dir)
        .env_remove("LAB_SEED")
        .args(args)
        .output()
        .expect("lab runs")
}

fn lab_env(dir: &Path, args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .current_dir(dir)
        .env("LAB_SEED", seed)
        .args(args)
        .output()
        .expect("lab runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn fixtures() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "full2.json", r#"{"type":"full","k":2}"#);
    write(d, "golden.json", r#"{"type":"sft","transition":[[1,1],[1,0]]}"#);
    write(d, "d0.json", r#"{"type":"periodic","cycle":"0"}"#);
    write(d, "d1.json", r#"{"type":"periodic","cycle":"1"}"#);
    write(d, "c001.json", r#"{"type":"periodic","cycle":"001"}"#);
    write(d, "bern.json", r#"{"type":"bernoulli","weights":[0.5,0.5]}"#);
    write(d, "ind1.json", r#"{"type":"locally_constant","range":1,"table":{"0":0,"1":1}}"#);
    write(d, "phi12.json", r#"{"type":"locally_constant","range":1,"table":{"0":1,"1":2}}"#);
    write(d, "sin.json", r#"{"type":"trig","kind":"sin","frequency":1}"#);
    write(d, "cos.json", r#"{"type":"trig","kind":"cos","frequency":1}"#);
    write(d, "seventh.json", r#"{"type":"rational","p":1,"q":7}"#);
    write(d, "sched.json", r#"{"initial_length":200,"growth":{"proportional":30.0}}"#);
    write(d, "three.json", r#"{"initial_length":500,"growth":{"proportional":45.0}}"#);
    dir
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn space_info_reports_entropy_and_counts() {
    let dir = fixtures();
    let v = json_stdout(&lab(dir.path(), &["space", "info", "--space", "golden.json"]));
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((v["entropy"]["value"].as_f64().unwrap() - g.ln()).abs() < 1e-12);
    assert_eq!(v["word_counts"][9]["count"], "144");
    assert_eq!(v["mixing_gap"], 2);
    assert_eq!(v["provenance"]["function"], "symbolic::ShiftSpace::count_words");
}

#[test]
fn beta_kneading_digits_and_precision() {
    let dir = fixtures();
    let v = json_stdout(&lab(dir.path(), &["beta", "kneading", "--beta", "1.8", "--digits", "8"]));
    assert_eq!(v["digits"], serde_json::json!([1, 1, 0, 1, 0, 1, 0, 1]));
    let out = lab(dir.path(), &["beta", "kneading", "--beta", "1.8", "--digits", "8", "--precision-bits", "16"]);
    assert_eq!(out.status.code(), Some(3));
    let out = lab(dir.path(), &["beta", "kneading", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(2), "integer β is a configuration error");
}

#[test]
fn measure_integrate_matches_closed_forms() {
    let dir = fixtures();
    let v = json_stdout(&lab(
        dir.path(),
        &["measure", "integrate", "--space", "full2.json", "--measures", "c001.json", "bern.json", "--observables", "ind1.json"],
    ));
    let rows = v["integrals"].as_array().unwrap();
    assert!((rows[0]["value"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((rows[1]["value"].as_f64().unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn trace_writes_csv() {
    let dir = fixtures();
    let out = lab(
        dir.path(),
        &[
            "trace", "--point", "seventh.json", "--observables", "sin.json", "cos.json", "--horizon", "1e4",
            "--checkpoints", "geometric:1.5", "--out", "trace.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("checkpoint,observable_id,average"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len() % 2, 0);
    let last: f64 = rows[rows.len() - 2].split(',').nth(2).unwrap().parse().unwrap();
    assert!((last - 7f64.sqrt() / 6.0).abs() < 1e-3, "sin average along 1/7 is {last}");
}

#[test]
fn synth_without_seed_is_a_config_error() {
    let dir = fixtures();
    let out = lab(
        dir.path(),
        &["synth", "irregular", "--space", "full2.json", "--measures", "bern.json", "d0.json", "--horizon", "1e5"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`seed`"));

    write(
        dir.path(),
        "cfg.json",
        r#"{"operation":"synth_irregular","space":{"type":"full","k":2},"horizon":100000,
            "measures":[{"type":"bernoulli","weights":[0.5,0.5]},{"type":"periodic","cycle":"0"}]}"#,
    );
    let out = lab(dir.path(), &["synth", "irregular", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_errors_name_the_line_and_field() {
    let dir = fixtures();
    write(dir.path(), "bad.json", "{\n  \"type\": \"full\",\n  \"kk\": 2\n}");
    let out = lab(dir.path(), &["space", "info", "--space", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("kk"), "{err}");
    let out = lab(dir.path(), &["space", "info", "--space", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_is_reproducible_and_seed_precedence_holds() {
    let dir = fixtures();
    let args = |out: &'static str| -> Vec<&'static str> {
        vec![
            "synth", "irregular", "--space", "full2.json", "--measures", "bern.json", "d0.json", "--observables",
            "ind1.json", "--schedule", "three.json", "--horizon", "1e6", "--checkpoints", "block_tails:3:0.002",
            "--out", out,
        ]
    };
    let mut a = args("a.json,a.csv");
    a.extend(["--seed", "42"]);
    let mut b = args("b.json,b.csv");
    b.extend(["--seed", "42"]);
    assert!(lab(dir.path(), &a).status.success());
    assert!(lab(dir.path(), &b).status.success());
    let read = |n: &str| std::fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a.csv"), read("b.csv"));

    assert!(lab_env(dir.path(), &args("c.json"), "42").status.success());
    assert_eq!(read("a.json"), read("c.json"), "LAB_SEED supplies the seed");
    let mut d = args("d.json");
    d.extend(["--seed", "42"]);
    assert!(lab_env(dir.path(), &d, "7").status.success());
    assert_eq!(read("a.json"), read("d.json"), "the flag beats LAB_SEED");
    assert!(lab_env(dir.path(), &args("e.json"), "7").status.success());
    assert_ne!(read("a.json"), read("e.json"));

    let plan = read_json(&dir.path().join("a.json"));
    assert_eq!(plan["provenance"]["seed"], 42);
    assert_eq!(plan["provenance"]["function"], "synthesis::build_irregular_point");
    let cert = &plan["certificates"][0];
    assert!((cert["gap"].as_f64().unwrap() - 0.5).abs() < 0.03, "{cert}");
    let segments = plan["plan"]["segments"].as_array().unwrap();
    assert!(segments.iter().all(|s| s["deviation"].as_f64() <= s["tolerance"].as_f64()));
}

#[test]
fn synth_variants_run() {
    let dir = fixtures();
    let d = dir.path();
    let out = lab(
        d,
        &[
            "synth", "jointly", "--space", "full2.json", "--measures", "d0.json", "c001.json", "d0.json", "c001.json",
            "--observables", "sin.json", "cos.json", "--schedule", "sched.json", "--horizon", "1e6", "--seed", "42",
            "--checkpoints", "block_tails:3:0.002", "--out", "j.json,j.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j = read_json(&d.join("j.json"));
    assert_eq!(j["plan"]["theta"].as_array().unwrap().len(), 2);
    assert!(j["certificates"].as_array().unwrap().iter().all(|c| c["gap"].is_number()));

    for kind in ["saturated", "gmax"] {
        let out = lab(
            d,
            &[
                "synth", kind, "--space", "full2.json", "--measures", "d0.json", "d1.json", "--schedule", "sched.json",
                "--horizon", "1e5", "--seed", "42", "--out", "s.json",
            ],
        );
        assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
    }

    let out = lab(
        d,
        &[
            "synth", "family", "--space", "full2.json", "--measures", "bern.json", "d0.json", "--n", "400",
            "--free-fraction", "0.5", "--block-len", "20", "--seed", "42", "--out", "f.json",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let f = read_json(&d.join("f.json"));
    assert_eq!(f["cardinality"], "1606938044258990275541962092341162602522202993782792835301376");
    assert_eq!(f["pattern"].as_str().unwrap().len(), 400);
}

#[test]
fn pressure_outputs_carry_method_and_bounds() {
    let dir = fixtures();
    let d = dir.path();
    for args in [
        vec!["pressure", "transfer", "--space", "golden.json"],
        vec!["pressure", "cylinder", "--space", "full2.json", "--observables", "phi12.json", "--n", "12"],
        vec!["pressure", "bsdim", "--space", "full2.json", "--observables", "phi12.json"],
        vec!["pressure", "beta", "--beta", "1.8"],
    ] {
        let v = json_stdout(&lab(d, &args));
        for key in ["value", "method", "n", "error_bound"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
    }
    let v = json_stdout(&lab(d, &["pressure", "bsdim", "--space", "full2.json", "--observables", "phi12.json"]));
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((v["value"].as_f64().unwrap() - g.ln()).abs() < 1e-6);
    let v = json_stdout(&lab(d, &["pressure", "beta", "--beta", "1.8", "--n-list", "20"]));
    assert!((v["value"].as_f64().unwrap() - 1.8f64.ln()).abs() <= 0.08);
    let out = lab(d, &["pressure", "bsdim", "--space", "full2.json", "--observables", "ind1.json"]);
    assert_eq!(out.status.code(), Some(3), "non-positive potential");
}

#[test]
fn demo_report_schema() {
    let dir = fixtures();
    let out = lab(dir.path(), &["demo", "section4", "--horizon", "1e6", "--seed", "42", "--out", "report.json,trace.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&dir.path().join("report.json"));
    let freqs = r["frequencies"].as_array().unwrap();
    assert_eq!(freqs.len(), 8);
    for (i, f) in freqs.iter().enumerate() {
        assert_eq!(f["m"], i + 1);
        assert!((f["sin_gap"].as_f64().unwrap() - 7f64.sqrt() / 6.0).abs() < 1e-9);
        assert!((f["cos_gap"].as_f64().unwrap() - 7.0 / 6.0).abs() < 1e-9);
    }
    let certs = r["certificates"].as_array().unwrap();
    assert!((certs[0]["gap"].as_f64().unwrap() - 0.440959).abs() <= 0.02);
    assert!((certs[1]["gap"].as_f64().unwrap() - 7.0 / 6.0).abs() <= 0.02);
    assert!(std::fs::read_to_string(dir.path().join("trace.csv")).unwrap().starts_with("checkpoint,observable_id,average\n"));
}

#[test]
fn verify_all_passes() {
    let dir = fixtures();
    let out = lab(dir.path(), &["verify", "all", "--out", "verify.json"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 9);
}
