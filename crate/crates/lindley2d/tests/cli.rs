use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lindley2d"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn stderr_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().expect("stderr record")).expect("stderr is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

const SMALL_TAIL: &str = r#"
name = "small"
seed = 5

[distribution]
kind = "product"
first = { kind = "finite_support", atoms = [[1, "1/2"], [-1, "1/2"]] }
second = { kind = "gaussian", mean = 0, variance = 1 }

[tail]
start = [1, 1]
n_max = 500
per_decade = 10
paths = 20000
"#;

#[test]
fn every_bundled_config_classifies_as_declared() {
    let tmp = TempDir::new().unwrap();
    for name in [
        "case_a",
        "case_b",
        "case_c_rho_zero",
        "case_c_rho_neg",
        "case_c_rho_pos",
        "case_d",
    ] {
        let out_dir = tmp.path().join(name);
        let out = run(&[
            "classify",
            "--config",
            bundled(name).to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(report(&out_dir)["status"], "pass");
    }
}

#[test]
fn classify_reports_verdict_and_exponent() {
    let tmp = TempDir::new().unwrap();
    let out = run(&[
        "classify",
        "--config",
        bundled("case_c_rho_neg").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let r = report(tmp.path());
    assert_eq!(r["schema_version"], 1);
    let c = &r["result"]["classification"];
    assert_eq!(c["verdict"], "Transient");
    assert!((c["tail_exponent"].as_f64().unwrap() - 1.5).abs() < 1e-12);

    let out = run(&[
        "classify",
        "--config",
        bundled("case_b").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        report(tmp.path())["result"]["classification"]["verdict"],
        "PositiveRecurrent"
    );
}

#[test]
fn malformed_probability_sum_is_a_schema_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        &tmp,
        "bad.toml",
        r#"
        [distribution]
        kind = "finite_support"
        atoms = [[[1, 1], "1/2"], [[-1, -1], "1/3"]]
        "#,
    );
    let out_dir = tmp.path().join("out");
    let out = run(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let rec = stderr_record(&out);
    assert_eq!(rec["status"], "error");
    assert_eq!(rec["error"]["kind"], "config");
    assert!(
        rec["error"]["message"].as_str().unwrap().contains("distribution.atoms"),
        "{rec}"
    );
    let r = report(&out_dir);
    assert_eq!(r["status"], "error");
    assert!(!out_dir.join("results.csv").exists());
}

#[test]
fn syntax_errors_carry_line_numbers() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "bad.toml", "seed = 1\n\n[tail]\npaths = \"many\"\n");
    let out = run(&[
        "tail",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr_record(&out)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("line 4"), "{msg}");
}

#[test]
fn artifacts_replay_bit_identically() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "small.toml", SMALL_TAIL);
    let first = tmp.path().join("first");
    let out = run(&[
        "tail",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let embedded: Value = serde_json::from_str(&fs::read_to_string(first.join("config.json")).unwrap()).unwrap();
    assert_eq!(embedded["seed"], 99);
    assert_eq!(report(&first)["seed"], 99);

    let second = tmp.path().join("second");
    let replay = first.join("config.json");
    let out = run(&[
        "tail",
        "--config",
        replay.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
        "--workers",
        "3",
    ]);
    assert!(out.status.success());
    for f in ["config.json", "results.csv", "report.json"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "small.toml", SMALL_TAIL);
    let dirs: Vec<PathBuf> = ["1", "2", "7"]
        .iter()
        .map(|w| {
            let d = tmp.path().join(format!("w{w}"));
            let out = run(&[
                "tail",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                d.to_str().unwrap(),
                "--workers",
                w,
            ]);
            assert!(out.status.success());
            d
        })
        .collect();
    let csv = fs::read(dirs[0].join("results.csv")).unwrap();
    for d in &dirs[1..] {
        assert_eq!(fs::read(d.join("results.csv")).unwrap(), csv);
        assert_eq!(
            fs::read(d.join("report.json")).unwrap(),
            fs::read(dirs[0].join("report.json")).unwrap()
        );
    }
}

#[test]
fn results_csv_is_well_formed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(&tmp, "small.toml", SMALL_TAIL);
    let out = run(&[
        "tail",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut rd = csv::Reader::from_path(tmp.path().join("results.csv")).unwrap();
    assert_eq!(
        rd.headers().unwrap(),
        vec!["n", "survivors", "estimate", "ci_low", "ci_high"]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    let est: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(est.windows(2).all(|w| w[1] <= w[0]));

    // Free-text cells (hypothesis names) stay in one field each.
    let cls = tmp.path().join("cls");
    let out = run(&[
        "classify",
        "--config",
        bundled("case_d").to_str().unwrap(),
        "--out",
        cls.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let mut rd = csv::Reader::from_path(cls.join("results.csv")).unwrap();
    assert!(rd.records().all(|r| r.unwrap().len() == 2));
}

#[test]
fn violated_expectation_exits_one() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{SMALL_TAIL}expected_exponent = [5.0, 6.0]\n");
    let cfg = write(&tmp, "small.toml", &text);
    let out = run(&[
        "tail",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let rec = stderr_record(&out);
    assert_eq!(rec["status"], "fail");
    let r = report(tmp.path());
    assert_eq!(r["status"], "fail");
    assert_eq!(r["violations"].as_array().unwrap().len(), 1);
}

#[test]
fn harmonic_two_dimensional_mode_needs_mixed_case() {
    let tmp = TempDir::new().unwrap();
    let text = fs::read_to_string(bundled("case_c_rho_zero")).unwrap()
        + "\n[harmonic]\nmode = \"h2d\"\npoints = [[1, 1]]\npaths = 1000\nhorizon = 100\n";
    let cfg = write(&tmp, "c.toml", &text);
    let out = run(&[
        "harmonic",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"]["kind"], "regime_mismatch");
}

#[test]
fn lyapunov_constants_for_unit_steps() {
    let tmp = TempDir::new().unwrap();
    let out = run(&[
        "lyapunov",
        "--config",
        bundled("lyapunov_pm1").to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let r = report(tmp.path());
    let spec = &r["result"]["spec"];
    assert_eq!(spec["A"], 8.0);
    assert!((spec["x0"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((spec["R"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    let rows = csv::Reader::from_path(tmp.path().join("results.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(rows, 1001);
}

#[test]
fn duality_and_exact_harmonic_configs_pass() {
    let tmp = TempDir::new().unwrap();
    for (cmd, name) in [
        ("duality", "duality"),
        ("harmonic", "harmonic_h1_exact"),
        ("lyapunov", "lyapunov_gaussian"),
    ] {
        let d = tmp.path().join(name);
        let out = run(&[
            cmd,
            "--config",
            bundled(name).to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let r = report(&tmp.path().join("duality"));
    assert_eq!(r["result"]["failures"], 0);
    assert!(r["result"]["max_rel_continuous"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn occupation_series_agree() {
    let tmp = TempDir::new().unwrap();
    let mut text = fs::read_to_string(bundled("occupation")).unwrap();
    text = text
        .replace("n_max = 1000", "n_max = 200")
        .replace("paths = 20000", "paths = 5000");
    let cfg = write(&tmp, "occ.toml", &text);
    let out = run(&[
        "occupation",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path());
    assert!(r["result"]["max_abs_z"].as_f64().unwrap() <= 4.5);
}

#[test]
fn json_configs_are_accepted() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        &tmp,
        "c.json",
        r#"{"seed": 3, "marginal": {"kind": "finite_support", "atoms": [[1, 0.5], [-1, 0.5]]},
            "lyapunov": {"grid_end": 2, "grid_step": 0.5}}"#,
    );
    let out = run(&[
        "lyapunov",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
