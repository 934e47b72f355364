use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coulomb-gas"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SAMPLE: &str = r#"
command = "sample"
seed = 11

[model]
potential = "cauchy"
beta = 2.0
n = 32

[chain]
sweeps = 400
chains = 3
"#;

#[test]
fn sample_is_byte_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SAMPLE).unwrap();
    let a = run_in(
        dir.path(),
        &["--config", "run.toml", "--out", "a", "--threads", "1"],
    );
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run_in(dir.path(), &["--config", "run.toml", "--out", "b"]);
    assert!(b.status.success());
    let csv_a = fs::read(dir.path().join("a/samples.csv")).unwrap();
    assert_eq!(csv_a, fs::read(dir.path().join("b/samples.csv")).unwrap());
    assert!(csv_a.starts_with(b"chain,sweep,particle,re,im\n"));
    // 3 chains, 200 recorded sweeps, 32 particles, plus the header.
    assert_eq!(csv_a.iter().filter(|&&c| c == b'\n').count(), 3 * 200 * 32 + 1);

    let c = run_in(
        dir.path(),
        &["--config", "run.toml", "--out", "c", "--seed", "12"],
    );
    assert!(c.status.success());
    assert_ne!(csv_a, fs::read(dir.path().join("c/samples.csv")).unwrap());
}

#[test]
fn sample_writes_stats_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SAMPLE).unwrap();
    assert!(run_in(dir.path(), &["--config", "run.toml"]).status.success());
    let stats = json(&dir.path().join("out/stats.json"));
    let chains = stats["chains"].as_array().unwrap();
    assert_eq!(chains.len(), 3);
    for c in chains {
        let rate = c["acceptance_rate"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&rate));
        assert!(c["final_step_scale"].as_f64().unwrap() > 0.0);
        assert_eq!(c["energy_trace_summary"]["len"], 400);
    }
    let manifest = json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["config"]["chain"]["burn_in"], 200);
    assert_eq!(manifest["config"]["model"]["n"], 32);
    assert!(manifest["version"].is_string());
}

#[test]
fn analyze_reads_sample_output() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), SAMPLE).unwrap();
    assert!(run_in(dir.path(), &["--config", "run.toml", "--out", "s"])
        .status
        .success());
    let out = run_in(
        dir.path(),
        &[
            "analyze",
            "--config",
            "run.toml",
            "--input",
            "s/samples.csv",
            "--out",
            "f",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = json(&dir.path().join("f/fit.json"));
    assert_eq!(fit["reference"], "cauchy");
    assert_eq!(fit["sample_size"], 3 * 200 * 32);
    assert!(fit["statistic"].as_f64().unwrap() <= 0.05);

    let circle = run_in(
        dir.path(),
        &[
            "analyze",
            "--input",
            "s/samples.csv",
            "--reference",
            "circle_uniform",
            "--out",
            "g",
        ],
    );
    assert!(circle.status.success());
    assert_eq!(
        json(&dir.path().join("g/fit.json"))["reference"],
        "circle_uniform"
    );
}

#[test]
fn verify_small_run_passes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("v.toml"),
        "command = \"verify\"\n[verify]\ncases = 5000\nconfigurations = 2000\nmeasures = 8\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["--config", "v.toml"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&dir.path().join("out/verify.json"));
    assert_eq!(report["passed"], true);
    for s in report["suites"].as_array().unwrap() {
        assert!(s["max_deviation"].as_f64().unwrap() <= 1e-10, "{s}");
    }
}

#[test]
fn equilibrium_writes_measure_and_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("e.toml"),
        "command = \"equilibrium\"\n[model]\npotential = \"quadratic\"\n[grid]\nwindow = 2.0\nresolution = 64\nspacing = \"uniform\"\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["--config", "e.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/report.json"));
    assert_eq!(report["converged"], true);
    assert_eq!(report["atoms"], 64);
    assert!(report["captured_mass"].is_null());
    let measure = fs::read_to_string(dir.path().join("out/measure.csv")).unwrap();
    assert!(measure.starts_with("x,weight\n"));
    assert_eq!(measure.lines().count(), 65);
    let sphere = fs::read_to_string(dir.path().join("out/sphere_measure.csv")).unwrap();
    assert!(sphere.starts_with("x1,x2,x3,weight\n"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let no_command = run_in(dir.path(), &[]);
    assert_eq!(no_command.status.code(), Some(2));

    fs::write(dir.path().join("bad.toml"), "command = \"sample\"\ngamma = 1.0\n").unwrap();
    let unknown = run_in(dir.path(), &["--config", "bad.toml"]);
    assert_eq!(unknown.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&unknown.stderr);
    assert!(msg.contains("gamma") && msg.contains("line 2"), "{msg}");

    fs::write(
        dir.path().join("beta.toml"),
        "command = \"sample\"\n[model]\nbeta = -1.0\n",
    )
    .unwrap();
    let beta = run_in(dir.path(), &["--config", "beta.toml"]);
    assert_eq!(beta.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&beta.stderr).contains("model.beta"));

    let missing = run_in(dir.path(), &["--config", "nope.toml"]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_flag = run_in(dir.path(), &["sample", "--seed", "x"]);
    assert_eq!(bad_flag.status.code(), Some(2));

    // No closed form for the quadratic model and no reference given.
    fs::write(
        dir.path().join("s.csv"),
        "chain,sweep,particle,re,im\n0,0,0,0.5,0.0\n",
    )
    .unwrap();
    fs::write(dir.path().join("q.toml"), "[model]\npotential = \"quadratic\"\n").unwrap();
    let no_ref = run_in(dir.path(), &["analyze", "--input", "s.csv", "--config", "q.toml"]);
    assert_eq!(no_ref.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&no_ref.stderr).contains("closed-form"));
}

#[test]
fn help_exits_zero() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--config", "--seed", "--out", "--threads"] {
        assert!(text.contains(flag));
    }
}
