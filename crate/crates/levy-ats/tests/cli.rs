use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levy-ats"))
}

fn stable_model(b: f64, c: f64, alpha: f64, x0: f64) -> Value {
    let noise = if alpha == 2.0 { json!({"kind": "wiener"}) } else { json!({"kind": "stable", "alpha": alpha}) };
    json!({
        "drift_a": -0.5, "drift_b": b, "x0": x0,
        "diffusion": {"type": "power_law", "c": c, "alpha": alpha},
        "noise": noise
    })
}

fn config(dir: &Path, name: &str, model: Value, extra: Value) -> PathBuf {
    let mut cfg = json!({
        "schema_version": 1,
        "model": model,
        "output": {"dir": dir.join("out")},
        "simulation": {"horizon": 1.0, "steps": 64, "n_paths": 2000}
    });
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], cfg: &Path) -> Output {
    bin().args(args).arg("--config").arg(cfg).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.parse().unwrap()).collect())
        .collect()
}

fn cir(a: f64, b: f64, c: f64, v: f64) -> (f64, f64) {
    let g = (a * a + 2.0 * c).sqrt();
    let e = (g * v).exp_m1();
    let den = (g - a) * e + 2.0 * g;
    (-(2.0 * b / c) * ((2.0 * g).ln() + 0.5 * (g - a) * v - den.ln()), 2.0 * e / den)
}

#[test]
fn curve_matches_cir_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "cir.json", stable_model(0.1, 0.04, 2.0, 0.05), json!({}));
    let o = run(&["curve"], &cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&dir.path().join("out/curves.csv"));
    assert_eq!(rows.len(), levy_ats_core::curves::DEFAULT_NODES);
    for r in rows.iter().skip(1) {
        let (a, b) = cir(-0.5, 0.1, 0.04, r[0]);
        assert!(((r[2] - b) / b).abs() < 1e-8, "v {}: {} vs {b}", r[0], r[2]);
        assert!(((r[1] - a) / a).abs() < 1e-8);
    }
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "curve");
    assert_eq!(manifest["outputs"], json!(["curves.csv"]));
}

#[test]
fn curve_with_zero_intercept_has_zero_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "b0.json", stable_model(0.0, 0.2, 1.5, 0.05), json!({}));
    assert_eq!(code(&run(&["curve"], &cfg)), 0);
    assert!(read_csv(&dir.path().join("out/curves.csv")).iter().all(|r| r[1] == 0.0));
    assert_eq!(code(&run(&["curve", "--format", "json"], &cfg)), 0);
    assert!(dir.path().join("out/curves.json").exists());
    assert_eq!(code(&run(&["curve", "--format", "bin"], &cfg)), 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"schema_version\": 1\n}\n").unwrap();
    let o = run(&["curve"], &path);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("missing field `model`") && err.contains("line"), "{err}");
    assert_eq!(code(&bin().arg("curve").output().unwrap()), 2);
    assert_eq!(code(&bin().args(["curve", "--seed", "minus-one"]).output().unwrap()), 2);
    assert_eq!(code(&bin().arg("--help").output().unwrap()), 0);
}

#[test]
fn noise_off_single_path_follows_linear_ode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "det.json",
        stable_model(0.1, 0.0, 1.5, 0.05),
        json!({"simulation": {"horizon": 1.0, "steps": 100, "n_paths": 1}}),
    );
    assert_eq!(code(&run(&["simulate", "--format", "bin"], &cfg)), 0);
    let data = levy_ats::formats::read_ensemble_bin(&dir.path().join("out/ensemble.bin")).unwrap();
    for (t, r) in data.times.iter().zip(&data.rates) {
        let exact = 0.2 - 0.15 * (-0.5 * t).exp();
        assert!((r - exact).abs() <= 1e-10, "t {t}: {r} vs {exact}");
    }
}

#[test]
fn simulate_is_reproducible_across_runs_threads_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", stable_model(0.1, 0.2, 1.5, 0.05), json!({"seed": 5}));
    let out = |name: &str| dir.path().join(name);
    let runs = [("a", "1"), ("b", "1"), ("c", "3")];
    for (d, threads) in runs {
        let o = bin()
            .args(["simulate", "--format", "bin", "--threads", threads, "--out"])
            .arg(out(d))
            .arg("--config")
            .arg(&cfg)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(out("a/ensemble.bin")).unwrap();
    assert_eq!(a, std::fs::read(out("b/ensemble.bin")).unwrap());
    assert_eq!(a, std::fs::read(out("c/ensemble.bin")).unwrap());

    // re-run from the manifest alone
    let o = bin().arg("simulate").arg("--config").arg(out("a/manifest.json")).arg("--out").arg(out("m")).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(a, std::fs::read(out("m/ensemble.bin")).unwrap());
    let o = bin().arg("simulate").arg("--config").arg(out("a/manifest.json")).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(out("a/ensemble.bin")).unwrap(), a);

    let o = run(&["simulate", "--seed", "6", "--format", "bin"], &cfg);
    assert_eq!(code(&o), 0);
    assert_ne!(a, std::fs::read(dir.path().join("out/ensemble.bin")).unwrap());
}

#[test]
fn emitted_config_reparses_to_equal_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "s.json", stable_model(0.1, 0.2, 1.5, 0.05), json!({"threads": 2}));
    assert_eq!(code(&run(&["curve", "--seed", "3"], &cfg)), 0);
    let text = std::fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    let manifest: levy_ats::manifest::Manifest = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest.config.seed, 3);
    let again = serde_json::to_string(&manifest.config).unwrap();
    let parsed = levy_ats::ExperimentConfig::parse(&again, Path::new("inline")).unwrap();
    assert_eq!(parsed, manifest.config);
}

#[test]
fn negative_start_and_inadmissible_models_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "neg.json", stable_model(0.1, 0.2, 1.5, -0.01), json!({}));
    let o = run(&["simulate"], &cfg);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("x0"));

    let jumps = json!({
        "drift_a": 0.0, "drift_b": 0.9, "x0": 0.05,
        "diffusion": {"type": "constant", "sigma": 1.0},
        "noise": {"kind": "cpp", "jump": {"family": "exp", "mean": 0.5, "intensity": 2.0}}
    });
    let cfg = config(dir.path(), "jumps.json", jumps, json!({}));
    assert_eq!(code(&run(&["simulate"], &cfg)), 2);
    assert_eq!(code(&run(&["check-levy"], &cfg)), 1);
    assert!(!dir.path().join("out/ensemble.csv").exists());
}

#[test]
fn validate_hjm_passes_and_detects_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "h.json", stable_model(0.1, 0.2, 1.5, 0.05), json!({}));
    let o = run(&["validate-hjm"], &cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let reports: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 2);
    assert!(reports[0]["max_statistic"].as_f64().unwrap() <= 1e-6);

    let cfg = config(
        dir.path(),
        "p.json",
        stable_model(0.1, 0.2, 1.5, 0.05),
        json!({"hjm": {"perturb_exponent": 1.0 / 1.5 + 0.2}}),
    );
    let o = run(&["validate-hjm"], &cfg);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn validate_mc_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let model = stable_model(0.1, 0.2, 1.5, 0.05);
    let cfg = config(dir.path(), "mc.json", model.clone(), json!({"seed": 2}));
    let o = run(&["validate-mc"], &cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(text.contains("constant expectation"));

    let cfg = config(dir.path(), "wrong.json", model.clone(), json!({"mc": {"level_drift": 0.05}}));
    assert_eq!(code(&run(&["validate-mc"], &cfg)), 1);

    let cfg = config(dir.path(), "empty.json", model.clone(), json!({"mc": {"checkpoints": []}}));
    assert_eq!(code(&run(&["validate-mc"], &cfg)), 2);

    let cfg = config(dir.path(), "off.json", model, json!({"mc": {"checkpoints": [0.3]}}));
    assert_eq!(code(&run(&["validate-mc"], &cfg)), 2);
}

#[test]
fn check_levy_and_price() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "l.json",
        stable_model(0.1, 0.2, 1.5, 0.05),
        json!({
            "levy": {
                "noises": [{"kind": "cpp", "jump": {"family": "atom", "size": 1.0, "intensity": 0.5}}],
                "laplace": {"dt": 1.0, "n": 20000, "lambdas": [0.5, 1.0], "resamples": 50}
            },
            "price": {"maturities": [0.5, 1.0, 2.0], "quantity": "bond"}
        }),
    );
    let o = run(&["check-levy"], &cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&["price"], &cfg);
    assert_eq!(code(&o), 0);
    let rows = read_csv(&dir.path().join("out/surface.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2] && w[1][2] > 0.0));
}

#[test]
fn solver_overflow_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut model = stable_model(0.1, 0.0, 1.5, 0.05);
    model["drift_a"] = json!(100.0);
    let cfg = config(dir.path(), "blow.json", model, json!({}));
    let o = run(&["curve"], &cfg);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
