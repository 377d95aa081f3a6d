use std::fs;
use std::process::{Command, Output};

fn skewsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewsim"))
        .args(args)
        .env_remove("SKEWSIM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn density_prints_value() {
    let o = skewsim(&["density", "--alpha", "0.7", "--t", "1", "--x", "0.3", "--y", "-0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - 0.21124).abs() < 5e-6, "{v}");
}

#[test]
fn simulate_walk_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let o = skewsim(&[
        "simulate", "--generator", "walk", "--alpha", "0.7", "--n", "20", "--t", "1", "--paths", "30", "--seed", "42",
        "--output", csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path_id,t,x"));
    assert_eq!(lines.count(), 30 * 401);
}

#[test]
fn skeleton_csv_has_event_column() {
    let o = skewsim(&["simulate", "--generator", "scheme_c", "--alpha", "0.3", "--t", "0.5", "--paths", "3", "--seed", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.starts_with("path_id,t,x,event\n"));
    assert!(s.lines().skip(1).all(|l| l.split(',').count() == 4));
    assert_eq!(s.lines().filter(|l| l.ends_with(",start")).count(), 3);
}

#[test]
fn missing_seed_is_usage_error() {
    let o = skewsim(&["simulate", "--generator", "walk", "--paths", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_skewsim"));
        c.args(["simulate", "--generator", "euler", "--dt", "0.1", "--paths", "2"]).env_remove("SKEWSIM_SEED");
        if let Some(e) = env {
            c.env("SKEWSIM_SEED", e);
        }
        if let Some(f) = flag {
            c.args(["--seed", f]);
        }
        c.output().unwrap()
    };
    let a = run(Some("9"), None);
    let b = run(None, Some("9"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // the flag wins over the environment
    assert_eq!(run(Some("10"), Some("9")).stdout, b.stdout);
}

#[test]
fn unknown_config_key_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "generator = \"walk\"\nseed = 1\nnpaths = 3\n").unwrap();
    let o = skewsim(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("npaths"));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "generator = \"walk\"\nn = 10\nt = 0.5\npaths = 2\nseed = 3\nalpha = 0.2\n").unwrap();
    let from_file = skewsim(&["simulate", "--config", cfg.to_str().unwrap(), "--alpha", "0.9"]);
    let flags = skewsim(&[
        "simulate", "--generator", "walk", "--n", "10", "--t", "0.5", "--paths", "2", "--seed", "3", "--alpha", "0.9",
    ]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, flags.stdout);
}

#[test]
fn validate_writes_json_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = skewsim(&[
        "validate", "--suite", "corollary3", "--alpha", "0.7", "--n", "50", "--paths", "20000", "--seed", "7",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["config"]["suite"], "sign_law");
    let est = v["reports"][0]["estimate"].as_f64().unwrap();
    assert!((est - 0.7).abs() < 0.02, "{est}");
    for key in ["name", "target", "estimate", "standard_error", "statistic", "tolerance", "pass", "seed", "sample_size", "details"] {
        assert!(v["reports"][0].get(key).is_some(), "{key}");
    }
}

#[test]
fn failing_validation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    // four Euler steps at alpha 0.9 are far from the limit law
    let o = skewsim(&[
        "validate", "--suite", "marginal_law", "--generator", "euler", "--dt", "0.25", "--alpha", "0.9", "--paths",
        "20000", "--seed", "1",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(out.exists());
}

#[test]
fn deterministic_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for w in ["1", "3"] {
        let csv = dir.path().join(format!("p{w}.csv"));
        let json = dir.path().join(format!("s{w}.json"));
        let o = skewsim(&[
            "simulate", "--generator", "follow_leader", "--alpha", "0.6", "--delta", "0.01", "--paths", "300",
            "--seed", "11", "--workers", w, "--output", csv.to_str().unwrap(), "--summary", json.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let rep = dir.path().join(format!("v{w}.json"));
        let v = skewsim(&[
            "validate", "--suite", "l1", "--dt", "0.01", "--paths", "2000", "--seed", "5", "--workers", w,
            "--output", rep.to_str().unwrap(),
        ]);
        assert!(v.status.code().is_some_and(|c| c <= 1));
        let mut json_text = fs::read_to_string(&json).unwrap();
        let mut rep_text = fs::read_to_string(&rep).unwrap();
        // the worker count is part of the embedded config; drop that line
        json_text = json_text.lines().filter(|l| !l.contains("\"workers\"")).collect();
        rep_text = rep_text.lines().filter(|l| !l.contains("\"workers\"") && !l.contains("\"output\"")).collect();
        json_text = json_text.replace(&format!("s{w}.json"), "").replace(&format!("p{w}.csv"), "");
        bytes.push((fs::read(&csv).unwrap(), json_text, rep_text));
    }
    assert_eq!(bytes[0].0, bytes[1].0);
    assert_eq!(bytes[0].1, bytes[1].1);
    assert_eq!(bytes[0].2, bytes[1].2);
}

#[test]
fn pde_csv_and_constant_preservation() {
    let o = skewsim(&["pde", "--alpha", "0.7", "--t", "0.5", "--nx", "41", "--nt", "10", "--initial", "step", "--center", "-100", "--radius", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.starts_with("t,x,u\n"));
    for l in s.lines().skip(1) {
        let u: f64 = l.split(',').nth(2).unwrap().parse().unwrap();
        assert!((u - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rate_json_to_stdout() {
    let o = skewsim(&["rate", "--n-list", "2,4", "--reference-n", "64", "--replications", "20", "--seed", "3"]);
    assert!(o.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["n_list"], serde_json::json!([2, 4]));
    assert_eq!(v["reports"][0]["name"], "convergence_rate");
}

#[test]
fn bad_suite_is_usage_error() {
    let o = skewsim(&["validate", "--suite", "nonsense", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
}
