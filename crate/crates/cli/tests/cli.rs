use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

static DIR_SEQ: AtomicU32 = AtomicU32::new(0);

fn out_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!(
        "shiftlab-cli-{}-{tag}-{}",
        std::process::id(),
        DIR_SEQ.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn shiftlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(args)
        .env_remove("SHIFTLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &std::path::Path, body: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|e| {
        panic!("missing {}: {e}", path.display());
    }))
    .unwrap()
}

#[test]
fn density_matches_known_rules() {
    let dir = out_dir("density");
    let out = shiftlab(&[
        "density",
        "--horizon",
        "32768",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let summary = json(dir.join("density_summary.json"));
    let rules = summary.as_array().unwrap();
    let by_rule = |name: &str| {
        rules
            .iter()
            .find(|r| r["rule"] == name)
            .unwrap_or_else(|| panic!("rule {name} missing"))
    };
    let evens = by_rule("evens");
    assert!((evens["upper"].as_f64().unwrap() - 0.5).abs() < 0.01);
    let empty = by_rule("empty");
    assert_eq!(empty["upper"].as_f64().unwrap(), 0.0);
    let iu = by_rule("interval-union base=2");
    assert!((iu["peak"].as_f64().unwrap() - 2.0 / 3.0).abs() < 0.01);
    assert!((iu["lower"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.01);
    // CSV trace has the declared header
    let trace = std::fs::read_to_string(dir.join("density_trace.csv")).unwrap();
    assert!(trace.starts_with("rule,n,mu,mu_exact"));
}

#[test]
fn criterion_verdicts() {
    let dir = out_dir("criterion");
    for (body, expect) in [
        ("[criterion]\nfamily = \"constant\"\nlambda = \"2\"\n", "Convergent"),
        ("[criterion]\nfamily = \"constant\"\nlambda = \"1\"\n", "Divergent"),
        ("[criterion]\nfamily = \"fratio\"\nfpow = 1.0\n", "Divergent"),
    ] {
        let cfg = write_config(&dir, body);
        let out = shiftlab(&[
            "criterion",
            "--config",
            &cfg,
            "--horizon",
            "1000",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        let verdict = json(dir.join("criterion.json"));
        assert_eq!(verdict["classification"], expect, "config: {body}");
    }
    // an unsupported family is a verdict, not an error
    let cfg = write_config(&dir, "[criterion]\nfamily = \"mystery\"\n");
    let out = shiftlab(&[
        "criterion",
        "--config",
        &cfg,
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let verdict = json(dir.join("criterion.json"));
    assert_eq!(verdict["classification"], "Unknown");
    assert!(verdict["partial_sum"].is_null());
}

#[test]
fn construct_tm_manifest_all_identities_pass() {
    let dir = out_dir("tm");
    let cfg = write_config(&dir, "[construct]\nkind = \"tm\"\nx = [0, 1, 1, 1]\n");
    let out = shiftlab(&[
        "construct",
        "--config",
        &cfg,
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let manifest = json(dir.join("tm_manifest.json"));
    assert_eq!(manifest["claim_equivalence_pass_fraction"].as_f64(), Some(1.0));
    assert!(manifest["claim_equivalence_checked"].as_u64().unwrap() >= 200);
}

#[test]
fn construct_ne_plan_first_index() {
    let dir = out_dir("ne-plan");
    let cfg = write_config(&dir, "[construct]\nkind = \"ne-plan\"\ni_max = 1\n");
    let out = shiftlab(&[
        "construct",
        "--config",
        &cfg,
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let manifest = json(dir.join("ne_plan_manifest.json"));
    assert_eq!(manifest["n"][0], "43046722");
    assert_eq!(manifest["windows_disjoint"], true);
}

#[test]
fn construct_eq_no_bound_violations() {
    let dir = out_dir("eq");
    let cfg = write_config(&dir, "[construct]\nkind = \"eq\"\nt_max = 8\n");
    let out = shiftlab(&[
        "construct",
        "--config",
        &cfg,
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let manifest = json(dir.join("eq_manifest.json"));
    assert_eq!(manifest["bound_violations"].as_u64(), Some(0));
    assert!(manifest["errors_checked"].as_u64().unwrap() >= 8);
}

#[test]
fn manifests_are_deterministic() {
    let read = |dir: &PathBuf| {
        std::fs::read_to_string(dir.join("fhc_manifest.json"))
            .unwrap()
            // the manifests embed output paths; strip them before comparing
            .lines()
            .filter(|l| !l.contains("blocks_file"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut texts = Vec::new();
    for _ in 0..2 {
        let dir = out_dir("det");
        let out = shiftlab(&[
            "construct",
            "--seed",
            "99",
            "--horizon",
            "5000",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
        texts.push(read(&dir));
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn verify_passes_and_thread_cap_respected() {
    let dir = out_dir("verify");
    let out = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(["verify", "--out-dir", dir.to_str().unwrap()])
        .env("SHIFTLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let report = json(dir.join("verify_report.json"));
    let suites = report.as_array().unwrap();
    assert_eq!(suites.len(), 3);
    for s in suites {
        assert_eq!(s["failed"].as_u64(), Some(0), "suite {}", s["suite"]);
        assert!(s["passed"].as_u64().unwrap() > 0);
    }
    // an invalid cap is a validation error
    let out = Command::new(env!("CARGO_BIN_EXE_shiftlab"))
        .args(["verify", "--out-dir", dir.to_str().unwrap()])
        .env("SHIFTLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_catches_planted_family() {
    let dir = out_dir("verify-neg");
    let cfg = write_config(&dir, "[verify]\ninject_non_hereditary = true\n");
    let out = shiftlab(&[
        "verify",
        "--config",
        &cfg,
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let report = json(dir.join("verify_report.json"));
    let hat = report
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["suite"] == "hat-decomposition")
        .unwrap();
    assert!(hat["witness"].as_str().unwrap().contains("missing subset"));
}

#[test]
fn validation_errors_exit_one() {
    let dir = out_dir("validation");
    let out = shiftlab(&["density", "--horizon", "1", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let cfg = write_config(&dir, "[construct]\nkind = \"tm\"\nx = [5]\n");
    let out = shiftlab(&["construct", "--config", &cfg, "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let out = shiftlab(&["density", "--config", "/nonexistent.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn json_format_flag_switches_trace_output() {
    let dir = out_dir("format");
    let out = shiftlab(&[
        "density",
        "--format",
        "json",
        "--horizon",
        "1000",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(dir.join("density_trace.json").exists());
    assert!(!dir.join("density_trace.csv").exists());
    let trace = json(dir.join("density_trace.json"));
    assert!(trace.as_array().unwrap().len() > 10);
}
