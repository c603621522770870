use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

/// Reflection vectors from angles, straight from the face orientation table.
fn wedge(zeta: f64, z1: f64, z2: f64) -> Value {
    let g1 = [-z1.sin(), z1.cos()];
    let (n2, r2) = ([zeta.sin(), -zeta.cos()], [zeta.cos(), zeta.sin()]);
    let g2 = [z2.cos() * n2[0] - z2.sin() * r2[0], z2.cos() * n2[1] - z2.sin() * r2[1]];
    json!({ "zeta": zeta, "g1": g1, "g2": g2 })
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn wedge_verb_reports_alpha_one_half() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("spec.json"), wedge(PI / 2.0, PI / 6.0, PI / 12.0).to_string()).unwrap();
    let cfg = write(dir.path(), "cfg.json", &json!({
        "schema_version": 1,
        "scenario": "wedge_analyze",
        "wedge": { "spec": { "path": "spec.json" } }
    }));
    let out = dir.path().join("out");
    let o = conelab(&["wedge", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_json(&out.join("analytics.json"));
    assert!((a["alpha_star"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(a["delta_star"].as_f64(), Some(0.5));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["overall"], "pass");
    assert_eq!(report["seed"], 3);
    let manifest = read_json(&out.join("manifest.json"));
    let names: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert!(names.contains(&"fields.csv") && names.contains(&"report.json"));
}

#[test]
fn ergodic_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", &json!({
        "schema_version": 1,
        "ergodic": { "random": { "sizes": [6, 7, 5, 8, 6, 6, 7, 5, 6, 6, 6], "c0_floor": 0.3, "eps0_floor": 0.2 } }
    }));
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = conelab(&["ergodic", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(out);
    }
    for name in ["chain.json", "contraction.csv", "ergodic.json", "report.json", "manifest.json"] {
        assert_eq!(fs::read(outputs[0].join(name)).unwrap(), fs::read(outputs[1].join(name)).unwrap(), "{name}");
    }
    let other = dir.path().join("c");
    conelab(&["ergodic", "--config", &cfg, "--out", other.to_str().unwrap(), "--seed", "8"]);
    assert_ne!(fs::read(outputs[0].join("chain.json")).unwrap(), fs::read(other.join("chain.json")).unwrap());
}

#[test]
fn verify_rejects_a_broken_kernel_file() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({
        "spaces": [["a", "b"], ["c", "d"]],
        "kernels": [{ "source_index": 1, "target_index": 0, "rows": [[0.5, 0.5], [0.9, 0.6]] }]
    });
    write(dir.path(), "chain.json", &doc);
    let cfg = write(dir.path(), "cfg.json", &json!({
        "schema_version": 1,
        "scenario": "verify",
        "verify": { "chain": { "path": "chain.json" } }
    }));
    let out = dir.path().join("out");
    let o = conelab(&["verify", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "1", "--suite", "wedge"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["overall"], "fail");
    let failed: Vec<&Value> = report["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert_eq!(failed.len(), 1);
    let detail = failed[0]["detail"].as_str().unwrap();
    assert!(detail.contains("verify.chain(chain.json).kernels[0].rows[1]") && detail.contains("1.5"), "{detail}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad_version = write(dir.path(), "v.json", &json!({ "schema_version": 9 }));
    let o = conelab(&["ergodic", "--config", &bad_version, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema_version"));

    let mismatch = write(dir.path(), "m.json", &json!({ "schema_version": 1, "scenario": "simulate" }));
    assert_eq!(conelab(&["ergodic", "--config", &mismatch, "--out", out]).status.code(), Some(2));

    let missing = write(dir.path(), "s.json", &json!({ "schema_version": 1 }));
    let o = conelab(&["simulate", "--config", &missing, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("simulate"));

    let o = conelab(&["wedge", "--config", dir.path().join("absent.json").to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}
