use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use wirearr_cli::presets;

fn wirearr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wirearr")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = wirearr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn run_smoke(dir: &Path) {
    ok(&["run", "--config", "smoke", "--out", dir.to_str().unwrap()]);
}

#[test]
fn smoke_run_is_deterministic_and_complete() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_smoke(&a);
    run_smoke(&b);
    for f in ["samples.csv", "pareto.json", "design_1.json", "design_2.json", "pareto_scatter.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    for i in 1..=4 {
        assert!(a.join(format!("design_1_wp{i}.svg")).is_file());
        assert!(a.join(format!("design_2_wp{i}.svg")).is_file());
    }

    let csv = fs::read_to_string(a.join("samples.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[..3], ["trial", "e_cross", "log_e_torque"]);
    assert_eq!(header.len(), 3 + 12);
    assert_eq!(header.last(), Some(&"g11"));
    assert_eq!(lines.count(), 8 * 5);

    let pareto = json(&a.join("pareto.json"));
    let entries = pareto["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    let d1 = json(&a.join("design_1.json"));
    let d2 = json(&a.join("design_2.json"));
    let min_cross = entries.iter().map(|e| e["e_cross"].as_u64().unwrap()).min().unwrap();
    let max_log = entries
        .iter()
        .map(|e| e["log_e_torque"].as_f64().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(d1["e_cross"].as_u64().unwrap(), min_cross);
    assert_eq!(d2["log_e_torque"].as_f64().unwrap(), max_log);

    let other = tmp.path().join("c");
    ok(&["run", "--config", "smoke", "--seed", "8", "--out", other.to_str().unwrap()]);
    assert_ne!(fs::read(a.join("samples.csv")).unwrap(), fs::read(other.join("samples.csv")).unwrap());
}

#[test]
fn archived_design_round_trips_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    run_smoke(tmp.path());
    for name in ["design_1.json", "design_2.json"] {
        let path = tmp.path().join(name);
        let stored = json(&path);
        let printed: Value = serde_json::from_str(&ok(&["evaluate", path.to_str().unwrap(), "--config", "smoke"])).unwrap();
        assert_eq!(printed["e_cross"], stored["e_cross"]);
        assert_eq!(
            printed["log_e_torque"].as_f64().unwrap().to_bits(),
            stored["log_e_torque"].as_f64().unwrap().to_bits()
        );
        assert_eq!(printed["per_waypoint_radius"], stored["per_waypoint_radius"]);
    }
}

fn write_design(dir: &Path, name: &str, points: Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::json!({ "points": points }).to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn evaluate_reports_known_designs() {
    let tmp = tempfile::tempdir().unwrap();
    let c = 0.12;
    let square = write_design(
        tmp.path(),
        "square.json",
        serde_json::json!([[[c, c], [c, c]], [[-c, c], [-c, c]], [[-c, -c], [-c, -c]], [[c, -c], [c, -c]]]),
    );
    let report: Value = serde_json::from_str(&ok(&["evaluate", &square, "--config", "2dof_m4_n2"])).unwrap();
    assert_eq!(report["e_cross"], 0);
    assert_eq!(report["per_segment_crossings"].as_array().unwrap().len(), 3);
    assert_eq!(report["per_segment_crossings"][0]["from"], 1);
    assert_eq!(report["per_waypoint_radius"].as_array().unwrap().len(), 4);
    assert!(report["link_contacts"].as_array().unwrap().is_empty());

    let center = write_design(tmp.path(), "center.json", serde_json::json!(vec![[[0.0, 0.0], [0.0, 0.0]]; 3]));
    let report: Value = serde_json::from_str(&ok(&["evaluate", &center, "--config", "smoke"])).unwrap();
    assert_eq!(report["link_contacts"].as_array().unwrap().len(), 6);
}

#[test]
fn folding_doubles_interior_radii() {
    let tmp = tempfile::tempdir().unwrap();
    run_smoke(tmp.path());
    let stored = json(&tmp.path().join("design_2.json"));
    let folded: Vec<Value> = stored["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| {
            let mut w = w.as_array().unwrap().clone();
            w.push(w[0].clone());
            Value::Array(w)
        })
        .collect();
    let path = write_design(tmp.path(), "folded.json", Value::Array(folded));
    let report: Value = serde_json::from_str(&ok(&["evaluate", &path, "--config", "2dof_m3_n3"])).unwrap();
    let before: Vec<f64> = stored["per_waypoint_radius"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let after: Vec<f64> = report["per_waypoint_radius"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let mut interior = 0;
    for (b, a) in before.iter().zip(&after) {
        if *b > 1e-3 {
            interior += 1;
            assert!((a - 2.0 * b).abs() <= 1e-12 * a, "{a} vs {b}");
        } else {
            assert_eq!(*a, 1e-3);
        }
    }
    assert!(interior > 0);
}

#[test]
fn oracle_finds_no_guard_band_violations() {
    let tmp = tempfile::tempdir().unwrap();
    run_smoke(tmp.path());
    let d = tmp.path().join("design_2.json");
    let report: Value = serde_json::from_str(&ok(&["oracle", d.to_str().unwrap(), "--config", "smoke", "--samples", "2001"])).unwrap();
    assert_eq!(report["violations"], 0);
    assert_eq!(report["samples"], 2001);
    let segments = report["segments"].as_array().unwrap();
    assert_eq!(segments.len(), 3);
    assert!(segments.iter().all(|s| !s["pairs"].as_array().unwrap().is_empty()));

    let out = wirearr(&["oracle", d.to_str().unwrap(), "--config", "smoke", "--samples", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn render_writes_requested_waypoints() {
    let tmp = tempfile::tempdir().unwrap();
    run_smoke(tmp.path());
    let d = tmp.path().join("design_1.json");
    let out = tmp.path().join("renders");
    let listed = ok(&["render", d.to_str().unwrap(), "--config", "smoke", "--waypoint", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(listed.lines().count(), 1);
    let svg = fs::read_to_string(out.join("design_1_wp2.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains("waypoint 2"));

    let listed = ok(&["render", d.to_str().unwrap(), "--config", "smoke", "--out", out.to_str().unwrap()]);
    assert_eq!(listed.lines().count(), 4);

    let bad = wirearr(&["render", d.to_str().unwrap(), "--config", "smoke", "--waypoint", "9"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn three_joint_render_drops_pitch() {
    let tmp = tempfile::tempdir().unwrap();
    let p = [[0.1, 0.05], [-0.1, 0.12]];
    let d = write_design(tmp.path(), "d.json", serde_json::json!([p, [[-0.1, -0.1], [0.1, -0.1]], [[0.0, 0.15], [0.05, -0.12]], [[0.15, 0.0], [-0.12, 0.02]]]));
    ok(&["render", &d, "--config", "3dof_m4_n2", "--waypoint", "1"]);
    let svg = fs::read_to_string(tmp.path().join("d_wp1.svg")).unwrap();
    assert!(svg.contains("pitch not shown"));
}

#[test]
fn errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, presets::get("smoke").unwrap().replace("wires = 3", "wires = 0")).unwrap();
    let out = wirearr(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let line = fs::read_to_string(&bad).unwrap().lines().position(|l| l.starts_with("wires")).unwrap() + 1;
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(&format!("bad.toml:{line}:")), "{stderr}");

    assert_eq!(code(&wirearr(&["run", "--config", "no-such-preset"])), 2);
    assert_eq!(code(&wirearr(&["run", "--config", "smoke", "--population", "7"])), 2);
    assert_eq!(code(&wirearr(&["frobnicate"])), 2);

    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = wirearr(&["run", "--config", "smoke", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(code(&out), 3);

    run_smoke(&tmp.path().join("run"));
    let d = tmp.path().join("run").join("design_1.json");
    let out = wirearr(&["evaluate", d.to_str().unwrap(), "--config", "2dof_m4_n2"]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&wirearr(&["evaluate", "/nonexistent.json", "--config", "smoke"])), 3);
}
