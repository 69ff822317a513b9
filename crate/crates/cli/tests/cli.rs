use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn lel(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lel")).args(args).arg("--out").arg(out).output().expect("spawn lel")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = table(path);
    let k = h.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

/// Parses the manifest and checks every listed digest against the file.
fn manifest(dir: &Path) -> Value {
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    for f in m["outputs"].as_array().unwrap() {
        let bytes = fs::read(dir.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    m
}

fn listed(m: &Value) -> Vec<String> {
    m["outputs"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap().to_string()).collect()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn special_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&lel(&["special"], &a)), 0);
    let (header, rows) = table(&a.join("profiles.csv"));
    assert_eq!(header, ["r", "phi0", "phi1_axis", "phi3", "psi0", "s_star", "t_star"]);
    assert_eq!(rows.len(), 1001);
    let r = column(&a.join("profiles.csv"), "r");
    assert_eq!((r[0], r[1000]), (0.0, 10.0));
    // φ₀ = (8 − r²)/(8 + r²)
    let phi0 = column(&a.join("profiles.csv"), "phi0");
    for (&r, &f) in r.iter().zip(&phi0) {
        assert!((f - (8.0 - r * r) / (8.0 + r * r)).abs() < 1e-15);
    }
    let text = fs::read_to_string(a.join("integrals.csv")).unwrap();
    let line = text.lines().find(|l| l.starts_with("int_eU,")).expect("int_eU row");
    let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 8.0 * PI).abs() <= 1e-6, "{v}");
    assert!(line.starts_with("int_eU,25.13274"));
    assert!(!text.contains('\r'));

    let m = manifest(&a);
    assert_eq!(m["status"], "ok");
    assert_eq!(listed(&m), ["profiles.csv", "integrals.csv"]);

    assert_eq!(code(&lel(&["special"], &b)), 0);
    for f in ["profiles.csv", "integrals.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs between runs");
    }
}

#[test]
fn green_on_the_disk() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&lel(&["green", "--domain", "unit-disk"], tmp.path())), 0);
    let f = tmp.path().join("green.csv");
    let (x1, x2, g, h, r) = (column(&f, "x1"), column(&f, "x2"), column(&f, "G"), column(&f, "H"), column(&f, "R"));
    assert!(x1.len() > 1000);
    for i in 0..x1.len() {
        let s = x1[i] * x1[i] + x2[i] * x2[i];
        // pole at the centre: G = −log|x|/2π, H = 0; R(x) = log(1/(1 − |x|²))/2π
        assert!((g[i] + s.sqrt().ln() / (2.0 * PI)).abs() < 1e-12);
        assert!(h[i].abs() < 1e-12);
        assert!((r[i] + (1.0 - s).ln() / (2.0 * PI)).abs() < 1e-10, "R at {s}: {}", r[i]);
    }
    manifest(tmp.path());
}

#[test]
fn kr_on_the_disk() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&lel(&["kr", "--domain", "unit-disk", "--k", "1", "--seed", "7"], tmp.path())), 0);
    let f = tmp.path().join("kr.csv");
    let (header, rows) = table(&f);
    assert_eq!(header, ["index", "value", "gradient_norm", "nondegenerate", "x1_1", "x1_2", "lambda_1", "lambda_2"]);
    assert_eq!(rows.len(), 1);
    assert!(column(&f, "x1_1")[0].hypot(column(&f, "x1_2")[0]) <= 1e-8);
    assert!(column(&f, "lambda_1")[0] > 0.0 && column(&f, "lambda_2")[0] > 0.0);
    let m = manifest(tmp.path());
    assert_eq!(m["config"]["starts"]["seed"], 7);
}

#[test]
fn kr_on_a_rectangle() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&lel(&["kr", "--domain", "rectangle:1.6x1"], tmp.path())), 0);
    let f = tmp.path().join("kr.csv");
    let (x, y) = (column(&f, "x1_1"), column(&f, "x1_2"));
    assert_eq!(x.len(), 1);
    assert!((x[0] - 0.8).abs() < 1e-8 && (y[0] - 0.5).abs() < 1e-8, "({}, {})", x[0], y[0]);
}

#[test]
fn pohozaev_on_a_stored_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let (sol, out) = (tmp.path().join("sol"), tmp.path().join("poh"));
    assert_eq!(code(&lel(&["solve-radial", "--p", "10"], &sol)), 0);
    let m = manifest(&sol);
    assert_eq!(listed(&m), ["radial.csv", "solution.json"]);
    let summary = sol.join("solution.json");
    let o = lel(&["pohozaev", "--solution", summary.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = out.join("pohozaev.csv");
    for name in ["p_relative", "q1_relative", "q2_relative"] {
        assert!(column(&f, name).iter().all(|&r| r <= 1e-3), "{name}");
    }
    let m = manifest(&out);
    assert_eq!(m["checks"].as_array().unwrap().len(), 3);

    // the stored table must match the mesh it claims
    let mut text = fs::read_to_string(sol.join("radial.csv")).unwrap();
    text = text.replacen("\n0.0,", "\n0.5,", 1);
    fs::write(sol.join("radial.csv"), text).unwrap();
    assert_eq!(code(&lel(&["pohozaev", "--solution", summary.to_str().unwrap()], &out)), 2);
}

#[test]
fn spectrum_along_p() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lel(&["spectrum", "--p", "20:80"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = tmp.path().join("spectrum.csv");
    let p = column(&f, "p");
    assert_eq!(p, [20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0]);
    for k in 1..=4 {
        assert!(column(&f, &format!("sigma_{k}")).iter().all(|&s| s > 0.0));
    }
    let (header, rows) = table(&f);
    let nd = header.iter().position(|c| c == "nondegenerate").unwrap();
    assert!(rows.iter().all(|r| r[nd] == "true"));
    manifest(tmp.path());
}

#[test]
fn rates_on_the_disk() {
    let tmp = tempfile::tempdir().unwrap();
    let o = lel(&["rates"], tmp.path());
    let f = tmp.path().join("rates.csv");
    let (header, rows) = table(&f);
    assert_eq!(header, ["p", "theta", "v_max", "v_pred", "u_max", "u_pred", "mu", "mu_pred", "gap_ratio", "energy"]);
    assert_eq!(rows.len(), 4);
    let summary: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("rates.json")).unwrap()).unwrap();
    assert!(summary["orders"]["v_max"].as_f64().unwrap() <= -1.5);
    // θ = 0: no gap ratio
    assert!(rows.iter().all(|r| r[8].is_empty()));

    // the exit code is 0 exactly when every recorded check passed, and the
    // energy verdict agrees with the table
    let m = manifest(tmp.path());
    let checks = m["checks"].as_array().unwrap();
    let all = checks.iter().all(|c| c["passed"].as_bool().unwrap());
    assert_eq!(code(&o), if all { 0 } else { 1 });
    let e80 = column(&f, "energy")[2];
    let verdict = checks.iter().find(|c| c["name"] == "energy at p=80").unwrap();
    assert_eq!(verdict["passed"].as_bool().unwrap(), (e80 / (8.0 * PI * 1f64.exp()) - 1.0).abs() <= 0.05);
}

#[test]
fn gap_ratio_with_theta() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"schema_version": "1", "theta": 1, "p_grid": [40, 80, 160], "thresholds": {"mu_defect": null, "energy": null}}"#);
    let out = tmp.path().join("out");
    let o = lel(&["rates", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = column(&out.join("rates.csv"), "gap_ratio");
    assert!((0.9..=1.1).contains(&g[1]), "{}", g[1]);
    assert!((g[2] - 1.0).abs() < (g[1] - 1.0).abs() && (g[1] - 1.0).abs() < (g[0] - 1.0).abs());
}

#[test]
fn continuation_failure_leaves_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"schema_version": "1", "p_grid": [20, 40], "newton": {"max_iterations": 1}}"#);
    let out = tmp.path().join("out");
    let o = lel(&["rates", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("last good p"));
    let (_, rows) = table(&out.join("rates.csv"));
    assert!(rows.is_empty());
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
}

#[test]
fn planar_solve_on_the_disk() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&lel(&["solve-2d", "--p", "10"], tmp.path())), 0);
    let s: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    let x = &s["x_n"];
    assert!(x[0].as_f64().unwrap().hypot(x[1].as_f64().unwrap()) < 1e-6);
    assert_eq!(column(&tmp.path().join("field.csv"), "u").len() as u64, s["nodes"].as_u64().unwrap());
    manifest(tmp.path());
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), r#"{"schema_version": "1", "sampels": 10}"#);
    assert_eq!(code(&lel(&["special", "--config", cfg.to_str().unwrap()], &out)), 2);
    let cfg = write_config(tmp.path(), r#"{"schema_version": "2"}"#);
    assert_eq!(code(&lel(&["special", "--config", cfg.to_str().unwrap()], &out)), 2);
    assert_eq!(code(&lel(&["rates", "--domain", "rectangle:1.6x1"], &out)), 2);
    assert_eq!(code(&lel(&["kr", "--domain", "square"], &out)), 2);
    assert_eq!(code(&lel(&["spectrum", "--p", "80:20"], &out)), 2);
    assert_eq!(code(&lel(&["special", "--threads", "0"], &out)), 2);
}

#[test]
fn io_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain");
    fs::write(&file, "").unwrap();
    assert_eq!(code(&lel(&["special"], &file.join("sub"))), 4);
    let missing = tmp.path().join("missing.json");
    assert_eq!(code(&lel(&["special", "--config", missing.to_str().unwrap()], tmp.path())), 4);
}
