//! Binary-level tests: exit codes, diagnostics, and artifact shape.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cantilever")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cantilever-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str], out: &PathBuf) -> Output {
    Command::new(bin())
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path =
        std::env::temp_dir().join(format!("cantilever-cfg-{}-{name}.toml", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn certify_builtin_passes() {
    let out = tmp("certify");
    let o = run(&["certify", "--example", "paper-3-3"], &out);
    assert_eq!(o.status.code(), Some(0));
    let json = std::fs::read_to_string(out.join("certify.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let certs = v["certificates"].as_array().unwrap();
    assert!(certs
        .iter()
        .any(|c| c["hypothesis"] == "h2a" && c["verdict"] == "PASS"));
    assert!(certs
        .iter()
        .any(|c| c["hypothesis"] == "h2b" && c["verdict"] == "PASS"));
    // schema fields
    for c in certs {
        for key in [
            "hypothesis",
            "lhs",
            "rhs",
            "margin",
            "verdict",
            "heuristic",
            "quadrature_error_estimate",
            "inputs_echo",
        ] {
            assert!(c.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(v["fixed_point_regime"], "compression");
}

#[test]
fn certify_power_family_builtin_passes_both_routes() {
    let out = tmp("certify-39");
    let o = run(&["certify", "--example", "paper-3-9"], &out);
    assert_eq!(o.status.code(), Some(0));
    let json = std::fs::read_to_string(out.join("certify.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for hyp in ["h2a", "h2b", "f2_lower", "f2_upper"] {
        assert!(
            v["certificates"]
                .as_array()
                .unwrap()
                .iter()
                .any(|c| c["hypothesis"] == hyp && c["verdict"] == "PASS"),
            "{hyp} should pass"
        );
    }
}

#[test]
fn certify_zero_nonlinearity_fails_with_exit_1() {
    let cfg = write_config(
        "zero",
        r#"
[nonlinearity]
dsl = "[0,inf): 0"
"#,
    );
    let out = tmp("certify-zero");
    let o = run(&["certify", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_dsl_exits_2_with_diagnostics() {
    let cfg = write_config(
        "bad",
        r#"
[nonlinearity]
dsl = "[0,inf): 4600*"
"#,
    );
    let out = tmp("bad-dsl");
    let o = run(&["certify", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("parse error"), "stderr: {err}");
}

#[test]
fn invalid_panels_exits_2() {
    let out = tmp("panels");
    let o = run(&["eigen", "--panels", "100"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_emits_profile_with_tip_value() {
    let cfg = write_config(
        "unitload",
        r#"
[nonlinearity]
dsl = "[0,inf): 1"
[solver]
method = "picard"
tol = 1e-12
"#,
    );
    let out = tmp("solve-unit");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("solve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,u,u2,f");
    let last = csv.lines().last().unwrap();
    let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], 1.0);
    assert!((cells[1] - 0.125).abs() < 1e-10, "tip {}", cells[1]);
    assert!(cells[2].abs() < 1e-10);
    assert_eq!(cells[3], 1.0);
}

#[test]
fn stalled_start_exits_1_with_diagnostic() {
    let cfg = write_config(
        "stall",
        r#"
[nonlinearity]
dsl = "[0,0.03): 4600*u ; [0.03,inf): 138"
[solver]
method = "monotone-up"
"#,
    );
    let out = tmp("stall");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(
        stdout.contains("stalled at the zero fixed point"),
        "{stdout}"
    );
}

#[test]
fn eigen_csv_boundary_row() {
    let out = tmp("eigen");
    let o = run(&["eigen"], &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("eigen.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,phi1,dphi1,d2phi1");
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    // clamped end: phi(0) = phi'(0) = 0 and phi''(0) > 0
    assert_eq!(first[0], 0.0);
    assert!(first[1].abs() < 1e-12 && first[2].abs() < 1e-12);
    assert!(first[3] > 0.0);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("eigen.json")).unwrap()).unwrap();
    let beta = json["beta"].as_f64().unwrap();
    assert!((json["lambda1"].as_f64().unwrap() - beta.powi(4)).abs() < 1e-12);
}

#[test]
fn reproduce_power_family_with_degenerate_exponent_exits_1() {
    let cfg = write_config(
        "p0",
        r#"
[reproduce]
p = 0.0
"#,
    );
    let out = tmp("p0");
    let o = run(
        &[
            "reproduce",
            "example-3-9",
            "--config",
            cfg.to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("degenerate"), "stderr: {err}");
}

#[test]
fn reproduce_scan_exhaustion_exits_1_with_table() {
    let cfg = write_config(
        "exhaust",
        r#"
[reproduce]
p = 0.5
b_max = 3.0
"#,
    );
    let out = tmp("exhaust");
    let o = run(
        &[
            "reproduce",
            "example-3-9",
            "--config",
            cfg.to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("scan exhausted"), "{stdout}");
    assert!(out.join("reproduce-3-9-scan.csv").exists());
}

#[test]
fn unknown_reproduction_exits_2() {
    let out = tmp("unknown");
    let o = run(&["reproduce", "example-9-9"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csv_cells_carry_seventeen_significant_digits() {
    let out = tmp("digits");
    let o = run(&["eigen"], &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("eigen.csv")).unwrap();
    let row = csv.lines().nth(2).unwrap();
    let cell = row.split(',').nth(1).unwrap();
    // scientific notation with 16 digits after the point
    let mantissa = cell.split('e').next().unwrap();
    let frac = mantissa.split('.').nth(1).unwrap();
    assert_eq!(frac.len(), 16, "cell {cell}");
    // and the value round-trips exactly
    let x: f64 = cell.parse().unwrap();
    assert_eq!(format!("{:.16e}", x), cell);
}
