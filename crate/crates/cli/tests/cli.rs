use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use assert_cmd::Command;

fn qbox() -> Command {
    Command::cargo_bin("qbox").unwrap()
}

fn stdout_of(args: &[&str]) -> String {
    let out = qbox().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "qbox {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Header plus rows of floats.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    let head = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (head, rows)
}

fn column(head: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let j = head.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[j]).collect()
}

fn box_state(x: f64, k: usize) -> f64 {
    (k as f64 * PI * (x + 1.0) / 2.0).sin()
}

/// xi,re,im rows on the n-point grid.
fn write_state(path: &Path, n: usize, f: impl Fn(f64) -> (f64, f64)) {
    let mut s = String::from("xi,re,im\n");
    for i in 0..n {
        let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
        let (re, im) = f(x);
        writeln!(s, "{x:.17e},{re:.17e},{im:.17e}").unwrap();
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn solve_free_box_csv() {
    let (head, rows) = table(&stdout_of(&["solve", "--alpha", "0"]));
    assert_eq!(rows.len(), 4);
    let scaled = column(&head, &rows, "beta_scaled");
    for (k, b) in scaled.iter().enumerate() {
        let want = ((k + 1) * (k + 1)) as f64;
        assert!((b - want).abs() <= 1e-8 * want, "k = {}: {b}", k + 1);
    }
}

#[test]
fn solve_mean_position_signs() {
    let (head, rows) = table(&stdout_of(&["solve", "--alpha", "10"]));
    let xi = column(&head, &rows, "mean_xi");
    let signs: Vec<bool> = xi.iter().map(|v| *v > 0.0).collect();
    assert_eq!(signs, [true, false, false, false]);

    let (head, rows) = table(&stdout_of(&["solve", "--alpha", "100"]));
    assert!(column(&head, &rows, "mean_xi").iter().all(|v| *v > 0.0));
}

#[test]
fn solve_is_byte_identical() {
    let args = ["solve", "--alpha", "10", "--n", "401"];
    assert_eq!(stdout_of(&args), stdout_of(&args));
    let json = ["solve", "--alpha", "10", "--n", "401", "--format", "json"];
    assert_eq!(stdout_of(&json), stdout_of(&json));
}

#[test]
fn solve_json_and_scales() {
    let doc = stdout_of(&["solve", "--alpha", "10", "--n", "401", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
    assert_eq!(v["command"], "solve");
    let (head, rows) = table(&stdout_of(&[
        "solve", "--alpha", "10", "--n", "401", "--scales", "9.109e-31,1.602e-19,1e3,1e-9",
    ]));
    assert!(head.iter().any(|h| h == "energy"));
    assert!(column(&head, &rows, "energy").iter().all(|e| e.is_finite()));
}

#[test]
fn solve_svg_is_self_contained() {
    let doc = stdout_of(&["solve", "--alpha", "10", "--n", "201", "--format", "svg"]);
    assert!(doc.starts_with("<svg") || doc.starts_with("<?xml"));
    assert!(doc.trim_end().ends_with("</svg>"));
    assert!(!doc.contains("href"));
}

#[test]
fn usage_errors_exit_2() {
    qbox().args(["solve", "--n", "100"]).assert().code(2);
    qbox().args(["solve", "--order", "3"]).assert().code(2);
    qbox().args(["solve", "--bc", "x"]).assert().code(2);
    qbox().args(["evolve", "--initial", "a.csv", "--sigma", "2"]).assert().code(2);
    qbox().args(["scan", "--steps", "1"]).assert().code(2);
    qbox()
        .env("QBOX_THREADS", "lots")
        .args(["solve", "--n", "201"])
        .assert()
        .code(2);
}

#[test]
fn periodic_stark_is_a_solver_failure() {
    let out = qbox().args(["solve", "--bc", "p", "--alpha", "5", "--n", "201"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("periodic"));
}

#[test]
fn missing_input_is_a_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    qbox()
        .args(["evolve", "--initial", missing.to_str().unwrap(), "--n", "201"])
        .assert()
        .code(3);
}

#[test]
fn initial_state_on_wrong_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("init.csv");
    write_state(&f, 301, |x| (box_state(x, 1), 0.0));
    let out = qbox()
        .args(["evolve", "--initial", f.to_str().unwrap(), "--n", "201"])
        .output()
        .unwrap();
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn evolve_eigenstate_is_stationary() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("init.csv");
    write_state(&f, 401, |x| (box_state(x, 2), 0.0));
    let (head, rows) = table(&stdout_of(&[
        "evolve", "--initial", f.to_str().unwrap(), "--n", "401", "--t-steps", "11",
    ]));
    assert_eq!(rows.len(), 11);
    for name in ["dxdt_direct", "dxdt_ehrenfest", "dpdt_direct", "dpdt_ehrenfest"] {
        for v in column(&head, &rows, name) {
            assert!(v.abs() < 1e-7, "{name}: {v}");
        }
    }
}

#[test]
fn evolve_two_level_rates_agree() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("init.csv");
    write_state(&f, 1001, |x| (box_state(x, 1) + box_state(x, 2), 0.0));
    let path = f.to_str().unwrap();
    let (head, rows) = table(&stdout_of(&["evolve", "--initial", path, "--t-steps", "21", "--t-end", "1"]));
    let xd = column(&head, &rows, "dxdt_direct");
    let xe = column(&head, &rows, "dxdt_ehrenfest");
    let pd = column(&head, &rows, "dpdt_direct");
    let pe = column(&head, &rows, "dpdt_ehrenfest");
    assert!(xd.iter().any(|v| v.abs() > 1e-2), "state should move");
    for i in 0..rows.len() {
        assert!((xd[i] - xe[i]).abs() < 1e-7, "x at row {i}");
        assert!((pd[i] - pe[i]).abs() < 1e-6, "p at row {i}");
    }

    // Without the wall term the momentum rate no longer balances.
    let (head, rows) = table(&stdout_of(&[
        "evolve", "--initial", path, "--t-steps", "21", "--t-end", "1", "--sigma", "0",
    ]));
    let pd = column(&head, &rows, "dpdt_direct");
    let pe = column(&head, &rows, "dpdt_ehrenfest");
    assert!(pd.iter().zip(&pe).any(|(a, b)| (a - b).abs() > 1.0));
}

#[test]
fn scan_small_range() {
    let (head, rows) = table(&stdout_of(&[
        "scan", "--alpha-min", "0", "--alpha-max", "20", "--steps", "5", "--n", "401",
    ]));
    assert_eq!(rows.len(), 5);
    assert_eq!(column(&head, &rows, "alpha"), [0.0, 5.0, 10.0, 15.0, 20.0]);
    let ground = column(&head, &rows, "mean_xi_1");
    assert!(ground[0].abs() < 1e-9);
    assert!(ground.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn table_balances_walls() {
    let (head, rows) = table(&stdout_of(&["table", "--alpha", "10,100", "--n", "601"]));
    assert_eq!(rows.len(), 8);
    for r in column(&head, &rows, "residual") {
        assert!(r.abs() < 1e-6, "{r}");
    }
    qbox().args(["table", "--format", "svg", "--n", "201"]).assert().code(2);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.csv");
    let args = ["solve", "--alpha", "3", "--n", "301"];
    let printed = stdout_of(&args);
    qbox().args(args).args(["--out", f.to_str().unwrap()]).assert().success();
    assert_eq!(std::fs::read_to_string(f).unwrap(), printed);
}

#[test]
fn verify_reports_expected_failures() {
    let out = qbox().args(["verify", "--samples", "20", "--n", "601"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_passed"], true);
    let checks = v["checks"].as_array().unwrap();
    let expected: Vec<&str> = checks
        .iter()
        .filter(|c| c["expected_fail"] == true)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(expected, ["force_balance_without_walls", "hermiticity_p_neumann"]);
    for c in checks.iter().filter(|c| c["expected_fail"] == true) {
        assert_eq!(c["passed"], false, "{}", c["name"]);
    }
}
