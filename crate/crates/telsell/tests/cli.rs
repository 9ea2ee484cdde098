//! End-to-end tests of the `telsell` binary: output contents, formats,
//! config-file handling, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn telsell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_telsell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const BOUNDED_RISING: &[&str] = &[
    "--rho", "1.2", "--mu", "0.5", "--sigma", "0.3", "--lambda", "1", "--a", "1",
];
const UNBOUNDED_FALLING: &[&str] = &[
    "--rho", "0.5", "--mu", "0.1", "--sigma", "0.6", "--lambda", "1", "--a", "1",
];

#[test]
fn solve_json_has_exact_threshold() {
    let out = telsell(&[&["solve"], BOUNDED_RISING].concat());
    assert!(out.status.success());
    let text = stdout(&out);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["u_plus"], 3.0);
    assert_eq!(json["regime"], "BoundedUpRisingDown");
    assert!(json["u_minus"].as_f64().unwrap() > 1.0);
}

#[test]
fn solve_reports_infinite_threshold_as_string() {
    let out = telsell(&[&["solve"], UNBOUNDED_FALLING].concat());
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["u_plus"], "inf");
}

#[test]
fn solve_csv_round_trips_threshold() {
    let out = telsell(&[&["solve", "--format", "csv"], BOUNDED_RISING].concat());
    assert!(out.status.success());
    let text = stdout(&out);
    let u_minus_row = text
        .lines()
        .find(|l| l.starts_with("u_minus,"))
        .expect("u_minus row");
    let parsed: f64 = u_minus_row.split(',').nth(1).unwrap().parse().unwrap();
    let json_out = telsell(&[&["solve"], BOUNDED_RISING].concat());
    let json: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    assert_eq!(parsed, json["u_minus"].as_f64().unwrap());
}

#[test]
fn subcritical_parameters_exit_code_2() {
    let out = telsell(&[
        "solve", "--rho", "0.2", "--mu", "0.5", "--sigma", "0.3", "--lambda", "1", "--a", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("critical"), "stderr: {err}");
}

#[test]
fn missing_parameter_exit_code_1() {
    let out = telsell(&["solve", "--rho", "1.2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing parameter"), "stderr: {err}");
}

#[test]
fn curve_rows_are_monotone_and_labelled() {
    let out = telsell(&[&["curve", "--format", "csv", "--points", "50"], BOUNDED_RISING].concat());
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# u_minus="));
    assert_eq!(lines.next().unwrap(), "y,g_down,g_up,region_down,region_up");
    let mut prev_up = -1.0;
    let mut saw_stop = false;
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        let g_down: f64 = cols[1].parse().unwrap();
        let g_up: f64 = cols[2].parse().unwrap();
        assert!(g_up >= prev_up);
        assert!(g_down <= g_up + 1e-12);
        saw_stop |= cols[4] == "stop";
        prev_up = g_up;
    }
    assert!(saw_stop, "grid should reach the stopping region");
}

#[test]
fn verify_passes_and_corruption_fails() {
    let base: &[&str] = &["verify", "--n", "20000", "--seed", "7"];
    let out = telsell(&[base, BOUNDED_RISING].concat());
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    assert!(stdout(&out).contains("overall: PASS"));

    let corrupt: &[&str] = &["--corrupt-solution"];
    let out = telsell(&[base, corrupt, BOUNDED_RISING].concat());
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("overall: FAIL"));
}

#[test]
fn simulate_matches_analytic_value() {
    let out = telsell(
        &[
            &["simulate", "--n", "50000", "--seed", "3", "--y0", "1.0", "--s0", "1"],
            BOUNDED_RISING,
        ]
        .concat(),
    );
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["within_three_std_err"], true);
    let diff = json["diff"].as_f64().unwrap().abs();
    let se = json["estimate"]["std_err"].as_f64().unwrap();
    assert!(diff <= 3.0 * se + json["estimate"]["bias_bound"].as_f64().unwrap());
}

#[test]
fn limit_table_shows_convergence() {
    let out = telsell(&[
        "limit", "--rho", "0.5", "--mu", "0.1", "--sigma0", "0.6", "--a", "1",
        "--lambdas", "1e2,1e4,1e6", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# omega0="));
    let errs: Vec<f64> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 3);
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    assert!(errs[2] < 0.01);
}

#[test]
fn config_file_supplies_parameters_and_flags_override() {
    let dir = std::env::temp_dir();
    let path: PathBuf = dir.join("telsell_cli_test_config.toml");
    std::fs::write(
        &path,
        r#"
y0 = 1.0
s0 = 1

[params]
rho = 1.2
mu = 0.5
sigma = 0.3
lambda = 1.0
a = 1.0

[mc]
n = 5000
seed = 9
"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let out = telsell(&["solve", "--config", cfg]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["u_plus"], 3.0);

    // a flag overrides the file: doubling the cost doubles the threshold
    let out = telsell(&["solve", "--config", cfg, "--a", "2.0"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["u_plus"], 6.0);
    std::fs::remove_file(&path).ok();
}

#[test]
fn output_file_is_written() {
    let path = std::env::temp_dir().join("telsell_cli_test_solution.json");
    let path_str = path.to_str().unwrap();
    let out = telsell(&[&["solve", "--out", path_str], BOUNDED_RISING].concat());
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["u_plus"], 3.0);
    std::fs::remove_file(&path).ok();
}
