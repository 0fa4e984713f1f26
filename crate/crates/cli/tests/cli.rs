use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdelaunay"))
        .args(args)
        .output()
        .expect("spawn qdelaunay")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn params_reports_n5_constants() {
    let o = run(&["params", "--n", "5"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["c2"], 6.5);
    assert_eq!(v["p"], 9.0);
    assert!((v["t_cyl"].as_f64().unwrap() - 5.04297).abs() < 1e-5);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&run(&["params", "--n", "4"])), 1);
    assert_eq!(code(&run(&["solve", "--n", "5", "--a", "1.5"])), 1);
    assert_eq!(code(&run(&["solve", "--n", "5", "--a", "0.9", "--tol", "-1"])), 1);
    assert_eq!(code(&run(&["period", "--n", "5", "--T", "4"])), 1);
    assert_eq!(
        code(&run(&[
            "sweep", "--n", "5", "--a-min", "0.5", "--a-max", "0.9", "--count", "3"
        ])),
        1
    );
    assert_eq!(code(&run(&["convergence", "--n", "5", "--kmax", "0"])), 1);
    assert_eq!(
        code(&run(&[
            "spectrum", "--n", "5", "--a", "0.9", "--l", "1", "--grid", "100"
        ])),
        1
    );
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["solve", "--n", "5"])), 1);
    let o = run(&["params", "--n", "4"]);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("n=4") && err.contains("invalid parameter"), "{err}");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    let o = run(&["--version"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("qdelaunay "));
}

#[test]
fn solve_writes_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let a = run(&["--out", out, "solve", "--n", "5", "--a", "0.9"]);
    assert_eq!(code(&a), 0);
    let b = run(&["solve", "--n", "5", "--a", "0.9"]);
    assert_eq!(a.stdout, b.stdout);

    let summary: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!((summary["t_a"].as_f64().unwrap() - 5.22932).abs() < 1e-5);
    assert!(summary["defect"].as_f64().unwrap() <= 1e-6);
    assert_eq!(fs::read(dir.path().join("summary.json")).unwrap(), a.stdout);

    let csv = fs::read_to_string(dir.path().join("orbit.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# qdelaunay "));
    assert_eq!(lines.next().unwrap(), "t,v,v1,v2,v3,H");
    assert!(lines.count() >= 100);

    let again = tempfile::tempdir().unwrap();
    run(&[
        "--out",
        again.path().to_str().unwrap(),
        "solve",
        "--n",
        "5",
        "--a",
        "0.9",
    ]);
    assert_eq!(csv, fs::read_to_string(again.path().join("orbit.csv")).unwrap());
}

#[test]
fn sweep_csv_layout() {
    let args = [
        "sweep", "--n", "5", "--a-min", "0.85", "--a-max", "0.95", "--count", "4",
    ];
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# qdelaunay 0.1.0 n=5"));
    assert_eq!(lines[1], "a,b,T_a,eps_a,H,I_a,defect");
    assert_eq!(lines.len(), 6);
    let periods: Vec<f64> = lines[2..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert!(periods.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(run(&args).stdout, o.stdout);

    let j = run(&[
        "--json", "sweep", "--n", "5", "--a-min", "0.85", "--a-max", "0.95", "--count", "2",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["t_increasing"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn convergence_and_period() {
    let o = run(&["convergence", "--n", "5", "--kmax", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "a,T_a,I_a,Y,Y_over_Ysph");
    let last: f64 = text.lines().last().unwrap().split(',').nth(4).unwrap().parse().unwrap();
    assert!((last - 0.96272).abs() < 1e-4);

    let o = run(&["period", "--n", "5", "--T", "6"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["t_a"].as_f64().unwrap() - 6.0).abs() < 1e-6);
}

#[test]
fn portrait_and_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&[
        "--out",
        out,
        "phase-portrait",
        "--n",
        "5",
        "--a",
        "0.9,0.95",
        "--sphere",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["curves"].as_array().unwrap().len(), 3);
    let csv = fs::read_to_string(dir.path().join("portrait.csv")).unwrap();
    assert_eq!(csv.lines().nth(1).unwrap(), "curve_id,label,v,v1");

    let o = run(&["spectrum", "--n", "5", "--a", "0.95", "--l", "2", "--grid", "128"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["negative_count"].as_u64().unwrap() >= 2);
}

#[test]
fn selfcheck_passes() {
    let o = run(&["selfcheck", "--n", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["failures"].as_array().unwrap().is_empty());
}
