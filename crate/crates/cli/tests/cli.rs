use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use scg_cli::config::ProblemConfig;
use scg_cli::runner::CSV_HEADER;
use tempfile::TempDir;

fn scg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scg"))
        .current_dir(dir)
        .env_remove("SCG_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const LEAST_SQUARES: &str = r#"
max_iters = 300
seed = 4

[objective]
kind = "least-squares"
matrix = "m.csv"
b = [1.0, -2.0, 0.5]

[[sets]]
kind = "l1-ball"
dim = 2
radius = 1.5

[[sets]]
kind = "box"
lower = [-1.0, 0.0]
upper = [1.0, 2.0]

[schedule]
kind = "convex"
lambda0 = 2.0

[output]
dir = "from-config"
"#;

const MATRIX: &str = "1.0, 2.0\n-0.5, 0.25\n3.0, -1.0\n";

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn run_writes_a_valid_trace_and_summary() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "ls.toml", LEAST_SQUARES);
    write(tmp.path(), "m.csv", MATRIX);
    let out = scg(tmp.path(), &["run", "ls.toml"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rows = read_rows(&tmp.path().join("from-config/ls.csv"));
    assert_eq!(rows.len(), 300);
    for (t, row) in rows.iter().enumerate() {
        assert_eq!(row[0], t.to_string());
        let v: Vec<f64> = row[1..9].iter().map(|s| s.parse().unwrap()).collect();
        assert!(v.iter().all(|x| x.is_finite()));
        let (gamma, gap) = (v[1], v[5]);
        assert!(gamma > 0.0 && gamma <= 1.0);
        assert!(gap >= -1e-9);
        assert_eq!(row[9], "0");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("from-config/ls.json")).unwrap())
            .unwrap();
    assert_eq!(summary["iterations"], 300);
    assert_eq!(summary["termination"], "max_iters");
    // the matrix file is inlined in the echo
    assert_eq!(summary["config"]["objective"]["matrix"][2][0], 3.0);
    assert!(summary["config"]["initial"].is_array());
}

#[test]
fn summary_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "ls.toml", LEAST_SQUARES);
    write(tmp.path(), "m.csv", MATRIX);
    assert!(scg(tmp.path(), &["run", "ls.toml"]).status.success());
    let out = scg(tmp.path(), &["run", "from-config/ls.json", "--out", "again"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a = fs::read(tmp.path().join("from-config/ls.csv")).unwrap();
    let b = fs::read(tmp.path().join("again/ls.csv")).unwrap();
    assert_eq!(a, b);

    // and the echo parses back to the same configuration
    let cfg = ProblemConfig::load(&tmp.path().join("from-config/ls.json")).unwrap();
    let echo = ProblemConfig::load(&tmp.path().join("again/ls.json")).unwrap();
    assert_eq!(cfg.initial, echo.initial);
    assert_eq!(cfg.objective, echo.objective);
}

#[test]
fn single_set_run_matches_vanilla() {
    let tmp = TempDir::new().unwrap();
    let base = r#"
max_iters = 2000
seed = 1
[objective]
kind = "quadratic"
b = [0.4, -0.3, 2.0]
[[sets]]
kind = "simplex"
dim = 3
[schedule]
kind = "nonconvex"
lambda0 = 1.0
"#;
    write(tmp.path(), "scg.toml", base);
    write(tmp.path(), "vanilla.toml", &format!("solver = \"vanilla\"\n{base}"));
    assert!(scg(tmp.path(), &["run", "scg.toml", "--out", "o"]).status.success());
    assert!(scg(tmp.path(), &["run", "vanilla.toml", "--out", "o"]).status.success());
    let a = read_rows(&tmp.path().join("o/scg.csv"));
    let b = read_rows(&tmp.path().join("o/vanilla.csv"));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb).take(9).skip(1) {
            if x.is_empty() {
                assert!(y.is_empty());
                continue;
            }
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}

#[test]
fn malformed_weights_exit_2_without_output() {
    let tmp = TempDir::new().unwrap();
    let text = LEAST_SQUARES.replace("seed = 4", "seed = 4\nweights = [0.5, 0.6]");
    write(tmp.path(), "bad.toml", &text);
    write(tmp.path(), "m.csv", MATRIX);
    let out = scg(tmp.path(), &["run", "bad.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum"));
    assert!(!tmp.path().join("from-config").exists());
}

#[test]
fn other_validation_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "m.csv", MATRIX);
    let cases = [
        LEAST_SQUARES.replace("seed = 4", "seed = 4\ninitial = [[5.0, 5.0], [0.0, 0.0]]"),
        LEAST_SQUARES.replace("m.csv", "missing.csv"),
        LEAST_SQUARES.replace("radius = 1.5", "radius = -1.5"),
        LEAST_SQUARES.replace("dim = 2", "dim = 3"),
        LEAST_SQUARES.replace("max_iters = 300", "max_iters = 0"),
        LEAST_SQUARES.replace("kind = \"convex\"", "kind = \"sideways\""),
        LEAST_SQUARES.replace("lambda0 = 2.0", "lambda0 = 0.0"),
    ];
    for (i, text) in cases.iter().enumerate() {
        write(tmp.path(), "bad.toml", text);
        let out = scg(tmp.path(), &["run", "bad.toml"]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
        assert!(!tmp.path().join("from-config").exists(), "case {i}");
    }
    assert_eq!(scg(tmp.path(), &["run", "nowhere.toml"]).status.code(), Some(2));
}

#[test]
fn unknown_names_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = scg(tmp.path(), &["verify", "everything"]);
    assert_eq!(out.status.code(), Some(2));
    let out = scg(tmp.path(), &["builtin", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    let listing = String::from_utf8_lossy(&out.stderr);
    assert!(listing.contains("sparse-low-rank") && listing.contains("nonconvex-box"));
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "ls.toml", LEAST_SQUARES);
    write(tmp.path(), "m.csv", MATRIX);
    write(tmp.path(), "blocker", "");
    let out = scg(tmp.path(), &["run", "ls.toml", "--out", "blocker"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_directory_precedence() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "ls.toml", LEAST_SQUARES);
    write(tmp.path(), "m.csv", MATRIX);
    let env_run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_scg"))
            .current_dir(tmp.path())
            .env("SCG_OUT_DIR", "from-env")
            .args(args)
            .output()
            .unwrap()
    };
    assert!(env_run(&["run", "ls.toml"]).status.success());
    assert!(tmp.path().join("from-env/ls.csv").exists());
    assert!(env_run(&["run", "ls.toml", "--out", "from-flag"]).status.success());
    assert!(tmp.path().join("from-flag/ls.csv").exists());
    assert!(!tmp.path().join("from-config").exists());
    assert!(scg(tmp.path(), &["run", "ls.toml"]).status.success());
    assert!(tmp.path().join("from-config/ls.csv").exists());
}

#[test]
fn flags_override_the_configuration() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "ls.toml", LEAST_SQUARES);
    write(tmp.path(), "m.csv", MATRIX);
    let out = scg(
        tmp.path(),
        &["run", "ls.toml", "--max-iters", "7", "--schedule", "frozen", "--lambda0", "0.5", "--timing"],
    );
    assert!(out.status.success());
    let rows = read_rows(&tmp.path().join("from-config/ls.csv"));
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r[1] == "0.5" && r[8].is_empty()));
    assert_eq!(rows[2][2], "0.5");
    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("from-config/ls.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["config"]["schedule"]["kind"], "frozen");
    assert_eq!(summary["config"]["output"]["timing"], true);
}

#[test]
fn stopping_rule_ends_the_run() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
max_iters = 100
initial = [[-1.0], [-1.0]]
[objective]
kind = "quadratic"
b = [-5.0]
[[sets]]
kind = "interval"
lo = -1.0
hi = 1.0
[[sets]]
kind = "interval"
lo = -1.0
hi = 3.0
[schedule]
kind = "convex"
lambda0 = 1.0
[stop]
gap_tol = 1e-6
feas_tol = 1e-8
"#;
    write(tmp.path(), "still.toml", text);
    let out = scg(tmp.path(), &["run", "still.toml"]);
    assert!(out.status.success());
    assert_eq!(read_rows(&tmp.path().join("scg-out/still.csv")).len(), 1);
}

#[test]
fn json_configs_are_accepted() {
    let tmp = TempDir::new().unwrap();
    let text = r#"{
        "max_iters": 50,
        "objective": {"kind": "random-indefinite", "n": 4, "seed": 9, "q_scale": 1.0},
        "sets": [{"kind": "birkhoff", "n": 2}, {"kind": "spectrahedron", "n": 2}],
        "weights": [0.25, 0.75],
        "schedule": {"kind": "nonconvex", "lambda0": 3.0}
    }"#;
    write(tmp.path(), "mats.json", text);
    let out = scg(tmp.path(), &["run", "mats.json", "--sequential"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&tmp.path().join("scg-out/mats.csv"));
    assert!(rows.iter().all(|r| !r[8].is_empty()));
}

#[test]
fn builtin_and_verify_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = scg(tmp.path(), &["builtin", "minkowski", "--max-iters", "2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(tmp.path().join("scg-out/minkowski.csv").exists());

    // the short interval run cannot meet the feasibility checks
    let out = scg(tmp.path(), &["builtin", "interval", "--max-iters", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL  final-penalty"));

    let out = scg(tmp.path(), &["verify", "geometry"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("scg-out/verify-geometry.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["passed"], true);
}
