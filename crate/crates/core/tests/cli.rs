use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use wolfflab::io::read_csv;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("wolfflab-cli-{name}-{}", std::process::id()));
    fs::remove_dir_all(&dir).ok();
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn wolfflab(args: &[&str], dir: &Path, env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wolfflab"));
    cmd.args(args).current_dir(dir).env_remove("WOLFFLAB_OUT");
    if let Some(p) = env_out {
        cmd.env("WOLFFLAB_OUT", p);
    }
    cmd.output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

const DIRAC_POTENTIAL: &str = r#"{
  "experiment": "potential",
  "params": {"n": 2, "s": 0.5, "p": 2.0},
  "measure": "dirac.json",
  "potential": {"kind": "wolff", "points": [[0.5, 0.0], [0.0, 0.25], [0.3, 0.4]], "tol": 1e-10}
}"#;

#[test]
fn dirac_wolff_grid_matches_closed_form() {
    let dir = scratch("potential");
    fs::write(dir.join("dirac.json"), r#"{"atoms": [{"x": [0.0, 0.0], "mass": 1.5}]}"#).unwrap();
    fs::write(dir.join("cfg.json"), DIRAC_POTENTIAL).unwrap();
    let out = wolfflab(&["potential", "--config", "cfg.json", "--out", "res"], &dir, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.join("res/potential/potential.csv")).unwrap();
    assert_eq!(header, ["point", "x0", "x1", "value"]);
    // n - sp = 1 and p = 2: the untruncated potential of m δ_0 is m / |x|.
    for (row, d) in rows.iter().zip([0.5, 0.25, 0.5]) {
        let v: f64 = row[3].parse().unwrap();
        assert!((v - 1.5 / d).abs() < 1e-8 * v, "{v} vs {}", 1.5 / d);
    }
    let rep = report(&dir.join("res/potential/report.json"));
    assert_eq!(rep["version"], format!("wolfflab {}", env!("CARGO_PKG_VERSION")));
    assert_eq!(rep["config"]["params"]["s"], 0.5);
    assert_eq!(rep["config"]["potential"]["kind"], "wolff");
    assert_eq!(rep["result"]["points"], 3);
}

#[test]
fn malformed_config_exits_nonzero_with_error_json() {
    let dir = scratch("malformed");
    fs::write(dir.join("bad.json"), r#"{"params": {"n": 2, "s": 0.5"#).unwrap();
    let out = wolfflab(&["solve", "--config", "bad.json"], &dir, None);
    assert!(!out.status.success());
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("bad.json"));
}

#[test]
fn invalid_params_are_reported() {
    let dir = scratch("params");
    fs::write(dir.join("cfg.json"), r#"{"params": {"n": 2, "s": 0.5, "p": 5.0}, "lattice": {"lo": [0, 0], "hi": [1, 1], "h": 0.25}}"#)
        .unwrap();
    let out = wolfflab(&["solve", "--config", "cfg.json"], &dir, None);
    assert!(!out.status.success());
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("growth exponent"));
}

#[test]
fn experiment_name_must_match_subcommand() {
    let dir = scratch("mismatch");
    fs::write(dir.join("cfg.json"), DIRAC_POTENTIAL).unwrap();
    let out = wolfflab(&["solve", "--config", "cfg.json"], &dir, None);
    assert_eq!(out.status.code(), Some(1));
}

const SOLVE: &str = r#"{
  "params": {"n": 2, "s": 0.5, "p": 1.5},
  "lattice": {"lo": [-1, -1], "hi": [1, 1], "h": 0.25},
  "measure": {"atoms": [{"x": [0.0, 0.0], "mass": 0.2}]},
  "exterior": 0.1,
  "solve": {"tol": 1e-10}
}"#;

#[test]
fn solve_is_deterministic_and_env_sets_output() {
    let dir = scratch("solve");
    fs::write(dir.join("cfg.json"), SOLVE).unwrap();
    let a = wolfflab(&["solve", "--config", "cfg.json"], &dir, Some(&dir.join("env-a")));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = wolfflab(&["solve", "--config", "cfg.json", "--jobs", "2"], &dir, Some(&dir.join("env-b")));
    assert!(b.status.success());
    let (ca, cb) = (dir.join("env-a/solve/solution.csv"), dir.join("env-b/solve/solution.csv"));
    assert_eq!(body(&ca), body(&cb));
    assert!(fs::read_to_string(&ca).unwrap().starts_with("# wolfflab "));
    let (_, rows) = read_csv(&ca).unwrap();
    let centre = rows.iter().find(|r| r[1] == "0" && r[2] == "0").unwrap();
    let far = rows.iter().find(|r| r[3] == "0").unwrap();
    assert!(centre[4].parse::<f64>().unwrap() > 0.1);
    assert_eq!(far[4].parse::<f64>().unwrap(), 0.1);
    let rep = report(&dir.join("env-a/solve/report.json"));
    assert_eq!(rep["result"]["converged"], true);
    assert_eq!(rep["config"]["output"], dir.join("env-a").to_str().unwrap());
    // The flag beats the environment.
    let c = wolfflab(&["solve", "--config", "cfg.json", "--out", "flag"], &dir, Some(&dir.join("env-c")));
    assert!(c.status.success());
    assert!(dir.join("flag/solve/solution.csv").exists());
    assert!(!dir.join("env-c").exists());
}

#[test]
fn capacity_of_balls_scales() {
    let dir = scratch("capacity");
    let cfg = r#"{
      "capacity": {"kernel": {"kind": "riesz", "s": 1.0}, "integrand": {"power": 1.5},
                   "sets": {"balls": [{"x": [0, 0], "r": 0.2}, {"x": [0, 0], "r": 0.4}]}}
    }"#;
    fs::write(dir.join("cfg.json"), cfg).unwrap();
    let out = wolfflab(&["capacity", "--config", "cfg.json", "--out", "res", "--jobs", "2"], &dir, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.join("res/capacity/capacities.csv")).unwrap();
    let caps: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    // Homogeneity of degree n - s q = 0.5.
    let slope = (caps[1] / caps[0]).log2();
    assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn lane_emden_small_data_converges() {
    let dir = scratch("lane-emden");
    let cfg = r#"{
      "params": {"n": 2, "s": 0.8, "p": 2.0},
      "lattice": {"lo": [-1, -1], "hi": [1, 1], "h": 0.2},
      "measure": {"atoms": [{"x": [0.0, 0.0], "mass": 1.0}]},
      "lane_emden": {"reaction": {"kind": "power", "gamma": 3.0}}
    }"#;
    fs::write(dir.join("cfg.json"), cfg).unwrap();
    let out = wolfflab(&["lane-emden", "--config", "cfg.json", "--out", "res"], &dir, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = report(&dir.join("res/lane-emden/report.json"));
    assert_eq!(rep["result"]["converged"], true);
    assert_eq!(rep["result"]["monotone"], true);
}

#[test]
fn acceptance_subset_writes_partitioned_reports() {
    let dir = scratch("acceptance");
    fs::write(dir.join("cfg.json"), r#"{"acceptance": {"criteria": [6, 7]}, "seed": 3}"#).unwrap();
    let out = wolfflab(&["acceptance", "--config", "cfg.json", "--out", "res", "--jobs", "2"], &dir, None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    let summary = report(&dir.join("res/acceptance/summary.json"));
    assert_eq!(summary["result"]["passed"], true);
    assert_eq!(summary["result"]["criteria"].as_array().unwrap().len(), 2);
    assert!(dir.join("res/acceptance/criterion_06/report.json").exists());
    assert!(dir.join("res/acceptance/criterion_07/report.json").exists());
}

#[test]
fn unknown_criterion_is_rejected() {
    let dir = scratch("acceptance-bad");
    fs::write(dir.join("cfg.json"), r#"{"acceptance": {"criteria": [12]}}"#).unwrap();
    let out = wolfflab(&["acceptance", "--config", "cfg.json", "--out", "res"], &dir, None);
    assert!(!out.status.success());
}
