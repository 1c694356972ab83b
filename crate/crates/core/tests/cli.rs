use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn capflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capflow")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(out: &str, key: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{out}"))
        .to_string()
}

const COARSE_RUN: &str = "norm.kind = quartic_a2\nflow.omega0 = -0.3\nflow.initial = perturbed_cap\n\
grid.n_beta = 16\ngrid.n_lambda = 32\nflow.convergence_tol = 5e-3\nflow.snapshot_every = 500\n";

#[test]
fn simulate_writes_trace_snapshots_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", COARSE_RUN);
    let o = capflow(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    for col in ["t", "V0", "V1_boundary", "supF", "rate_err_k1"] {
        assert!(header.contains(&col), "{header:?}");
    }
    let v1_col = header.iter().position(|c| *c == "V1_boundary").unwrap();
    let v1: Vec<f64> = lines.map(|l| l.split(',').nth(v1_col).unwrap().parse().unwrap()).collect();
    assert!(v1.len() > 10);
    assert!(v1.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)));
    assert!(out.join("monitors.csv").exists());
    let snaps = std::fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".obj")).count();
    assert!(snaps >= 2);
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert_eq!(value(&summary, "converged"), "true");
    assert_eq!(value(&summary, "v1_non_increasing"), "true");
}

#[test]
fn simulate_is_bit_reproducible() {
    let dir = TempDir::new().unwrap();
    let body = "norm.kind = sphere\nflow.omega0 = 0.2\nflow.initial = perturbed_cap\nflow.seed = 9\n\
grid.n_beta = 16\ngrid.n_lambda = 32\nflow.max_steps = 50\n";
    let mut traces = Vec::new();
    for name in ["a", "b"] {
        let cfg = write_config(dir.path(), &format!("{name}.cfg"), &format!("{body}output.dir = {name}\n"));
        assert!(capflow(&["simulate", "--config", cfg.to_str().unwrap()]).status.success());
        traces.push(std::fs::read(dir.path().join(name).join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn inadmissible_omega_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "norm.kind = sphere\nflow.omega0 = -2\n");
    let o = capflow(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omega0 outside (−F(E₃), F(−E₃)) = (−1, 1)"));
}

#[test]
fn blow_up_exits_with_three_and_keeps_the_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "huge.cfg",
        "norm.kind = sphere\nflow.omega0 = -0.3\nflow.initial = perturbed_cap\ngrid.n_beta = 16\ngrid.n_lambda = 32\n\
flow.dt = 10\nflow.t_end = 1000\n",
    );
    let o = capflow(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let trace = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert!(trace.lines().count() >= 2);
    assert!(value(&stdout(&o), "status").starts_with("blow_up"));
}

fn check_condition(body: &str) -> (String, PathBuf, TempDir) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", body);
    let o = capflow(&["check-condition", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let csv = PathBuf::from(value(&out, "samples_csv_path"));
    (out, csv, dir)
}

#[test]
fn check_condition_reports_margin_and_samples() {
    let (out, csv, _d) = check_condition("norm.kind = quartic_a2\nflow.omega0 = 0.1\n");
    assert_eq!(value(&out, "satisfied"), "false");
    assert!(value(&out, "min_margin").parse::<f64>().unwrap() < 0.0);
    assert!(std::fs::read_to_string(csv).unwrap().lines().count() > 100);

    let (out, _, _d) = check_condition("norm.kind = quartic_a3\nnorm.params = [0.3]\nflow.omega0 = 0.3\n");
    assert_eq!(value(&out, "satisfied"), "true");
    assert!(value(&out, "min_margin").parse::<f64>().unwrap().abs() <= 1e-5);

    let (out, _, _d) = check_condition("norm.kind = sphere\nflow.omega0 = -0.5\n");
    assert_eq!(value(&out, "satisfied"), "true");
    assert!((value(&out, "min_margin").parse::<f64>().unwrap() - 0.5).abs() <= 1e-6);
}

#[test]
fn unknown_suite_exits_with_two() {
    assert_eq!(capflow(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn fast_suite_passes() {
    let o = capflow(&["verify", "duality"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("0 failed"));
}

#[test]
fn norm_info_prints_the_admissible_interval() {
    let o = capflow(&["norm-info", "--kind", "ellipsoid", "--params", "4,1,1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(value(&out, "F(E)"), "1");
    assert!(value(&out, "ellipticity_min_eigenvalue").parse::<f64>().unwrap() > 0.0);
    assert!(value(&out, "admissible_omega0").starts_with('('));
}
