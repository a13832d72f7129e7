use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn helmwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helmwave")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn run_in(dir: &TempDir, sub: &str, cfg: &str, extra: &[&str]) -> Output {
    let path = write(dir.path(), "exp.cfg", cfg);
    let out = dir.path().to_str().unwrap();
    let mut args = vec![sub, path.as_str(), "--output-dir", out];
    args.extend_from_slice(extra);
    helmwave(&args)
}

#[test]
fn custom_run_without_refinement_writes_one_row() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, "run", "experiment = custom\nkappa = 10\nlevels = 0\n", &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("custom.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "series,level,dofs,iter");
    assert_eq!(lines.len(), 2);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("custom.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "custom");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn verbose_run_writes_history_and_trace() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, "run", "experiment = custom\nkappa = 10\nlevels = 1\n", &["--verbose"]);
    assert!(out.status.success());
    assert!(!out.stderr.is_empty());
    let hist = fs::read_to_string(dir.path().join("custom_L1_history.csv")).unwrap();
    assert!(hist.starts_with("iteration,relative_residual\n0,1"));
    let trace = fs::read_to_string(dir.path().join("custom_L1_trace.csv")).unwrap();
    assert!(trace.lines().count() > 2);
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    for cfg in [
        "experiment = custom\nkappa = -3\n",
        "experiment = table9\n",
        "experiment = custom\nbogus = 1\n",
        "experiment = custom\nkappa 10\n",
        "experiment = table6\nkappa = 77\n",
        "{\"experiment\": \"custom\", \"p\": 4}",
    ] {
        let out = run_in(&dir, "run", cfg, &[]);
        assert_eq!(out.status.code(), Some(1), "{cfg}");
    }
    assert_eq!(helmwave(&["run", "/nonexistent/config.cfg"]).status.code(), Some(1));
    assert_eq!(helmwave(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(helmwave(&["--help"]).status.code(), Some(0));
}

#[test]
fn size_guard_refuses_huge_runs() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, "run", "experiment = custom\nkappa = 10\nlevels = 9\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("override-size-guard"));
    assert!(!dir.path().join("custom.csv").exists());
}

#[test]
fn lfa_fig2_has_three_smoothers() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, "lfa", "experiment = fig2\nsamples = 32\n", &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "theta0,rho,variant,t,sigma_re,sigma_im,omega,beta");
    let mut names: Vec<String> = lines.map(|l| l.split(',').nth(2).unwrap().to_owned()).collect();
    assert_eq!(names.len(), 96);
    names.dedup();
    assert_eq!(names, ["gauss-seidel", "jacobi", "gmres(1)"]);
}

#[test]
fn lfa_rejects_solver_tables() {
    let dir = TempDir::new().unwrap();
    let out = run_in(&dir, "lfa", "experiment = table6\n", &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_reproducible() {
    let cfg = "experiment = custom\nkappa = 12\nlevels = 1\nalgorithm = cip_all\n";
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert!(run_in(&a, "run", cfg, &[]).status.success());
    assert!(run_in(&b, "run", cfg, &[]).status.success());
    assert_eq!(fs::read(a.path().join("custom.csv")).unwrap(), fs::read(b.path().join("custom.csv")).unwrap());

    let lfa = "experiment = custom\nt = 0.5\nvariant = C, FC\nsamples = 17\n";
    assert!(run_in(&a, "lfa", lfa, &[]).status.success());
    assert!(run_in(&b, "lfa", lfa, &[]).status.success());
    assert_eq!(fs::read(a.path().join("custom.csv")).unwrap(), fs::read(b.path().join("custom.csv")).unwrap());
}

#[test]
fn json_config_and_output_path() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"experiment": "custom", "kappa": 8, "levels": 1, "p": 2, "output_path": "sub/k8.csv"}"#;
    let out = run_in(&dir, "run", cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("sub/k8.csv").exists());
    assert!(dir.path().join("sub/k8.manifest.json").exists());
}
