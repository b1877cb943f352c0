use std::path::Path;
use std::process::{Command, Output};

fn esfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL_DEA: &str = r#"
scenario = "dea"
dt = 1.0
output_interval = 1.0

[mesh]
length = 10.0
nodes_per_edge = 3

[steps.1]
name = "load"
duration = 3.0
bc = [{ set = "fix_xyz", dof = "ux", value = 0.0 },
      { set = "fix_xyz", dof = "uy", value = 0.0 },
      { set = "fix_xyz", dof = "uz", value = 0.0 },
      { set = "fix_yz", dof = "uy", value = 0.0 },
      { set = "fix_yz", dof = "uz", value = 0.0 },
      { set = "fix_z", dof = "uz", value = 0.0 },
      { set = "ground", dof = "potential", value = 0.0 },
      { set = "excitation", dof = "potential", values = [[0.0, 0.0], [3.0, 60.0]] }]
"#;

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    std::fs::write(&path, SMALL_DEA).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(esfem(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(esfem(&["run"]).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let o = esfem(&["run", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn volume_suite_passes() {
    let o = esfem(&["verify", "--suite", "volumes"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("[volumes] PASS")), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn generated_mesh_round_trips_through_mesh_info() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.msh");
    let p = path.to_str().unwrap();
    assert!(esfem(&["mesh-gen", "--length", "2", "--nodes", "3", "--out", p]).status.success());
    let o = esfem(&["mesh-info", "--mesh", p]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("nodes = 27"), "{text}");
    assert!(text.contains("elements = 48"), "{text}");
}

#[test]
fn run_writes_curve_and_compare_of_identical_curves_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    let o = esfem(&["run", "--config", &cfg, "--method", "fsns", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = stdout(&o);
    assert!(log.lines().any(|l| l.starts_with("step=3 t=3 iters=")), "{log}");

    let csv = out.join("curve.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("time_ms,avg_disp_mm"));
    assert_eq!(text.lines().count(), 5);
    assert!(out.join("vtk").join("state_0003.vtk").exists());
    assert!(std::fs::read_to_string(out.join("timing.txt")).unwrap().contains("increments = 3"));

    let c = csv.to_str().unwrap();
    let o = esfem(&["compare", "--ref", c, "--test", c]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);
}
