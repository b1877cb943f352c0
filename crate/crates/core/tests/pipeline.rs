use esfem::mesh::{format_mesh, parse_mesh};
use esfem::scenarios::{build_problem, generate_cube_mesh, myo_default_steps, run_problem, MeshKind, RunOutput};
use esfem::solver::{time_loop, NewtonSettings, Observer, TimeLoopSettings};
use esfem::{Method, OutputCurve, ScenarioConfig, SystemState};

const SHORT_DEA: &str = r#"
scenario = "dea"
dt = 1.0
output_interval = 1.0

[mesh]
length = 10.0
nodes_per_edge = 3

[steps.1]
name = "load"
duration = 4.0
bc = [{ set = "fix_xyz", dof = "ux", value = 0.0 },
      { set = "fix_xyz", dof = "uy", value = 0.0 },
      { set = "fix_xyz", dof = "uz", value = 0.0 },
      { set = "fix_yz", dof = "uy", value = 0.0 },
      { set = "fix_yz", dof = "uz", value = 0.0 },
      { set = "fix_z", dof = "uz", value = 0.0 },
      { set = "ground", dof = "potential", value = 0.0 },
      { set = "excitation", dof = "potential", values = [[0.0, 0.0], [4.0, 80.0]] }]

[steps.2]
name = "unload"
duration = 4.0
bc = [{ set = "fix_xyz", dof = "ux", value = 0.0 },
      { set = "fix_xyz", dof = "uy", value = 0.0 },
      { set = "fix_xyz", dof = "uz", value = 0.0 },
      { set = "fix_yz", dof = "uy", value = 0.0 },
      { set = "fix_yz", dof = "uz", value = 0.0 },
      { set = "fix_z", dof = "uz", value = 0.0 },
      { set = "ground", dof = "potential", value = 0.0 },
      { set = "excitation", dof = "potential", values = [[0.0, 80.0], [4.0, 0.0]] }]
"#;

fn run(cfg: &ScenarioConfig, method: Method) -> RunOutput {
    let mut cfg = cfg.clone();
    cfg.method = method;
    let problem = build_problem(&cfg).unwrap();
    run_problem(&problem, None, &mut |_| {}).unwrap()
}

#[test]
fn dielectric_loading_is_reversible_for_every_method() {
    let cfg = ScenarioConfig::from_toml(SHORT_DEA).unwrap();
    for method in Method::ALL {
        let out = run(&cfg, method);
        let c = &out.curve;
        assert_eq!(c.len(), 9, "{method}");
        let (ip, peak) = c.peak().unwrap();
        assert_eq!(c.times[ip], 4.0, "{method}");
        assert!(peak > 1e-4, "{method}: {peak}");
        assert!(c.values[8] < 1e-9, "{method}: {}", c.values[8]);
        assert!(out.logs.iter().all(|l| l.iterations <= 8), "{method}");
    }
}

#[test]
fn mesh_file_reproduces_the_generated_cube() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = generate_cube_mesh(10.0, 3, MeshKind::Tet).unwrap();
    let path = dir.path().join("cube.msh");
    std::fs::write(&path, format_mesh(&mesh)).unwrap();
    let back = parse_mesh(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.nodes(), mesh.nodes());
    assert_eq!(back.node_sets(), mesh.node_sets());

    let generated = ScenarioConfig::from_toml(SHORT_DEA).unwrap();
    let mut from_file = generated.clone();
    from_file.mesh.file = Some(path);
    let a = run(&generated, Method::Fsns).curve;
    let b = run(&from_file, Method::Fsns).curve;
    assert_eq!(a, b);
}

#[test]
fn curve_survives_a_csv_round_trip() {
    let cfg = ScenarioConfig::from_toml(SHORT_DEA).unwrap();
    let curve = run(&cfg, Method::Ns).curve;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    curve.write(&path).unwrap();
    let back = OutputCurve::read(&path).unwrap();
    assert_eq!(back.times, curve.times);
    for (a, b) in back.values.iter().zip(&curve.values) {
        assert!((a - b).abs() <= 1e-14 * b.abs());
    }
}

#[test]
fn excitation_spreads_and_contracts_the_myocardium() {
    let configs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut cfg = ScenarioConfig::from_file(&configs.join("myocardium.toml")).unwrap();
    cfg.mesh.nodes_per_edge = 4;
    cfg.steps = myo_default_steps();
    cfg.steps.get_mut(&3).unwrap().duration = 60.0;
    let problem = build_problem(&cfg).unwrap();
    let mut watch = FarPotential {
        excluded: problem.disc.mesh().node_sets()["activation"].clone(),
        max: f64::NEG_INFINITY,
    };
    let mut state = problem.initial.clone();
    let settings = TimeLoopSettings {
        newton: NewtonSettings::default(),
        output_interval: 1.0,
    };
    time_loop(&problem.disc, &problem.schedule, &mut state, &settings, &mut watch).unwrap();
    assert!(watch.max > -20.0, "wave did not leave the activation box: {}", watch.max);
    assert!(state.u.iter().any(|u| u.norm() > 1e-4));
}

/// Highest potential seen outside the excited nodes once the excitation step is over.
struct FarPotential {
    excluded: Vec<usize>,
    max: f64,
}

impl Observer for FarPotential {
    fn on_output(&mut self, state: &SystemState) -> esfem::Result<()> {
        if state.time <= 2.0 {
            return Ok(());
        }
        for (n, p) in state.phi.iter().enumerate() {
            if !self.excluded.contains(&n) {
                self.max = self.max.max(*p);
            }
        }
        Ok(())
    }
}

#[test]
fn shipped_configs_build_for_every_method() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["dea.toml", "myocardium.toml"] {
        let base = ScenarioConfig::from_file(&dir.join(name)).unwrap();
        for method in Method::ALL {
            let mut cfg = base.clone();
            cfg.method = method;
            let p = build_problem(&cfg).unwrap();
            assert_eq!(p.disc.num_nodes(), 216, "{name} {method}");
            assert!(!p.disc.mesh().node_sets()[&p.output_set].is_empty());
        }
    }
}

#[test]
fn readme_example_config_is_valid() {
    let readme = std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    let start = readme.find("```toml\n").expect("toml example") + "```toml\n".len();
    let end = start + readme[start..].find("```").unwrap();
    let cfg = ScenarioConfig::from_toml(&readme[start..end]).unwrap();
    let p = build_problem(&cfg).unwrap();
    assert!(!p.disc.mesh().node_sets()["patch"].is_empty());
}
