use std::collections::BTreeMap;

use super::config::{BcSpec, ScenarioConfig, ScenarioKind, SetSpec, StepSpec};
use super::cube::generate_cube_mesh;
use super::fibers::FiberRule;
use crate::assembly::{Discretisation, MethodConfig};
use crate::error::{Error, Result};
use crate::mesh::{parse_mesh, Mesh};
use crate::solver::{BoundarySchedule, Constraint, DofKind, Profile, Step, SystemState};

/// A benchmark ready to run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: ScenarioConfig,
    pub disc: Discretisation,
    pub schedule: BoundarySchedule,
    /// Node set of the output curve.
    pub output_set: String,
    pub initial: SystemState,
}

const DISPLACEMENTS: [DofKind; 3] = [DofKind::Ux, DofKind::Uy, DofKind::Uz];

/// Default node sets of the dielectric cube: the excitation patch on the front
/// face `z = 0`, the grounded back face and the 3-2-1 fixation corners on it.
pub fn dea_default_sets(l: f64) -> BTreeMap<String, SetSpec> {
    let (a, b) = (0.25 * l, 0.75 * l);
    BTreeMap::from([
        (
            "excitation".into(),
            SetSpec::boxed(Some("zmin"), [a, a, f64::NEG_INFINITY], [b, b, f64::INFINITY]),
        ),
        ("ground".into(), SetSpec::face("zmax")),
        ("fix_xyz".into(), SetSpec::point([0.0, 0.0, l])),
        ("fix_yz".into(), SetSpec::point([l, 0.0, l])),
        ("fix_z".into(), SetSpec::point([0.0, l, l])),
    ])
}

fn fixation_bcs() -> Vec<BcSpec> {
    let mut bc: Vec<BcSpec> = DISPLACEMENTS.iter().map(|&d| BcSpec::held("fix_xyz", d, 0.0)).collect();
    bc.push(BcSpec::held("fix_yz", DofKind::Uy, 0.0));
    bc.push(BcSpec::held("fix_yz", DofKind::Uz, 0.0));
    bc.push(BcSpec::held("fix_z", DofKind::Uz, 0.0));
    bc.push(BcSpec::held("ground", DofKind::Potential, 0.0));
    bc
}

/// Load to 100 mV over 50 ms, then unload over 50 ms.
pub fn dea_default_steps() -> BTreeMap<u32, StepSpec> {
    let step = |name: &str, ramp: [[f64; 2]; 2]| {
        let mut bc = fixation_bcs();
        bc.push(BcSpec::ramp("excitation", DofKind::Potential, &ramp));
        StepSpec {
            name: name.into(),
            duration: 50.0,
            bc,
        }
    };
    BTreeMap::from([
        (1, step("load", [[0.0, 0.0], [50.0, 100.0]])),
        (2, step("unload", [[0.0, 100.0], [50.0, 0.0]])),
    ])
}

/// Default node sets of the myocardial cube: fixed top face, the whole mesh,
/// the corner activation box `[0, l/4]³` and the bottom face.
pub fn myo_default_sets(l: f64) -> BTreeMap<String, SetSpec> {
    let q = 0.25 * l;
    BTreeMap::from([
        ("top".into(), SetSpec::face("ymax")),
        ("all".into(), SetSpec::default()),
        ("activation".into(), SetSpec::boxed(None, [0.0; 3], [q; 3])),
        ("bottom".into(), SetSpec::face("ymin")),
    ])
}

/// Polarise at -80 mV (1 ms), excite the activation set at -60 mV (1 ms),
/// then contract freely for 180 ms. The top face is clamped throughout.
pub fn myo_default_steps() -> BTreeMap<u32, StepSpec> {
    let clamp = || -> Vec<BcSpec> { DISPLACEMENTS.iter().map(|&d| BcSpec::held("top", d, 0.0)).collect() };
    let with = |extra: BcSpec| {
        let mut bc = clamp();
        bc.push(extra);
        bc
    };
    BTreeMap::from([
        (
            1,
            StepSpec {
                name: "polarise".into(),
                duration: 1.0,
                bc: with(BcSpec::held("all", DofKind::Potential, -80.0)),
            },
        ),
        (
            2,
            StepSpec {
                name: "excite".into(),
                duration: 1.0,
                bc: with(BcSpec::held("activation", DofKind::Potential, -60.0)),
            },
        ),
        (
            3,
            StepSpec {
                name: "contract".into(),
                duration: 180.0,
                bc: clamp(),
            },
        ),
    ])
}

fn load_mesh(config: &ScenarioConfig) -> Result<Mesh> {
    let mesh = match &config.mesh.file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_mesh(&text)?
        }
        None => generate_cube_mesh(config.mesh.length, config.mesh.nodes_per_edge, config.mesh_kind())?,
    };
    Ok(mesh)
}

fn schedule_from(steps: &BTreeMap<u32, StepSpec>) -> Result<BoundarySchedule> {
    let mut out = Vec::new();
    let mut start = 0.0;
    for (k, s) in steps {
        let constraints = s
            .bc
            .iter()
            .map(|bc| {
                let profile = match bc.value {
                    Some(v) => Profile::constant(v),
                    None => Profile::new(bc.values.iter().map(|[t, v]| (start + t, *v)).collect())?,
                };
                Ok(Constraint::new(bc.set.clone(), bc.dof, profile))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Step {
            name: if s.name.is_empty() { format!("step{k}") } else { s.name.clone() },
            duration: s.duration,
            constraints,
        });
        start += s.duration;
    }
    Ok(BoundarySchedule::new(out))
}

/// Builds mesh, node sets, discretisation and schedule of `config`.
pub fn build_problem(config: &ScenarioConfig) -> Result<Problem> {
    config.validate()?;
    let material = config.material.build(config.scenario)?;
    let mut mesh = load_mesh(config)?;
    let (lo, hi) = mesh.bounds();
    let l = hi.z - lo.z;
    let (mut sets, default_steps, default_output) = match config.scenario {
        ScenarioKind::Dea => (dea_default_sets(l), dea_default_steps(), "excitation"),
        ScenarioKind::Myocardium => (myo_default_sets(l), myo_default_steps(), "bottom"),
    };
    for (name, spec) in &config.sets {
        sets.insert(name.clone(), spec.clone());
    }
    let tol = 1e-9 * (hi - lo).norm();
    for (name, spec) in &sets {
        let nodes = spec.resolve(&mesh, tol)?;
        mesh.add_node_set(name.clone(), nodes)?;
    }
    let steps = if config.steps.is_empty() { &default_steps } else { &config.steps };
    let schedule = schedule_from(steps)?;
    schedule.validate(mesh.node_sets())?;
    let output_set = config.output_set.clone().unwrap_or_else(|| default_output.to_string());
    match mesh.node_sets().get(&output_set) {
        None => return Err(Error::UnknownNodeSet(output_set)),
        Some(n) if n.is_empty() => return Err(Error::EmptyNodeSet(output_set)),
        Some(_) => {}
    }
    let rule = FiberRule {
        length: l,
        sign: config.fiber_sign,
    };
    let disc = Discretisation::new(
        mesh,
        MethodConfig {
            method: config.method,
            material,
        },
        &|x| rule.frame(&(x - lo.coords)),
    )?;
    let initial = disc.initial_state();
    Ok(Problem {
        config: config.clone(),
        disc,
        schedule,
        output_set,
        initial,
    })
}

/// Dielectric elastomer cube problem.
pub fn scenario_dea(config: &ScenarioConfig) -> Result<Problem> {
    if config.scenario != ScenarioKind::Dea {
        return Err(Error::Config("scenario_dea needs scenario = \"dea\"".into()));
    }
    build_problem(config)
}

/// Myocardial cube problem.
pub fn scenario_myo(config: &ScenarioConfig) -> Result<Problem> {
    if config.scenario != ScenarioKind::Myocardium {
        return Err(Error::Config("scenario_myo needs scenario = \"myocardium\"".into()));
    }
    build_problem(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::Method;

    fn small(kind: ScenarioKind, method: Method) -> ScenarioConfig {
        let mut c = ScenarioConfig::new(kind);
        c.method = method;
        c.mesh.nodes_per_edge = 5;
        c
    }

    #[test]
    fn dea_boundary_values() {
        let p = scenario_dea(&small(ScenarioKind::Dea, Method::Tet)).unwrap();
        let sets = p.disc.mesh().node_sets();
        let exc = &sets["excitation"];
        assert_eq!(exc.len(), 9);
        assert!(exc.iter().all(|&n| p.disc.mesh().nodes()[n].z == 0.0));
        for (t, expect) in [(0.0, 0.0), (50.0, 100.0), (75.0, 50.0), (100.0, 0.0)] {
            let step = if t <= 50.0 { 0 } else { 1 };
            let vals = p.schedule.prescribed(step, sets, t).unwrap();
            let dof = 4 * exc[0] + 3;
            let v = vals.iter().rev().find(|(d, _)| *d == dof).unwrap().1;
            assert!((v - expect).abs() < 1e-12, "t={t}: {v}");
        }
        assert_eq!(sets["fix_xyz"].len(), 1);
        assert_eq!(sets["fix_yz"].len(), 1);
        assert_eq!(sets["fix_z"].len(), 1);
        assert_eq!(p.schedule.total_duration(), 100.0);
    }

    #[test]
    fn myo_protocol() {
        let p = scenario_myo(&small(ScenarioKind::Myocardium, Method::Fsns)).unwrap();
        let sets = p.disc.mesh().node_sets();
        assert_eq!(p.schedule.steps.len(), 3);
        let n = p.disc.num_nodes();
        let v1 = p.schedule.prescribed(0, sets, 1.0).unwrap();
        let pot: Vec<_> = v1.iter().filter(|(d, _)| d % 4 == 3).collect();
        assert_eq!(pot.len(), n);
        assert!(pot.iter().all(|(_, v)| *v == -80.0));
        let v2 = p.schedule.prescribed(1, sets, 2.0).unwrap();
        assert!(v2.iter().filter(|(d, _)| d % 4 == 3).all(|(_, v)| *v == -60.0));
        assert_eq!(p.schedule.potential_constraint_count(2), 0);
        assert_eq!(p.schedule.steps[2].duration, 180.0);
        // l/4 = 2.5 with spacing 2.5 on a 5-node edge: 2 nodes per axis
        assert_eq!(sets["activation"].len(), 8);
        assert!(sets["bottom"].iter().all(|&i| p.disc.mesh().nodes()[i].y == 0.0));
    }

    #[test]
    fn wrong_scenario_and_mesh_kinds_are_rejected() {
        assert!(scenario_myo(&small(ScenarioKind::Dea, Method::Tet)).is_err());
        let mut c = small(ScenarioKind::Dea, Method::Tet);
        c.sets.insert("excitation".into(), SetSpec::face("nope"));
        assert!(matches!(build_problem(&c), Err(Error::UnknownNodeSet(_))));
    }
}
