//! Fixtures shared by the benchmarks.

use esfem::assembly::{assemble, DofMap};
use esfem::scenarios::{build_problem, Problem};
use esfem::{Method, ScenarioConfig, ScenarioKind, SystemState};

/// A benchmark problem on a cube with `nodes_per_edge` nodes per edge.
pub fn problem(kind: ScenarioKind, method: Method, nodes_per_edge: usize) -> Problem {
    let mut cfg = ScenarioConfig::new(kind);
    cfg.method = method;
    cfg.mesh.nodes_per_edge = nodes_per_edge;
    build_problem(&cfg).expect("default scenario builds")
}

/// The problem's initial state with the first step's boundary values applied
/// at its end time, and the matching dof map.
pub fn loaded_state(p: &Problem) -> (SystemState, DofMap) {
    let sets = p.disc.mesh().node_sets();
    let mut state = p.initial.clone();
    let dofs = p.schedule.dof_map(0, sets, p.disc.num_nodes()).expect("dof map");
    let t = p.schedule.steps[0].duration;
    for (dof, v) in p.schedule.prescribed(0, sets, t).expect("prescribed values") {
        state.set_dof(dof, v);
    }
    (state, dofs)
}

/// Sanity check used by the benches before timing anything.
pub fn residual_norm(p: &Problem) -> f64 {
    let (state, dofs) = loaded_state(p);
    assemble(&p.disc, &state, 1.0, &dofs).expect("assembles").residual_norm()
}
