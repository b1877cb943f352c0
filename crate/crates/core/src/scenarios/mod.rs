//! Benchmark problems, structured cube meshes, fiber rule and output files.

mod config;
mod cube;
mod fibers;
mod output;
mod problem;
mod run;

pub use config::{BcSpec, MaterialSpec, MeshSpec, NewtonSpec, ScenarioConfig, ScenarioKind, SetSpec, StepSpec};
pub use cube::{cube_hex_mesh, cube_tet_mesh, generate_cube_mesh, MeshKind, FACE_SETS};
pub use fibers::{fiber_rule, FiberRule};
pub use output::{
    avg_surface_displacement, mean_relative_error, vtk_string, write_vtk, OutputCurve, CSV_HEADER, REFERENCE_FLOOR,
};
pub use problem::{
    build_problem, dea_default_sets, dea_default_steps, myo_default_sets, myo_default_steps, scenario_dea,
    scenario_myo, Problem,
};
pub use run::{run_problem, RunOutput};
