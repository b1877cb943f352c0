//! Nonlinear finite elements for electromechanically coupled soft materials.
//!
//! The crate solves the coupled displacement/potential problem for two material
//! families (an ideal dielectric elastomer and an active, orthotropic
//! myocardium) on linear tetrahedral meshes with four discretisations:
//!
//! * `Tet` - standard element-wise evaluation,
//! * `Fs` - face-based smoothed FEM,
//! * `Ns` - node-based smoothed FEM,
//! * `Fsns` - selective face/node smoothing (volumetric stress on node domains,
//!   everything else on face domains),
//!
//! plus a fully integrated trilinear hexahedral reference (`Hex`).
//!
//! Module map:
//!
//! * [`mesh`] - mesh types, parsing, geometric primitives, incidence maps.
//! * [`smoothing`] - face/node smoothing domains and smoothed field operators.
//! * [`constitutive`] - stresses, fluxes, active tension, excitation source and tangents.
//! * [`assembly`] - local residual/tangent evaluation and global sparse assembly.
//! * [`solver`] - Newton-Raphson, implicit time stepping, sparse direct solves.
//! * [`scenarios`] - benchmark cubes, fiber rule, metrics, config, file writers.
//! * [`verify`] - volume, patch and tangent self-check suites.

pub mod assembly;
pub mod constitutive;
mod error;
pub mod mesh;
pub mod scenarios;
pub mod smoothing;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use error::{Error, MeshError, Result};

pub use assembly::{assemble, Discretisation, GlobalSystem, Material, Method, MethodConfig};
pub use constitutive::{
    ActiveParams, ApParams, DielectricParams, HoParams, KinematicState, MyoHistory, MyoMaterial,
};
pub use mesh::{FaceKey, HexMesh, Mesh, Point3, TetMesh};
pub use smoothing::{DomainKind, FiberFrame, SmoothingDomain};
pub use solver::{BoundarySchedule, NewtonSettings, SystemState};
pub use scenarios::{OutputCurve, Problem, ScenarioConfig, ScenarioKind};
