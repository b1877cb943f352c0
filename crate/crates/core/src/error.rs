use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems found while reading or validating a mesh.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: malformed line: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate node index {id}")]
    DuplicateNode { line: usize, id: usize },
    #[error("line {line}: out-of-range connectivity: node {id} (mesh has {count} nodes)")]
    OutOfRange { line: usize, id: usize, count: usize },
    #[error("line {line}: non-positive element volume in element {element}")]
    NonPositiveVolume { line: usize, element: usize },
    #[error("line {line}: element {element} repeats node {id}")]
    RepeatedNode { line: usize, element: usize, id: usize },
    #[error("line {line}: missing node {id}")]
    MissingNode { line: usize, id: usize },
    #[error("degenerate (coplanar) tetrahedron")]
    Degenerate,
    #[error("non-manifold mesh: face {face:?} shared by {count} elements")]
    NonManifold { face: [usize; 3], count: usize },
    #[error("hexahedron {element} has a non-positive Jacobian at a Gauss point")]
    NegativeJacobian { element: usize },
    #[error("mesh contains no elements")]
    Empty,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("inverted smoothing domain or element {cell}: det F = {det:e}")]
    Inverted { cell: usize, det: f64 },
    #[error("singular deformation gradient")]
    SingularDeformation,
    #[error("antipodal fiber directions cannot be averaged")]
    AntipodalFibers,
    #[error("time increment must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("method {method} cannot run on a {mesh} mesh")]
    MethodMeshMismatch { method: String, mesh: String },
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("step {step} (t = {time} ms) failed: {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("singular system matrix")]
    SingularMatrix,
    #[error("unknown node set '{0}'")]
    UnknownNodeSet(String),
    #[error("node set '{0}' is empty")]
    EmptyNodeSet(String),
    #[error("time grids do not match: {0}")]
    TimeGridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Errors caused by the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Inverted { .. }
            | Error::SingularDeformation
            | Error::NonConvergence { .. }
            | Error::SingularMatrix => true,
            Error::StepFailed { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
