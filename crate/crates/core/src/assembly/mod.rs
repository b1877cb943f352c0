//! Local residuals and tangents on elements and smoothing domains, and their
//! assembly into the global sparse system.
//!
//! Every node carries four unknowns in the order `(u_x, u_y, u_z, φ)`, so node
//! `n` owns global dofs `4n..4n+4`. The sign convention is `K = -∂R/∂x`; a
//! Newton update solves `K Δx = R` and sets `x ← x + Δx`.

mod cells;
mod global;
mod local;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cells::{CellGeometry, CellMember, CellOrigin, Discretisation, SourceCell, StressCell, StressSelection};
pub use global::{assemble, DofMap, GlobalSystem, SparseMatrix, SparsityPattern};
pub use local::{residual_elec, residual_mech, LocalContribution};

use crate::constitutive::{DielectricParams, MyoMaterial};
use crate::error::{Error, Result};

/// Discretisation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tet,
    Fs,
    Ns,
    Fsns,
    Hex,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Tet, Method::Fs, Method::Ns, Method::Fsns, Method::Hex];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Tet => "tet",
            Method::Fs => "fs",
            Method::Ns => "ns",
            Method::Fsns => "fsns",
            Method::Hex => "hex",
        }
    }

    pub fn needs_hex_mesh(&self) -> bool {
        matches!(self, Method::Hex)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tet" => Ok(Method::Tet),
            "fs" => Ok(Method::Fs),
            "ns" => Ok(Method::Ns),
            "fsns" => Ok(Method::Fsns),
            "hex" => Ok(Method::Hex),
            other => Err(Error::Config(format!("unknown method '{other}' (expected tet, fs, ns, fsns or hex)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    Dielectric(DielectricParams),
    Myocardium(MyoMaterial),
}

impl Material {
    pub fn validate(&self) -> Result<()> {
        match self {
            Material::Dielectric(p) => p.validate(),
            Material::Myocardium(p) => p.validate(),
        }
    }

    pub fn is_myocardium(&self) -> bool {
        matches!(self, Material::Myocardium(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub material: Material,
}
