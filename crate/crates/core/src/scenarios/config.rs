use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::cube::MeshKind;
use crate::assembly::{Material, Method};
use crate::constitutive::{DielectricParams, MyoMaterial};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point3};
use crate::solver::{DofKind, NewtonSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Dea,
    Myocardium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    /// Cube edge length [mm].
    pub length: f64,
    pub nodes_per_edge: usize,
    /// Mesh file used instead of the generated cube.
    pub file: Option<PathBuf>,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec {
            length: 10.0,
            nodes_per_edge: 6,
            file: None,
        }
    }
}

/// Node-set definition. `nodes` (1-based ids) wins; otherwise the nodes of
/// `face` (or the whole mesh) that fall inside the closed box `min`..`max`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetSpec {
    pub face: Option<String>,
    pub min: Option<[f64; 3]>,
    pub max: Option<[f64; 3]>,
    pub nodes: Option<Vec<usize>>,
}

impl SetSpec {
    pub fn face(name: &str) -> Self {
        SetSpec {
            face: Some(name.into()),
            ..Self::default()
        }
    }

    pub fn boxed(face: Option<&str>, min: [f64; 3], max: [f64; 3]) -> Self {
        SetSpec {
            face: face.map(Into::into),
            min: Some(min),
            max: Some(max),
            nodes: None,
        }
    }

    pub fn point(p: [f64; 3]) -> Self {
        Self::boxed(None, p, p)
    }

    /// Resolves the set on `mesh`; `tol` is the coordinate tolerance of the box.
    pub fn resolve(&self, mesh: &Mesh, tol: f64) -> Result<Vec<usize>> {
        let n = mesh.nodes().len();
        if let Some(ids) = &self.nodes {
            return ids
                .iter()
                .map(|&i| {
                    if i == 0 || i > n {
                        Err(Error::Config(format!("node id {i} out of range 1..={n}")))
                    } else {
                        Ok(i - 1)
                    }
                })
                .collect();
        }
        let candidates: Vec<usize> = match &self.face {
            Some(f) => mesh
                .node_sets()
                .get(f)
                .ok_or_else(|| Error::UnknownNodeSet(f.clone()))?
                .clone(),
            None => (0..n).collect(),
        };
        let inside = |p: &Point3| {
            let lo = self.min.unwrap_or([f64::NEG_INFINITY; 3]);
            let hi = self.max.unwrap_or([f64::INFINITY; 3]);
            (0..3).all(|i| p[i] >= lo[i] - tol && p[i] <= hi[i] + tol)
        };
        Ok(candidates.into_iter().filter(|&i| inside(&mesh.nodes()[i])).collect())
    }
}

/// One Dirichlet condition of a step. Profile times are relative to the step start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSpec {
    pub set: String,
    pub dof: DofKind,
    /// `[[t, value], ...]`, or a single value held over the step.
    #[serde(default)]
    pub values: Vec<[f64; 2]>,
    pub value: Option<f64>,
}

impl BcSpec {
    pub fn held(set: &str, dof: DofKind, v: f64) -> Self {
        BcSpec {
            set: set.into(),
            dof,
            values: Vec::new(),
            value: Some(v),
        }
    }

    pub fn ramp(set: &str, dof: DofKind, points: &[[f64; 2]]) -> Self {
        BcSpec {
            set: set.into(),
            dof,
            values: points.to_vec(),
            value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    #[serde(default)]
    pub name: String,
    /// [ms]
    pub duration: f64,
    #[serde(default)]
    pub bc: Vec<BcSpec>,
}

/// Material section. Dielectric keys: `mu`, `lambda`, `eps`. Myocardium keys:
/// `conductivity` and the sub-tables `ho`, `active`, `ap`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialSpec {
    pub mu: Option<f64>,
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    pub conductivity: Option<f64>,
    pub ho: Option<toml::Table>,
    pub active: Option<toml::Table>,
    pub ap: Option<toml::Table>,
}

fn sub_table<T: for<'de> Deserialize<'de>>(t: &Option<toml::Table>, name: &str, default: T) -> Result<T> {
    match t {
        None => Ok(default),
        Some(t) => t
            .clone()
            .try_into()
            .map_err(|e| Error::Config(format!("[material.{name}]: {e}"))),
    }
}

impl MaterialSpec {
    pub fn build(&self, kind: ScenarioKind) -> Result<Material> {
        let m = match kind {
            ScenarioKind::Dea => {
                if self.conductivity.is_some() || self.ho.is_some() || self.active.is_some() || self.ap.is_some() {
                    return Err(Error::Config("myocardium keys in a dielectric [material] section".into()));
                }
                let d = DielectricParams::default();
                Material::Dielectric(DielectricParams::from_lame(
                    self.mu.unwrap_or(d.mu),
                    self.lambda.unwrap_or(d.lambda),
                    self.eps.unwrap_or(d.eps),
                ))
            }
            ScenarioKind::Myocardium => {
                if self.mu.is_some() || self.lambda.is_some() || self.eps.is_some() {
                    return Err(Error::Config("dielectric keys in a myocardium [material] section".into()));
                }
                let d = MyoMaterial::default();
                Material::Myocardium(MyoMaterial {
                    ho: sub_table(&self.ho, "ho", d.ho)?,
                    active: sub_table(&self.active, "active", d.active)?,
                    ap: sub_table(&self.ap, "ap", d.ap)?,
                    conductivity: self.conductivity.unwrap_or(d.conductivity),
                })
            }
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSpec {
    fn default() -> Self {
        let d = NewtonSettings::default();
        NewtonSpec {
            abs_tol: d.abs_tol,
            rel_tol: d.rel_tol,
            max_iter: d.max_iter,
        }
    }
}

/// Everything needed to run one benchmark. Unset sets and steps fall back to
/// the scenario defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default = "default_method")]
    pub method: Method,
    /// [ms]
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// [ms]
    #[serde(default = "default_output_interval")]
    pub output_interval: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Node set whose mean displacement magnitude forms the output curve.
    #[serde(default)]
    pub output_set: Option<String>,
    /// Rotation sense of the fiber rule (`1` or `-1`).
    #[serde(default = "default_fiber_sign")]
    pub fiber_sign: f64,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default)]
    pub material: MaterialSpec,
    #[serde(default)]
    pub newton: NewtonSpec,
    #[serde(default)]
    pub sets: BTreeMap<String, SetSpec>,
    /// Keyed by step number; run in ascending order.
    #[serde(default)]
    pub steps: BTreeMap<u32, StepSpec>,
}

fn default_method() -> Method {
    Method::Fsns
}

fn default_dt() -> f64 {
    1.0
}

fn default_output_interval() -> f64 {
    5.0
}

fn default_fiber_sign() -> f64 {
    1.0
}

impl ScenarioConfig {
    /// Default configuration of a benchmark.
    pub fn new(scenario: ScenarioKind) -> Self {
        ScenarioConfig {
            scenario,
            method: default_method(),
            dt: default_dt(),
            output_interval: default_output_interval(),
            output_dir: None,
            output_set: None,
            fiber_sign: default_fiber_sign(),
            mesh: MeshSpec::default(),
            material: MaterialSpec::default(),
            newton: NewtonSpec::default(),
            sets: BTreeMap::new(),
            steps: BTreeMap::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::from_toml(&text)?;
        if let Some(f) = &c.mesh.file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    c.mesh.file = Some(dir.join(f));
                }
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        if !(self.output_interval > 0.0) {
            return Err(Error::Config("output_interval must be positive".into()));
        }
        if self.fiber_sign.abs() != 1.0 {
            return Err(Error::Config("fiber_sign must be 1 or -1".into()));
        }
        if !(self.mesh.length > 0.0) || self.mesh.nodes_per_edge < 2 {
            return Err(Error::Config("mesh needs length > 0 and nodes_per_edge >= 2".into()));
        }
        for (k, s) in &self.steps {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::Config(format!("step {k} needs a positive duration")));
            }
            for bc in &s.bc {
                if bc.values.is_empty() == bc.value.is_none() {
                    return Err(Error::Config(format!(
                        "step {k}, set '{}': give exactly one of `value` or `values`",
                        bc.set
                    )));
                }
            }
        }
        self.material.build(self.scenario)?;
        Ok(())
    }

    pub fn mesh_kind(&self) -> MeshKind {
        if self.method.needs_hex_mesh() {
            MeshKind::Hex
        } else {
            MeshKind::Tet
        }
    }
}
