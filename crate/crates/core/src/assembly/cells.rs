use super::global::SparsityPattern;
use super::{Material, Method, MethodConfig};
use crate::constitutive::{active_tension_step, ap_source};
use crate::error::{Error, Result};
use crate::mesh::{HexMesh, HexPoint, Mesh, Point3, TetMesh};
use crate::smoothing::{
    build_element_domains, build_face_domains, build_node_domains, smooth_fiber_frame, DomainKind, FiberFrame,
    SmoothingDomain,
};
use crate::solver::SystemState;
use crate::tensor::Vec3;

/// One element's share of an integration cell, used for the electric field.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMember {
    pub weight: f64,
    /// Positions of the element's nodes in the cell's support.
    pub local: Vec<usize>,
    /// Element-wise `∂N/∂X` of those nodes.
    pub grads: Vec<Vec3>,
}

/// Geometry of an integration cell: an element, a smoothing domain or a Gauss point.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGeometry {
    pub support: Vec<usize>,
    /// Smoothed (or point-wise) `∂N/∂X` per support node.
    pub grads: Vec<Vec3>,
    /// Shape-function values used for the cell's potential.
    pub values: Vec<f64>,
    /// Reference volume (quadrature weight).
    pub volume: f64,
    pub members: Vec<CellMember>,
}

impl CellGeometry {
    pub fn from_domain(d: &SmoothingDomain, mesh: &TetMesh) -> Self {
        CellGeometry {
            support: d.support_nodes.clone(),
            grads: d.smoothed_gradients.clone(),
            values: d.shape_values.clone(),
            volume: d.volume,
            members: d
                .members
                .iter()
                .map(|m| CellMember {
                    weight: m.weight,
                    local: m.local.to_vec(),
                    grads: mesh.gradients(m.element).to_vec(),
                })
                .collect(),
        }
    }

    pub fn from_hex_point(hex: &[usize; 8], p: &HexPoint) -> Self {
        CellGeometry {
            support: hex.to_vec(),
            grads: p.gradients.to_vec(),
            values: p.shape.to_vec(),
            volume: p.weight,
            members: vec![CellMember {
                weight: 1.0,
                local: (0..8).collect(),
                grads: p.gradients.to_vec(),
            }],
        }
    }

    /// Potential of the cell, `Σ N^a φ^a`.
    pub fn potential(&self, phi: &[f64]) -> f64 {
        self.support.iter().zip(&self.values).map(|(&n, &w)| w * phi[n]).sum()
    }
}

/// Which stress parts (and whether the electric flux) a cell integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StressSelection {
    /// Every stress part plus the electric displacement or flux.
    Full,
    /// Active and isochoric stress plus the electric displacement or flux.
    ActiveIsochoric,
    /// Volumetric stress only.
    Volumetric,
}

impl StressSelection {
    pub fn active(&self) -> bool {
        !matches!(self, StressSelection::Volumetric)
    }

    pub fn isochoric(&self) -> bool {
        !matches!(self, StressSelection::Volumetric)
    }

    pub fn volumetric(&self) -> bool {
        !matches!(self, StressSelection::ActiveIsochoric)
    }

    pub fn electric(&self) -> bool {
        !matches!(self, StressSelection::Volumetric)
    }
}

/// What an integration cell was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellOrigin {
    Domain(DomainKind),
    GaussPoint { element: usize, point: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressCell {
    pub geometry: CellGeometry,
    pub selection: StressSelection,
    pub origin: CellOrigin,
    /// Fiber frame of the myocardium.
    pub frame: Option<FiberFrame>,
}

/// Transient and source integration point of the myocardium (always on the
/// background elements).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCell {
    pub nodes: Vec<usize>,
    /// Consistent mass contribution, row-major `n × n`.
    pub mass: Vec<f64>,
    /// Source weight per node.
    pub weights: Vec<f64>,
    /// Shape values at the evaluation point.
    pub shape: Vec<f64>,
}

impl SourceCell {
    fn tet(nodes: [usize; 4], volume: f64) -> Self {
        let mass = (0..16)
            .map(|k| volume / 20.0 * if k / 4 == k % 4 { 2.0 } else { 1.0 })
            .collect();
        SourceCell {
            nodes: nodes.to_vec(),
            mass,
            weights: vec![volume / 4.0; 4],
            shape: vec![0.25; 4],
        }
    }

    fn hex_point(hex: &[usize; 8], p: &HexPoint) -> Self {
        let mass = (0..64).map(|k| p.shape[k / 8] * p.shape[k % 8] * p.weight).collect();
        SourceCell {
            nodes: hex.to_vec(),
            mass,
            weights: p.shape.iter().map(|n| n * p.weight).collect(),
            shape: p.shape.to_vec(),
        }
    }

    pub fn potential(&self, phi: &[f64]) -> f64 {
        self.nodes.iter().zip(&self.shape).map(|(&n, &w)| w * phi[n]).sum()
    }
}

/// All integration cells of one method on one mesh, built once.
#[derive(Debug, Clone)]
pub struct Discretisation {
    config: MethodConfig,
    mesh: Mesh,
    stress_cells: Vec<StressCell>,
    source_cells: Vec<SourceCell>,
    pattern: SparsityPattern,
}

impl Discretisation {
    /// Builds the cells of `config.method`. `fibers` gives the local fiber frame at
    /// a material point and is only consulted for the myocardium.
    pub fn new(mesh: Mesh, config: MethodConfig, fibers: &dyn Fn(&Point3) -> FiberFrame) -> Result<Self> {
        config.material.validate()?;
        let myo = config.material.is_myocardium();
        let (stress_cells, source_cells) = match (&mesh, config.method) {
            (Mesh::Hex(h), Method::Hex) => hex_cells(h, myo, fibers),
            (Mesh::Tet(t), m) if m != Method::Hex => tet_cells(t, m, myo, fibers)?,
            (mesh, method) => {
                return Err(Error::MethodMeshMismatch {
                    method: method.to_string(),
                    mesh: mesh.kind_name().to_string(),
                })
            }
        };
        let pattern = SparsityPattern::new(
            mesh.nodes().len(),
            stress_cells
                .iter()
                .map(|c| c.geometry.support.as_slice())
                .chain(source_cells.iter().map(|c| c.nodes.as_slice())),
        );
        Ok(Discretisation {
            config,
            mesh,
            stress_cells,
            source_cells,
            pattern,
        })
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }

    pub fn method(&self) -> Method {
        self.config.method
    }

    pub fn material(&self) -> &Material {
        &self.config.material
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.nodes().len()
    }

    pub fn num_dofs(&self) -> usize {
        4 * self.num_nodes()
    }

    pub fn stress_cells(&self) -> &[StressCell] {
        &self.stress_cells
    }

    pub fn source_cells(&self) -> &[SourceCell] {
        &self.source_cells
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    /// Number of stress cells built from domains of the given kind.
    pub fn count_cells(&self, pred: impl Fn(&CellOrigin) -> bool) -> usize {
        self.stress_cells.iter().filter(|c| pred(&c.origin)).count()
    }

    /// A zero state sized for this discretisation.
    pub fn initial_state(&self) -> SystemState {
        SystemState::new(self.num_nodes(), self.stress_cells.len(), self.source_cells.len())
    }

    /// Advances the myocardium history variables with the converged potential
    /// and snapshots `φ_n ← φ`.
    pub fn advance_history(&self, state: &mut SystemState, dt: f64) {
        if let Material::Myocardium(p) = &self.config.material {
            for (cell, t) in self.stress_cells.iter().zip(state.tension.iter_mut()) {
                if cell.selection.active() {
                    *t = active_tension_step(*t, cell.geometry.potential(&state.phi), dt, &p.active).0;
                }
            }
            for (cell, r) in self.source_cells.iter().zip(state.recovery.iter_mut()) {
                *r = ap_source(cell.potential(&state.phi), *r, dt, &p.ap).r_next;
            }
        }
        state.phi_n.clone_from(&state.phi);
    }
}

fn tet_cells(
    mesh: &TetMesh,
    method: Method,
    myo: bool,
    fibers: &dyn Fn(&Point3) -> FiberFrame,
) -> Result<(Vec<StressCell>, Vec<SourceCell>)> {
    let element_frames: Vec<FiberFrame> = if myo {
        (0..mesh.num_elements()).map(|e| fibers(&mesh.centroid(e))).collect()
    } else {
        Vec::new()
    };
    let make = |domains: Vec<SmoothingDomain>, selection: StressSelection| -> Result<Vec<StressCell>> {
        domains
            .iter()
            .map(|d| {
                let frame = if myo && selection.active() {
                    Some(smooth_fiber_frame(d, &element_frames)?)
                } else {
                    None
                };
                Ok(StressCell {
                    geometry: CellGeometry::from_domain(d, mesh),
                    selection,
                    origin: CellOrigin::Domain(d.kind),
                    frame,
                })
            })
            .collect()
    };
    let stress = match method {
        Method::Tet => make(build_element_domains(mesh), StressSelection::Full)?,
        Method::Fs => make(build_face_domains(mesh)?, StressSelection::Full)?,
        Method::Ns => make(build_node_domains(mesh), StressSelection::Full)?,
        Method::Fsns => {
            let mut cells = make(build_face_domains(mesh)?, StressSelection::ActiveIsochoric)?;
            cells.extend(make(build_node_domains(mesh), StressSelection::Volumetric)?);
            cells
        }
        Method::Hex => unreachable!("checked by the caller"),
    };
    let source = if myo {
        (0..mesh.num_elements())
            .map(|e| SourceCell::tet(mesh.tets()[e], mesh.volumes()[e]))
            .collect()
    } else {
        Vec::new()
    };
    Ok((stress, source))
}

fn hex_cells(mesh: &HexMesh, myo: bool, fibers: &dyn Fn(&Point3) -> FiberFrame) -> (Vec<StressCell>, Vec<SourceCell>) {
    let mut stress = Vec::with_capacity(8 * mesh.num_elements());
    let mut source = Vec::new();
    for (e, hex) in mesh.hexes().iter().enumerate() {
        for (q, p) in mesh.gauss_points(e).iter().enumerate() {
            stress.push(StressCell {
                geometry: CellGeometry::from_hex_point(hex, p),
                selection: StressSelection::Full,
                origin: CellOrigin::GaussPoint { element: e, point: q },
                frame: myo.then(|| fibers(&p.position)),
            });
            if myo {
                source.push(SourceCell::hex_point(hex, p));
            }
        }
    }
    (stress, source)
}
