//! Face- and node-based smoothing domains and the smoothed field operators.
//!
//! For linear tetrahedra every element contributes one quarter of its volume to
//! each of its four faces and to each of its four nodes, so a smoothing domain
//! is fully described by its adjacent elements and their quarter-volume weights.
//! All smoothed quantities are the volume-weighted means of the element-wise
//! quantities of the adjacent elements.

use std::fmt::Write;
use std::ops::{Add, Mul};

use crate::error::{Error, MeshError, Result};
use crate::mesh::{extract_faces, node_incidence, FaceKey, TetMesh};
use crate::tensor::{Mat3, Vec3};

/// What a domain is centred on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// A whole tetrahedron (standard FEM evaluation).
    Element(usize),
    Face(FaceKey),
    Node(usize),
}

/// One element's share of a smoothing domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMember {
    pub element: usize,
    /// Fraction of the domain volume contributed by this element.
    pub weight: f64,
    /// Positions of the element's four nodes in `support_nodes`.
    pub local: [usize; 4],
}

#[derive(Debug, Clone)]
pub struct SmoothingDomain {
    pub kind: DomainKind,
    pub volume: f64,
    /// Union of the adjacent elements' nodes, ascending.
    pub support_nodes: Vec<usize>,
    /// Smoothed `∂N^a/∂X` for every support node.
    pub smoothed_gradients: Vec<Vec3>,
    /// Smoothed shape-function value of every support node (weights of `u^k`, `φ^k`).
    pub shape_values: Vec<f64>,
    pub members: Vec<DomainMember>,
}

impl SmoothingDomain {
    fn from_quarters(kind: DomainKind, mesh: &TetMesh, elements: &[usize], fraction: f64) -> Self {
        let mut support: Vec<usize> = elements.iter().flat_map(|&e| mesh.tets()[e]).collect();
        support.sort_unstable();
        support.dedup();
        let volume: f64 = elements.iter().map(|&e| fraction * mesh.volumes()[e]).sum();
        let mut gradients = vec![Vec3::zeros(); support.len()];
        let mut values = vec![0.0; support.len()];
        let members = elements
            .iter()
            .map(|&e| {
                let weight = fraction * mesh.volumes()[e] / volume;
                let local = mesh.tets()[e].map(|n| support.binary_search(&n).expect("node in support"));
                for (a, &l) in local.iter().enumerate() {
                    gradients[l] += mesh.gradients(e)[a] * weight;
                    values[l] += 0.25 * weight;
                }
                DomainMember {
                    element: e,
                    weight,
                    local,
                }
            })
            .collect();
        SmoothingDomain {
            kind,
            volume,
            support_nodes: support,
            smoothed_gradients: gradients,
            shape_values: values,
            members,
        }
    }

    pub fn adjacent_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|m| m.element)
    }

    pub fn num_adjacent(&self) -> usize {
        self.members.len()
    }
}

/// One domain per element (the standard FEM integration cell).
pub fn build_element_domains(mesh: &TetMesh) -> Vec<SmoothingDomain> {
    (0..mesh.num_elements())
        .map(|e| SmoothingDomain::from_quarters(DomainKind::Element(e), mesh, &[e], 1.0))
        .collect()
}

/// One domain per mesh face, ordered by face key.
pub fn build_face_domains(mesh: &TetMesh) -> Result<Vec<SmoothingDomain>, MeshError> {
    Ok(extract_faces(mesh)?
        .into_iter()
        .map(|(key, elems)| SmoothingDomain::from_quarters(DomainKind::Face(key), mesh, &elems, 0.25))
        .collect())
}

/// One domain per mesh node; nodes without elements get no domain.
pub fn build_node_domains(mesh: &TetMesh) -> Vec<SmoothingDomain> {
    node_incidence(mesh)
        .into_iter()
        .enumerate()
        .filter(|(_, elems)| !elems.is_empty())
        .map(|(n, elems)| SmoothingDomain::from_quarters(DomainKind::Node(n), mesh, &elems, 0.25))
        .collect()
}

/// `F^e = I + Σ_a u^a ⊗ ∂N^a/∂X` of a tetrahedron.
pub fn element_deformation_gradient(mesh: &TetMesh, e: usize, u: &[Vec3]) -> Mat3 {
    let g = mesh.gradients(e);
    mesh.tets()[e]
        .iter()
        .zip(g)
        .fold(Mat3::identity(), |f, (&n, grad)| f + u[n] * grad.transpose())
}

/// Smoothed deformation gradient `F^k`; `u` is indexed by global node.
pub fn smooth_deformation_gradient(domain: &SmoothingDomain, u: &[Vec3]) -> Result<Mat3> {
    let f = domain
        .support_nodes
        .iter()
        .zip(&domain.smoothed_gradients)
        .fold(Mat3::identity(), |f, (&n, g)| f + u[n] * g.transpose());
    let det = f.determinant();
    if !(det > 0.0) {
        return Err(Error::Inverted {
            cell: domain_index(domain),
            det,
        });
    }
    Ok(f)
}

fn domain_index(domain: &SmoothingDomain) -> usize {
    match domain.kind {
        DomainKind::Element(e) | DomainKind::Node(e) => e,
        DomainKind::Face(_) => domain.members[0].element,
    }
}

/// Smoothed spatial electric field `E^k`, the weighted mean of the element
/// fields `-F^{e,-T} Σ φ^a ∂N^a/∂X`. `element_f` holds `F^e` for every element.
pub fn smooth_electric_field(
    domain: &SmoothingDomain,
    mesh: &TetMesh,
    phi: &[f64],
    element_f: &[Mat3],
) -> Result<Vec3> {
    let mut e_k = Vec3::zeros();
    for m in &domain.members {
        let finv_t = element_f[m.element]
            .try_inverse()
            .ok_or(Error::SingularDeformation)?
            .transpose();
        let grad_phi = mesh.tets()[m.element]
            .iter()
            .zip(mesh.gradients(m.element))
            .fold(Vec3::zeros(), |s, (&n, g)| s + g * phi[n]);
        e_k -= finv_t * grad_phi * m.weight;
    }
    Ok(e_k)
}

/// Smoothed solution value `u^k` or `φ^k` of a nodal field.
pub fn smooth_nodal_average<T>(domain: &SmoothingDomain, field: &[T]) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut it = domain.support_nodes.iter().zip(&domain.shape_values);
    let (&n0, &w0) = it.next().expect("domain has support nodes");
    it.fold(field[n0] * w0, |acc, (&n, &w)| acc + field[n] * w)
}

/// Local fiber, sheet and sheet-normal directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberFrame {
    pub f0: Vec3,
    pub s0: Vec3,
    pub n0: Vec3,
}

impl FiberFrame {
    /// Orthonormal frame from a fiber and a sheet direction: `f` is normalised,
    /// `s` is orthogonalised against it, `n = f × s`.
    pub fn from_fiber_sheet(f: Vec3, s: Vec3) -> Result<Self> {
        let fn_ = f.norm();
        if fn_ < 1e-8 {
            return Err(Error::AntipodalFibers);
        }
        let f0 = f / fn_;
        let s_perp = s - f0 * f0.dot(&s);
        let sn = s_perp.norm();
        if sn < 1e-8 {
            return Err(Error::AntipodalFibers);
        }
        let s0 = s_perp / sn;
        Ok(FiberFrame {
            f0,
            s0,
            n0: f0.cross(&s0),
        })
    }

    /// Largest deviation from an orthonormal basis.
    pub fn orthonormality_defect(&self) -> f64 {
        [
            (self.f0.norm() - 1.0).abs(),
            (self.s0.norm() - 1.0).abs(),
            (self.n0.norm() - 1.0).abs(),
            self.f0.dot(&self.s0).abs(),
            self.f0.dot(&self.n0).abs(),
            self.s0.dot(&self.n0).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Arithmetic mean of frames, re-orthonormalised.
pub fn average_frames<'a>(frames: impl IntoIterator<Item = &'a FiberFrame>) -> Result<FiberFrame> {
    let mut f = Vec3::zeros();
    let mut s = Vec3::zeros();
    let mut count = 0usize;
    for fr in frames {
        f += fr.f0;
        s += fr.s0;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidParameter("no frames to average".into()));
    }
    let inv = 1.0 / count as f64;
    FiberFrame::from_fiber_sheet(f * inv, s * inv)
}

/// Domain frame from the frames of its adjacent elements (indexed by element id).
pub fn smooth_fiber_frame(domain: &SmoothingDomain, element_frames: &[FiberFrame]) -> Result<FiberFrame> {
    average_frames(domain.adjacent_elements().map(|e| &element_frames[e]))
}

/// Debug table of domains: key, volume, adjacency and smoothed gradients.
pub fn domains_to_csv(domains: &[SmoothingDomain]) -> String {
    let mut out = String::from("kind,key,volume,elements,node,dNdX,dNdY,dNdZ\n");
    for d in domains {
        let (kind, key) = match d.kind {
            DomainKind::Element(e) => ("element", e.to_string()),
            DomainKind::Face(k) => {
                let [a, b, c] = k.nodes();
                ("face", format!("{a} {b} {c}"))
            }
            DomainKind::Node(n) => ("node", n.to_string()),
        };
        let elems: Vec<String> = d.adjacent_elements().map(|e| e.to_string()).collect();
        for (n, g) in d.support_nodes.iter().zip(&d.smoothed_gradients) {
            writeln!(
                out,
                "{kind},{key},{},{},{n},{},{},{}",
                d.volume,
                elems.join(" "),
                g.x,
                g.y,
                g.z
            )
            .unwrap();
        }
    }
    out
}
