//! Tetrahedral and hexahedral meshes, geometric primitives and incidence maps.
//!
//! Meshes are immutable after construction. Tetrahedra are stored with
//! positive orientation; a negatively oriented input tet has its last two nodes
//! swapped on ingestion.

mod hex;
mod parse;

use std::collections::BTreeMap;

use crate::error::MeshError;
use crate::tensor::Vec3;

pub use hex::{hex_shape, HexMesh, HexPoint, HEX_CORNERS, HEX_GAUSS_POINTS};
pub use parse::{format_mesh, parse_mesh};

pub type Point3 = nalgebra::Point3<f64>;

/// Relative threshold below which a tetrahedron counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Named node-index sets, ordered by name.
pub type NodeSets = BTreeMap<String, Vec<usize>>;

/// Six times the signed volume of the tetrahedron `(p0, p1, p2, p3)`.
pub fn signed_volume6(p0: &Point3, p1: &Point3, p2: &Point3, p3: &Point3) -> f64 {
    let a = p1 - p0;
    let b = p2 - p0;
    let c = p3 - p0;
    a.dot(&b.cross(&c))
}

/// Unsigned tetrahedron volume; coplanar configurations are rejected.
pub fn tet_volume(p0: &Point3, p1: &Point3, p2: &Point3, p3: &Point3) -> Result<f64, MeshError> {
    let v = signed_volume6(p0, p1, p2, p3).abs() / 6.0;
    let mut lo = *p0;
    let mut hi = *p0;
    for p in [p1, p2, p3] {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = (hi - lo).amax();
    if !(v > DEGENERACY_TOL * extent.powi(3)) {
        return Err(MeshError::Degenerate);
    }
    Ok(v)
}

/// Canonical face identity: the three node indices in strictly increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaceKey([usize; 3]);

impl FaceKey {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        let mut k = [a, b, c];
        k.sort_unstable();
        FaceKey(k)
    }

    pub fn nodes(&self) -> [usize; 3] {
        self.0
    }
}

/// Local node triples of the four faces of a tetrahedron (face `i` is opposite node `i`).
pub const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

#[derive(Debug, Clone)]
pub struct TetMesh {
    nodes: Vec<Point3>,
    tets: Vec<[usize; 4]>,
    node_sets: NodeSets,
    volumes: Vec<f64>,
    gradients: Vec<[Vec3; 4]>,
}

impl TetMesh {
    /// Validates connectivity, fixes orientation and precomputes volumes and
    /// shape-function gradients.
    pub fn new(nodes: Vec<Point3>, tets: Vec<[usize; 4]>, node_sets: NodeSets) -> Result<Self, MeshError> {
        Self::build(nodes, tets, node_sets, None)
    }

    /// Like [`TetMesh::new`], reporting element errors against source line numbers.
    pub(crate) fn build(
        nodes: Vec<Point3>,
        mut tets: Vec<[usize; 4]>,
        node_sets: NodeSets,
        lines: Option<&[usize]>,
    ) -> Result<Self, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }
        let line_of = |e: usize| lines.map_or(0, |l| l[e]);
        let n = nodes.len();
        let mut volumes = Vec::with_capacity(tets.len());
        for (e, tet) in tets.iter_mut().enumerate() {
            for (a, &id) in tet.iter().enumerate() {
                if id >= n {
                    return Err(MeshError::OutOfRange {
                        line: line_of(e),
                        id: id + 1,
                        count: n,
                    });
                }
                if tet[..a].contains(&id) {
                    return Err(MeshError::RepeatedNode {
                        line: line_of(e),
                        element: e + 1,
                        id: id + 1,
                    });
                }
            }
            let [p0, p1, p2, p3] = tet.map(|i| nodes[i]);
            let v = tet_volume(&p0, &p1, &p2, &p3).map_err(|_| MeshError::NonPositiveVolume {
                line: line_of(e),
                element: e + 1,
            })?;
            if signed_volume6(&p0, &p1, &p2, &p3) < 0.0 {
                tet.swap(2, 3);
            }
            volumes.push(v);
        }
        check_node_sets(&node_sets, n)?;
        let gradients = tets
            .iter()
            .map(|t| tet_gradients(&t.map(|i| nodes[i])))
            .collect();
        Ok(TetMesh {
            nodes,
            tets,
            node_sets,
            volumes,
            gradients,
        })
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.tets.len()
    }

    /// Material shape-function gradients `∂N^a/∂X` of element `e` (constant per linear tet).
    pub fn gradients(&self, e: usize) -> &[Vec3; 4] {
        &self.gradients[e]
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn centroid(&self, e: usize) -> Point3 {
        let t = &self.tets[e];
        let s = t.iter().fold(Vec3::zeros(), |acc, &i| acc + self.nodes[i].coords);
        Point3::from(s / 4.0)
    }

    pub fn node_sets(&self) -> &NodeSets {
        &self.node_sets
    }

    pub fn node_set(&self, name: &str) -> Option<&[usize]> {
        self.node_sets.get(name).map(Vec::as_slice)
    }

    pub fn add_node_set(&mut self, name: impl Into<String>, nodes: Vec<usize>) -> Result<(), MeshError> {
        if let Some(&bad) = nodes.iter().find(|&&i| i >= self.nodes.len()) {
            return Err(MeshError::OutOfRange {
                line: 0,
                id: bad + 1,
                count: self.nodes.len(),
            });
        }
        self.node_sets.insert(name.into(), nodes);
        Ok(())
    }
}

fn check_node_sets(sets: &NodeSets, n: usize) -> Result<(), MeshError> {
    for ids in sets.values() {
        if let Some(&bad) = ids.iter().find(|&&i| i >= n) {
            return Err(MeshError::OutOfRange {
                line: 0,
                id: bad + 1,
                count: n,
            });
        }
    }
    Ok(())
}

/// Constant gradients of the four linear shape functions of a positively oriented tet.
pub fn tet_gradients(p: &[Point3; 4]) -> [Vec3; 4] {
    let a = p[1] - p[0];
    let b = p[2] - p[0];
    let c = p[3] - p[0];
    let det = a.dot(&b.cross(&c));
    // rows of the inverse Jacobian
    let g1 = b.cross(&c) / det;
    let g2 = c.cross(&a) / det;
    let g3 = a.cross(&b) / det;
    [-(g1 + g2 + g3), g1, g2, g3]
}

/// Every face of the mesh with its adjacent elements, ordered by [`FaceKey`].
pub fn extract_faces(mesh: &TetMesh) -> Result<Vec<(FaceKey, Vec<usize>)>, MeshError> {
    let mut map: BTreeMap<FaceKey, Vec<usize>> = BTreeMap::new();
    for (e, tet) in mesh.tets.iter().enumerate() {
        for f in TET_FACES {
            let key = FaceKey::new(tet[f[0]], tet[f[1]], tet[f[2]]);
            map.entry(key).or_default().push(e);
        }
    }
    map.into_iter()
        .map(|(key, elems)| {
            if elems.len() > 2 {
                Err(MeshError::NonManifold {
                    face: key.0,
                    count: elems.len(),
                })
            } else {
                Ok((key, elems))
            }
        })
        .collect()
}

/// For every node, the ascending list of elements that contain it.
pub fn node_incidence(mesh: &TetMesh) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); mesh.nodes.len()];
    for (e, tet) in mesh.tets.iter().enumerate() {
        for &a in tet {
            inc[a].push(e);
        }
    }
    inc
}

/// Either mesh kind, as produced by the parser.
#[derive(Debug, Clone)]
pub enum Mesh {
    Tet(TetMesh),
    Hex(HexMesh),
}

impl Mesh {
    pub fn nodes(&self) -> &[Point3] {
        match self {
            Mesh::Tet(m) => m.nodes(),
            Mesh::Hex(m) => m.nodes(),
        }
    }

    pub fn node_sets(&self) -> &NodeSets {
        match self {
            Mesh::Tet(m) => m.node_sets(),
            Mesh::Hex(m) => m.node_sets(),
        }
    }

    pub fn num_elements(&self) -> usize {
        match self {
            Mesh::Tet(m) => m.num_elements(),
            Mesh::Hex(m) => m.num_elements(),
        }
    }

    pub fn total_volume(&self) -> f64 {
        match self {
            Mesh::Tet(m) => m.total_volume(),
            Mesh::Hex(m) => m.total_volume(),
        }
    }

    pub fn add_node_set(&mut self, name: impl Into<String>, nodes: Vec<usize>) -> Result<(), MeshError> {
        match self {
            Mesh::Tet(m) => m.add_node_set(name, nodes),
            Mesh::Hex(m) => m.add_node_set(name, nodes),
        }
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> (Point3, Point3) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.nodes() {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        (lo, hi)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Mesh::Tet(_) => "tet",
            Mesh::Hex(_) => "hex",
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::{two_tets, unit_tet};
    use super::*;

    #[test]
    fn unit_tet_volume() {
        let m = unit_tet();
        assert!((m.volumes()[0] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_tet_volume() {
        let p = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 2.0, 0.0),
            Point3::new(0.0, 0.0, 2.0),
        ];
        let v = tet_volume(&p[0], &p[1], &p[2], &p[3]).unwrap();
        assert!((v - 8.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn coplanar_tet_is_degenerate() {
        let p = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(1.0, 1.0, 0.0),
        ];
        assert_eq!(tet_volume(&p[0], &p[1], &p[2], &p[3]), Err(MeshError::Degenerate));
    }

    #[test]
    fn inverted_tet_is_reoriented() {
        let nodes = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let m = TetMesh::new(nodes, vec![[0, 2, 1, 3]], NodeSets::new()).unwrap();
        assert_eq!(m.tets()[0], [0, 2, 3, 1]);
        assert!((m.volumes()[0] - 1.0 / 6.0).abs() < 1e-15);
        let [p0, p1, p2, p3] = m.tets()[0].map(|i| m.nodes()[i]);
        assert!(signed_volume6(&p0, &p1, &p2, &p3) > 0.0);
    }

    #[test]
    fn gradients_sum_to_zero_and_reproduce_linear_fields() {
        let m = two_tets();
        for e in 0..2 {
            let g = m.gradients(e);
            let s = g.iter().fold(Vec3::zeros(), |a, b| a + b);
            assert!(s.norm() < 1e-14);
            // ∑ X^a ⊗ ∇N^a = I
            let mut id = nalgebra::Matrix3::zeros();
            for (a, &n) in m.tets()[e].iter().enumerate() {
                id += m.nodes()[n].coords * g[a].transpose();
            }
            assert!((id - nalgebra::Matrix3::identity()).norm() < 1e-14);
        }
    }

    #[test]
    fn single_tet_faces() {
        let faces = extract_faces(&unit_tet()).unwrap();
        assert_eq!(faces.len(), 4);
        assert!(faces.iter().all(|(_, e)| e.len() == 1));
    }

    #[test]
    fn two_tet_faces() {
        let faces = extract_faces(&two_tets()).unwrap();
        assert_eq!(faces.len(), 7);
        let interior: Vec<_> = faces.iter().filter(|(_, e)| e.len() == 2).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].0, FaceKey::new(1, 2, 3));
    }

    #[test]
    fn non_manifold_face_is_rejected() {
        let nodes = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, -1.0),
            Point3::new(0.0, 0.0, 2.0),
        ];
        let m = TetMesh::new(nodes, vec![[0, 1, 2, 3], [0, 1, 2, 4], [0, 1, 2, 5]], NodeSets::new()).unwrap();
        assert!(matches!(extract_faces(&m), Err(MeshError::NonManifold { count: 3, .. })));
    }

    #[test]
    fn incidence_of_two_tets() {
        let inc = node_incidence(&two_tets());
        assert_eq!(inc[0], vec![0]);
        for shared in [1, 2, 3] {
            assert_eq!(inc[shared], vec![0, 1]);
        }
        assert_eq!(inc[4], vec![1]);
    }
}
