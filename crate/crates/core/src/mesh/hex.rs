use super::{check_node_sets, NodeSets, Point3};
use crate::error::MeshError;
use crate::tensor::{Mat3, Vec3};

/// Natural coordinates of the eight corners in standard trilinear ordering.
pub const HEX_CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const G: f64 = 0.577_350_269_189_625_8;

/// 2×2×2 Gauss points (unit weights).
pub const HEX_GAUSS_POINTS: [[f64; 3]; 8] = [
    [-G, -G, -G],
    [G, -G, -G],
    [G, G, -G],
    [-G, G, -G],
    [-G, -G, G],
    [G, -G, G],
    [G, G, G],
    [-G, G, G],
];

/// Trilinear shape functions and their natural derivatives at `xi`.
pub fn hex_shape(xi: [f64; 3]) -> ([f64; 8], [Vec3; 8]) {
    let mut n = [0.0; 8];
    let mut dn = [Vec3::zeros(); 8];
    for (a, c) in HEX_CORNERS.iter().enumerate() {
        let f = [1.0 + c[0] * xi[0], 1.0 + c[1] * xi[1], 1.0 + c[2] * xi[2]];
        n[a] = f[0] * f[1] * f[2] / 8.0;
        dn[a] = Vec3::new(
            c[0] * f[1] * f[2] / 8.0,
            f[0] * c[1] * f[2] / 8.0,
            f[0] * f[1] * c[2] / 8.0,
        );
    }
    (n, dn)
}

/// Material quantities of a hex at one Gauss point.
#[derive(Debug, Clone)]
pub struct HexPoint {
    pub shape: [f64; 8],
    /// `∂N^a/∂X`
    pub gradients: [Vec3; 8],
    /// `det(∂X/∂ξ)` times the quadrature weight
    pub weight: f64,
    pub position: Point3,
}

#[derive(Debug, Clone)]
pub struct HexMesh {
    nodes: Vec<Point3>,
    hexes: Vec<[usize; 8]>,
    node_sets: NodeSets,
    points: Vec<[HexPoint; 8]>,
}

impl HexMesh {
    pub fn new(nodes: Vec<Point3>, hexes: Vec<[usize; 8]>, node_sets: NodeSets) -> Result<Self, MeshError> {
        Self::build(nodes, hexes, node_sets, None)
    }

    pub(crate) fn build(
        nodes: Vec<Point3>,
        hexes: Vec<[usize; 8]>,
        node_sets: NodeSets,
        lines: Option<&[usize]>,
    ) -> Result<Self, MeshError> {
        if hexes.is_empty() {
            return Err(MeshError::Empty);
        }
        let line_of = |e: usize| lines.map_or(0, |l| l[e]);
        let n = nodes.len();
        let mut points = Vec::with_capacity(hexes.len());
        for (e, hex) in hexes.iter().enumerate() {
            for (a, &id) in hex.iter().enumerate() {
                if id >= n {
                    return Err(MeshError::OutOfRange {
                        line: line_of(e),
                        id: id + 1,
                        count: n,
                    });
                }
                if hex[..a].contains(&id) {
                    return Err(MeshError::RepeatedNode {
                        line: line_of(e),
                        element: e + 1,
                        id: id + 1,
                    });
                }
            }
            let x = hex.map(|i| nodes[i]);
            let gp = gauss_points(&x).ok_or(if lines.is_some() {
                MeshError::NonPositiveVolume {
                    line: line_of(e),
                    element: e + 1,
                }
            } else {
                MeshError::NegativeJacobian { element: e + 1 }
            })?;
            points.push(gp);
        }
        check_node_sets(&node_sets, n)?;
        Ok(HexMesh {
            nodes,
            hexes,
            node_sets,
            points,
        })
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn hexes(&self) -> &[[usize; 8]] {
        &self.hexes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.hexes.len()
    }

    pub fn node_sets(&self) -> &NodeSets {
        &self.node_sets
    }

    pub fn node_set(&self, name: &str) -> Option<&[usize]> {
        self.node_sets.get(name).map(Vec::as_slice)
    }

    /// Gauss-point data of element `e`.
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

    pub fn gauss_points(&self, e: usize) -> &[HexPoint; 8] {
        &self.points[e]
    }

    pub fn volume(&self, e: usize) -> f64 {
        self.points[e].iter().map(|p| p.weight).sum()
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.hexes.len()).map(|e| self.volume(e)).sum()
    }
}

fn gauss_points(x: &[Point3; 8]) -> Option<[HexPoint; 8]> {
    let mut out: [Option<HexPoint>; 8] = Default::default();
    for (q, xi) in HEX_GAUSS_POINTS.iter().enumerate() {
        let (n, dn) = hex_shape(*xi);
        // jac[(i, r)] = ∂X_i/∂ξ_r
        let mut jac = Mat3::zeros();
        let mut pos = Vec3::zeros();
        for a in 0..8 {
            jac += x[a].coords * dn[a].transpose();
            pos += x[a].coords * n[a];
        }
        let det = jac.determinant();
        if !(det > 0.0) {
            return None;
        }
        let inv_t = jac.try_inverse()?.transpose();
        let gradients = dn.map(|d| inv_t * d);
        out[q] = Some(HexPoint {
            shape: n,
            gradients,
            weight: det,
            position: Point3::from(pos),
        });
    }
    Some(out.map(|p| p.expect("all Gauss points filled")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cube() -> HexMesh {
        let nodes = HEX_CORNERS
            .iter()
            .map(|c| Point3::new((c[0] + 1.0) / 2.0, (c[1] + 1.0) / 2.0, (c[2] + 1.0) / 2.0))
            .collect();
        HexMesh::new(nodes, vec![[0, 1, 2, 3, 4, 5, 6, 7]], NodeSets::new()).unwrap()
    }

    #[test]
    fn partition_of_unity() {
        let (n, dn) = hex_shape([0.3, -0.2, 0.7]);
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(dn.iter().fold(Vec3::zeros(), |a, b| a + b).norm() < 1e-15);
    }

    #[test]
    fn unit_cube_volume() {
        assert!((unit_cube().total_volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverted_hex_is_rejected() {
        let m = unit_cube();
        let mut h = m.hexes()[0];
        h.swap(0, 4);
        h.swap(1, 5);
        h.swap(2, 6);
        h.swap(3, 7);
        let r = HexMesh::new(m.nodes().to_vec(), vec![h], NodeSets::new());
        assert!(matches!(r, Err(MeshError::NegativeJacobian { element: 1 })));
    }
}
