use crate::error::Result;
use crate::mesh::{signed_volume6, HexMesh, Mesh, NodeSets, Point3, TetMesh};

/// Names of the six automatically generated face sets.
pub const FACE_SETS: [&str; 6] = ["xmin", "xmax", "ymin", "ymax", "zmin", "zmax"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    Tet,
    Hex,
}

fn grid(l: f64, n: usize) -> (Vec<Point3>, NodeSets) {
    let h = l / (n - 1) as f64;
    let mut nodes = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                nodes.push(Point3::new(i as f64 * h, j as f64 * h, k as f64 * h));
            }
        }
    }
    let mut sets = NodeSets::new();
    for (axis, pair) in FACE_SETS.chunks(2).enumerate() {
        for (side, name) in pair.iter().enumerate() {
            let target = side * (n - 1);
            let ids = (0..nodes.len())
                .filter(|&id| [id % n, (id / n) % n, id / (n * n)][axis] == target)
                .collect();
            sets.insert(name.to_string(), ids);
        }
    }
    (nodes, sets)
}

fn cell_corners(n: usize, i: usize, j: usize, k: usize) -> [usize; 8] {
    let id = |a: usize, b: usize, c: usize| (i + a) + n * ((j + b) + n * (k + c));
    [
        id(0, 0, 0),
        id(1, 0, 0),
        id(1, 1, 0),
        id(0, 1, 0),
        id(0, 0, 1),
        id(1, 0, 1),
        id(1, 1, 1),
        id(0, 1, 1),
    ]
}

/// Corner paths from `(0,0,0)` to `(1,1,1)` along the six axis orderings.
const KUHN_PATHS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Structured tet cube of edge `l` with `n` nodes per edge, six tets per cell.
pub fn cube_tet_mesh(l: f64, n: usize) -> Result<TetMesh> {
    check_args(l, n)?;
    let (nodes, sets) = grid(l, n);
    let mut tets = Vec::with_capacity(6 * (n - 1).pow(3));
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let id = |o: [usize; 3]| (i + o[0]) + n * ((j + o[1]) + n * (k + o[2]));
                for path in KUHN_PATHS {
                    let mut o = [0usize; 3];
                    let mut t = [id(o); 4];
                    for (step, &axis) in path.iter().enumerate() {
                        o[axis] = 1;
                        t[step + 1] = id(o);
                    }
                    if signed_volume6(&nodes[t[0]], &nodes[t[1]], &nodes[t[2]], &nodes[t[3]]) < 0.0 {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }
    Ok(TetMesh::new(nodes, tets, sets)?)
}

/// Structured trilinear hex cube of edge `l` with `n` nodes per edge.
pub fn cube_hex_mesh(l: f64, n: usize) -> Result<HexMesh> {
    check_args(l, n)?;
    let (nodes, sets) = grid(l, n);
    let mut hexes = Vec::with_capacity((n - 1).pow(3));
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                hexes.push(cell_corners(n, i, j, k));
            }
        }
    }
    Ok(HexMesh::new(nodes, hexes, sets)?)
}

pub fn generate_cube_mesh(l: f64, n: usize, kind: MeshKind) -> Result<Mesh> {
    Ok(match kind {
        MeshKind::Tet => Mesh::Tet(cube_tet_mesh(l, n)?),
        MeshKind::Hex => Mesh::Hex(cube_hex_mesh(l, n)?),
    })
}

fn check_args(l: f64, n: usize) -> Result<()> {
    if n < 2 {
        return Err(crate::Error::InvalidParameter(format!("cube needs at least 2 nodes per edge, got {n}")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(crate::Error::InvalidParameter(format!("cube edge length must be positive, got {l}")));
    }
    Ok(())
}
