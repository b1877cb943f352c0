use std::io::Write;

use super::cells::Discretisation;
use super::local::{evaluate_source_cell, evaluate_stress_cell, LocalContribution};
use crate::error::{Error, Result};
use crate::solver::SystemState;

/// Nodal block sparsity of the coupled system in compressed-column form.
///
/// Column `4n + c` holds rows `4m + r` for every neighbour `m` of node `n`
/// (ascending) and every component `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityPattern {
    neighbours: Vec<Vec<usize>>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl SparsityPattern {
    pub fn new<'a>(num_nodes: usize, cells: impl Iterator<Item = &'a [usize]>) -> Self {
        let mut neighbours = vec![Vec::new(); num_nodes];
        for nodes in cells {
            for &a in nodes {
                neighbours[a].extend_from_slice(nodes);
            }
        }
        for (n, nb) in neighbours.iter_mut().enumerate() {
            nb.push(n);
            nb.sort_unstable();
            nb.dedup();
        }
        let mut col_ptr = Vec::with_capacity(4 * num_nodes + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for nb in &neighbours {
            for _ in 0..4 {
                for &m in nb {
                    row_idx.extend((0..4).map(|r| 4 * m + r));
                }
                col_ptr.push(row_idx.len());
            }
        }
        SparsityPattern {
            neighbours,
            col_ptr,
            row_idx,
        }
    }

    pub fn dim(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    /// Start of the four rows of node `m` inside the columns of node `n`.
    fn block_offset(&self, m: usize, n: usize) -> usize {
        let pos = self.neighbours[n].binary_search(&m).expect("node pair in pattern");
        4 * pos
    }

    fn position(&self, row: usize, col: usize) -> Option<usize> {
        let start = self.col_ptr[col];
        let rows = &self.row_idx[start..self.col_ptr[col + 1]];
        rows.binary_search(&row).ok().map(|p| start + p)
    }
}

/// Square sparse matrix sharing a [`SparsityPattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub col_ptr: Vec<usize>,
    pub row_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: &SparsityPattern) -> Self {
        SparseMatrix {
            col_ptr: pattern.col_ptr.clone(),
            row_idx: pattern.row_idx.clone(),
            values: vec![0.0; pattern.nnz()],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            cols[c].push((r, v));
        }
        let mut m = SparseMatrix {
            col_ptr: vec![0],
            row_idx: Vec::new(),
            values: Vec::new(),
        };
        for mut col in cols {
            col.sort_by_key(|e| e.0);
            for (r, v) in col {
                if m.row_idx.len() > *m.col_ptr.last().unwrap() && *m.row_idx.last().unwrap() == r {
                    *m.values.last_mut().unwrap() += v;
                } else {
                    m.row_idx.push(r);
                    m.values.push(v);
                }
            }
            m.col_ptr.push(m.row_idx.len());
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let start = self.col_ptr[col];
        let rows = &self.row_idx[start..self.col_ptr[col + 1]];
        rows.binary_search(&row).map_or(0.0, |p| self.values[start + p])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        for (c, &xc) in x.iter().enumerate() {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_idx[p]] += self.values[p] * xc;
            }
        }
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for c in 0..n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                d[self.row_idx[p]][c] += self.values[p];
            }
        }
        d
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// Matrix Market coordinate export.
    pub fn write_matrix_market(&self, out: &mut impl Write) -> std::io::Result<()> {
        let n = self.dim();
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{n} {n} {}", self.values.len())?;
        for c in 0..n {
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                writeln!(out, "{} {} {:e}", self.row_idx[p] + 1, c + 1, self.values[p])?;
            }
        }
        Ok(())
    }
}

/// Maps nodes to their four global dofs and records Dirichlet constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    num_nodes: usize,
    fixed: Vec<bool>,
}

impl DofMap {
    pub fn new(num_nodes: usize) -> Self {
        DofMap {
            num_nodes,
            fixed: vec![false; 4 * num_nodes],
        }
    }

    /// Global index of component `c` (0-2 displacement, 3 potential) of `node`.
    pub fn dof(node: usize, c: usize) -> usize {
        4 * node + c
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_dofs(&self) -> usize {
        self.fixed.len()
    }

    pub fn fix(&mut self, node: usize, c: usize) {
        self.fixed[Self::dof(node, c)] = true;
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed[dof]
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn num_free(&self) -> usize {
        self.fixed.iter().filter(|f| !**f).count()
    }
}

/// Assembled tangent `K = -∂R/∂x` and residual `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub matrix: SparseMatrix,
    pub residual: Vec<f64>,
}

impl GlobalSystem {
    pub fn residual_norm(&self) -> f64 {
        self.residual.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
}

fn scatter(pattern: &SparsityPattern, sys: &mut GlobalSystem, local: &LocalContribution) {
    let n = local.nodes.len();
    for (a, &na) in local.nodes.iter().enumerate() {
        for i in 0..4 {
            sys.residual[4 * na + i] += local.residual[a][i];
        }
    }
    let width = 4 * n;
    for (b, &nb) in local.nodes.iter().enumerate() {
        for (a, &na) in local.nodes.iter().enumerate() {
            let off = pattern.block_offset(na, nb);
            for k in 0..4 {
                let base = pattern.col_ptr[4 * nb + k] + off;
                for i in 0..4 {
                    sys.matrix.values[base + i] += local.tangent[(4 * a + i) * width + 4 * b + k];
                }
            }
        }
    }
}

/// Assembles the global system of `disc` at `state`. Constrained dofs get a
/// unit diagonal, zero off-diagonals in their row and column, and zero residual.
pub fn assemble(disc: &Discretisation, state: &SystemState, dt: f64, dofs: &DofMap) -> Result<GlobalSystem> {
    let pattern = disc.pattern();
    let n = disc.num_dofs();
    if state.u.len() != disc.num_nodes() || dofs.num_dofs() != n {
        return Err(Error::InvalidParameter("state or dof map does not match the discretisation".into()));
    }
    let mut sys = GlobalSystem {
        matrix: SparseMatrix::zeros(pattern),
        residual: vec![0.0; n],
    };
    let material = disc.material();
    for (idx, cell) in disc.stress_cells().iter().enumerate() {
        let local = evaluate_stress_cell(material, cell, idx, state, dt)?;
        scatter(pattern, &mut sys, &local);
    }
    for (idx, cell) in disc.source_cells().iter().enumerate() {
        let local = evaluate_source_cell(material, cell, idx, state, dt)?;
        scatter(pattern, &mut sys, &local);
    }
    if sys.residual.iter().any(|r| !r.is_finite()) || sys.matrix.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularDeformation);
    }
    apply_dirichlet(pattern, &mut sys, dofs);
    Ok(sys)
}

fn apply_dirichlet(pattern: &SparsityPattern, sys: &mut GlobalSystem, dofs: &DofMap) {
    let fixed = dofs.fixed();
    for col in 0..pattern.dim() {
        for p in pattern.col_ptr[col]..pattern.col_ptr[col + 1] {
            let row = pattern.row_idx[p];
            if fixed[col] || fixed[row] {
                sys.matrix.values[p] = if row == col { 1.0 } else { 0.0 };
            }
        }
        if fixed[col] {
            sys.residual[col] = 0.0;
        }
    }
    debug_assert!((0..pattern.dim()).all(|d| pattern.position(d, d).is_some()));
}
