use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Mat;

use crate::assembly::SparseMatrix;
use crate::error::{Error, Result};

/// Bound on `‖KΔx − R‖ / ‖R‖` accepted after refinement.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

const MAX_REFINEMENTS: usize = 4;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse direct solver that keeps the symbolic LU of the last pattern it saw.
#[derive(Default)]
pub struct LinearSolver {
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
}

impl std::fmt::Debug for LinearSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearSolver")
            .field("cached", &self.symbolic.is_some())
            .finish()
    }
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    fn symbolic_for(&mut self, k: &SparseMatrix) -> Result<SymbolicLu<usize>> {
        if let Some((cp, ri, sym)) = &self.symbolic {
            if *cp == k.col_ptr && *ri == k.row_idx {
                return Ok(sym.clone());
            }
        }
        let n = k.dim();
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, &k.col_ptr, None, &k.row_idx);
        let sym = SymbolicLu::try_new(pattern).map_err(|_| Error::SingularMatrix)?;
        self.symbolic = Some((k.col_ptr.clone(), k.row_idx.clone(), sym.clone()));
        Ok(sym)
    }

    /// Solves `K Δx = R` by LU with a residual check and iterative refinement.
    pub fn solve(&mut self, k: &SparseMatrix, r: &[f64]) -> Result<Vec<f64>> {
        let n = k.dim();
        if r.len() != n {
            return Err(Error::InvalidParameter(format!(
                "right-hand side has {} entries, matrix is {n}×{n}",
                r.len()
            )));
        }
        let sym = self.symbolic_for(k)?;
        let pattern = SymbolicSparseColMatRef::new_checked(n, n, &k.col_ptr, None, &k.row_idx);
        let mat = SparseColMatRef::new(pattern, &k.values);
        let lu = Lu::try_new_with_symbolic(sym, mat).map_err(|_| Error::SingularMatrix)?;

        let solve = |rhs: &[f64]| -> Vec<f64> {
            let mut b = Mat::from_fn(n, 1, |i, _| rhs[i]);
            lu.solve_in_place(b.as_mut());
            (0..n).map(|i| b[(i, 0)]).collect()
        };

        let r_norm = norm(r);
        let mut x = solve(r);
        if r_norm == 0.0 {
            return Ok(x);
        }
        for _ in 0..MAX_REFINEMENTS {
            let kx = k.mul_vec(&x);
            let res: Vec<f64> = r.iter().zip(&kx).map(|(a, b)| a - b).collect();
            let rel = norm(&res) / r_norm;
            if !rel.is_finite() {
                return Err(Error::SingularMatrix);
            }
            if rel < SOLVE_TOLERANCE {
                return Ok(x);
            }
            let dx = solve(&res);
            x.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
        }
        let kx = k.mul_vec(&x);
        let rel = norm(&r.iter().zip(&kx).map(|(a, b)| a - b).collect::<Vec<_>>()) / r_norm;
        if !rel.is_finite() {
            return Err(Error::SingularMatrix);
        }
        if rel >= SOLVE_TOLERANCE {
            log::warn!("linear solve residual {rel:.3e} above {SOLVE_TOLERANCE:e} after refinement");
        }
        Ok(x)
    }
}

/// One-shot sparse direct solve of `K Δx = R`.
pub fn linear_solve(k: &SparseMatrix, r: &[f64]) -> Result<Vec<f64>> {
    LinearSolver::new().solve(k, r)
}

/// Relative solve residual `‖K x − R‖ / ‖R‖`.
pub fn solve_residual(k: &SparseMatrix, x: &[f64], r: &[f64]) -> f64 {
    let kx = k.mul_vec(x);
    norm(&r.iter().zip(&kx).map(|(a, b)| a - b).collect::<Vec<_>>()) / norm(r).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_returns_rhs() {
        let k = SparseMatrix::identity(5);
        let r = vec![1.0, -2.0, 3.5, 0.0, 7.0];
        assert_eq!(linear_solve(&k, &r).unwrap(), r);
    }

    #[test]
    fn laplacian_chain_matches_closed_form() {
        // -u'' = 1 on (0,1), u(0)=u(1)=0, n interior points: u_i = x_i(1-x_i)/2
        let n = 49;
        let h = 1.0 / (n + 1) as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        let k = SparseMatrix::from_triplets(n, &t);
        let r = vec![h * h; n];
        let x = linear_solve(&k, &r).unwrap();
        for (i, xi) in x.iter().enumerate() {
            let s = (i + 1) as f64 * h;
            assert!((xi - s * (1.0 - s) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_spd_structured_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 10.0 + rng.random::<f64>()));
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                if j != i {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        let k = SparseMatrix::from_triplets(n, &t);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut solver = LinearSolver::new();
        let x = solver.solve(&k, &r).unwrap();
        assert!(solve_residual(&k, &x, &r) < SOLVE_TOLERANCE);
        // cached symbolic factorisation gives the same answer
        assert_eq!(solver.solve(&k, &r).unwrap(), x);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let k = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]);
        assert!(matches!(linear_solve(&k, &[1.0, 0.0]), Err(Error::SingularMatrix)));
    }
}
