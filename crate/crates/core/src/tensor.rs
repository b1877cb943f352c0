//! Small fixed-size third- and fourth-order tensors in a Cartesian basis.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use nalgebra::{Matrix3, Vector3};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;

#[inline]
pub(crate) fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Third-order tensor `T[i][j][k]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor3(pub [[[f64; 3]; 3]; 3]);

impl Tensor3 {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    t.0[i][j][k] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_fn(|i, j, k| s * self.0[i][j][k])
    }
}

impl Index<(usize, usize, usize)> for Tensor3 {
    type Output = f64;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.0[i][j][k]
    }
}

impl IndexMut<(usize, usize, usize)> for Tensor3 {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        &mut self.0[i][j][k]
    }
}

impl Sub for Tensor3 {
    type Output = Tensor3;
    fn sub(self, rhs: Tensor3) -> Tensor3 {
        Tensor3::from_fn(|i, j, k| self.0[i][j][k] - rhs.0[i][j][k])
    }
}

/// Fourth-order tensor `C[i][j][k][l]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor4(pub [[[[f64; 3]; 3]; 3]; 3]);

impl Tensor4 {
    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.0[i][j][k][l] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Symmetric fourth-order identity, `(δ_ik δ_jl + δ_il δ_jk) / 2`.
    pub fn identity_sym() -> Self {
        Self::from_fn(|i, j, k, l| 0.5 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k)))
    }

    /// Isochoric projection `I^sym - (1/3) I ⊗ I`.
    pub fn deviatoric_projection() -> Self {
        Self::from_fn(|i, j, k, l| {
            0.5 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k)) - delta(i, j) * delta(k, l) / 3.0
        })
    }

    /// Dyadic product `(A ⊗ B)_ijkl = A_ij B_kl`.
    pub fn outer(a: &Mat3, b: &Mat3) -> Self {
        Self::from_fn(|i, j, k, l| a[(i, j)] * b[(k, l)])
    }

    /// `C : A`, contracting the last two indices.
    pub fn contract(&self, a: &Mat3) -> Mat3 {
        let mut out = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += self.0[i][j][k][l] * a[(k, l)];
                    }
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// `A : C`, contracting the first two indices.
    pub fn left_contract(&self, a: &Mat3) -> Mat3 {
        let mut out = Mat3::zeros();
        for k in 0..3 {
            for l in 0..3 {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += a[(i, j)] * self.0[i][j][k][l];
                    }
                }
                out[(k, l)] = s;
            }
        }
        out
    }

    /// `A : B` for fourth-order tensors.
    pub fn compose(&self, rhs: &Tensor4) -> Tensor4 {
        let mut out = Tensor4::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut s = 0.0;
                        for m in 0..3 {
                            for n in 0..3 {
                                s += self.0[i][j][m][n] * rhs.0[m][n][k][l];
                            }
                        }
                        out.0[i][j][k][l] = s;
                    }
                }
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_fn(|i, j, k, l| s * self.0[i][j][k][l])
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest violation of `C_ijkl = C_jikl = C_ijlk`.
    pub fn minor_symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let c = self.0[i][j][k][l];
                        worst = worst
                            .max((c - self.0[j][i][k][l]).abs())
                            .max((c - self.0[i][j][l][k]).abs());
                    }
                }
            }
        }
        worst
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;
    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.0[i][j][k][l]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.0[i][j][k][l]
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: Tensor4) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| self.0[i][j][k][l] + rhs.0[i][j][k][l])
    }
}

impl AddAssign for Tensor4 {
    fn add_assign(&mut self, rhs: Tensor4) {
        *self = *self + rhs;
    }
}

impl Sub for Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: Tensor4) -> Tensor4 {
        Tensor4::from_fn(|i, j, k, l| self.0[i][j][k][l] - rhs.0[i][j][k][l])
    }
}

impl Mul<f64> for Tensor4 {
    type Output = Tensor4;
    fn mul(self, s: f64) -> Tensor4 {
        self.scaled(s)
    }
}

/// Symmetric part of a 3×3 matrix.
pub fn sym(a: &Mat3) -> Mat3 {
    0.5 * (a + a.transpose())
}

/// Deviatoric part of a 3×3 matrix.
pub fn dev(a: &Mat3) -> Mat3 {
    a - Mat3::identity() * (a.trace() / 3.0)
}

/// Largest absolute entry.
pub fn max_abs(a: &Mat3) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}
