//! Ideal dielectric elastomer: Maxwell stress plus nearly incompressible Neo-Hooke.

use serde::{Deserialize, Serialize};

use super::{volumetric, KinematicState, Parts};
use crate::error::{Error, Result};
use crate::tensor::{delta, Mat3, Tensor3, Tensor4, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DielectricParams {
    /// Shear modulus [kPa].
    pub mu: f64,
    /// Second Lamé parameter [kPa].
    pub lambda: f64,
    /// Bulk modulus of the volumetric stress [kPa].
    pub kappa: f64,
    /// Permittivity [F/mm²].
    pub eps: f64,
}

impl DielectricParams {
    /// Parameters with `κ = λ + 2μ/3`.
    pub fn from_lame(mu: f64, lambda: f64, eps: f64) -> Self {
        DielectricParams {
            mu,
            lambda,
            kappa: lambda + 2.0 * mu / 3.0,
            eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("kappa", self.kappa), ("eps", self.eps)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("dielectric {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for DielectricParams {
    fn default() -> Self {
        Self::from_lame(2000.0, 666.67, 1.0)
    }
}

pub fn electric_displacement(e: &Vec3, eps: f64) -> Vec3 {
    e * eps
}

pub fn dielectric_stress_parts(kin: &KinematicState, p: &DielectricParams) -> Parts<Mat3> {
    let e = kin.e;
    let act = (e * e.transpose() - Mat3::identity() * (0.5 * e.dot(&e))) * p.eps;
    let vol = Mat3::identity() * (p.kappa * (kin.j - 1.0));
    let b = kin.b_bar;
    let iso = (b - Mat3::identity() * (b.trace() / 3.0)) * (p.mu / kin.j);
    Parts { act, vol, iso }
}

pub fn dielectric_stress(kin: &KinematicState, p: &DielectricParams) -> Mat3 {
    dielectric_stress_parts(kin, p).total()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DielectricTangents {
    /// Spatial elasticity tensor split into its Maxwell, volumetric and isochoric parts.
    pub c: Parts<Tensor4>,
    /// `-∂σ_ij/∂E_p`
    pub c_uphi: Tensor3,
    /// `(∂D_i/∂F_kL) F_lL` at fixed material field
    pub c_phiu: Tensor3,
    /// `-∂D/∂E`
    pub c_phiphi: Mat3,
}

impl DielectricTangents {
    pub fn c_uu(&self) -> Tensor4 {
        self.c.total()
    }
}

pub fn dielectric_tangents(kin: &KinematicState, p: &DielectricParams) -> DielectricTangents {
    let e = kin.e;
    let e2 = e.dot(&e);
    let eps = p.eps;
    let sig_act = dielectric_stress_parts(kin, p).act;
    let act = Tensor4::from_fn(|i, j, k, l| {
        let isym = 0.5 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
        sig_act[(i, j)] * delta(k, l)
            + eps
                * (-(delta(i, k) * e[l] + delta(i, l) * e[k]) * e[j]
                    - e[i] * (e[k] * delta(j, l) + e[l] * delta(j, k))
                    + delta(i, j) * e[k] * e[l]
                    + e2 * isym)
    });
    let (_, vol) = volumetric(p.kappa, kin.j);
    let b = kin.b_bar;
    let trb = b.trace();
    let iso = Tensor4::from_fn(|i, j, k, l| {
        let isym = 0.5 * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k));
        2.0 * p.mu / kin.j
            * (trb / 3.0 * isym - (b[(i, j)] * delta(k, l) + delta(i, j) * b[(k, l)]) / 3.0
                + trb / 9.0 * delta(i, j) * delta(k, l))
    });
    let c_uphi = Tensor3::from_fn(|i, j, q| -eps * (delta(i, q) * e[j] + e[i] * delta(j, q) - delta(i, j) * e[q]));
    let c_phiu = Tensor3::from_fn(|i, k, l| -eps * delta(i, l) * e[k]);
    DielectricTangents {
        c: Parts { act, vol, iso },
        c_uphi,
        c_phiu,
        c_phiphi: Mat3::identity() * -eps,
    }
}

#[cfg(test)]
mod tests {
    use super::super::fd::{dpiola_df, rel};
    use super::super::{kinematics, material_tangent, piola};
    use super::*;
    use crate::tensor::max_abs;
    use nalgebra::Rotation3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> DielectricParams {
        DielectricParams::default()
    }

    fn random_state(rng: &mut ChaCha8Rng) -> (Mat3, Vec3) {
        let f = Mat3::identity() + Mat3::from_fn(|_, _| rng.random_range(-0.2 / 3.0..0.2 / 3.0));
        let e = Vec3::from_fn(|_, _| rng.random_range(-200.0 / 3f64.sqrt()..200.0 / 3f64.sqrt()));
        (f, e)
    }

    /// Cauchy stress as a function of `F` at a fixed material field.
    fn sigma_at(f: &Mat3, e0: &Vec3, p: &DielectricParams) -> Mat3 {
        let e = f.try_inverse().unwrap().transpose() * e0;
        dielectric_stress(&kinematics(*f).unwrap().with_field(e), p)
    }

    #[test]
    fn displacement_examples() {
        assert_eq!(electric_displacement(&Vec3::zeros(), 1.0), Vec3::zeros());
        assert_eq!(electric_displacement(&Vec3::x(), 1.0), Vec3::x());
        assert_eq!(electric_displacement(&Vec3::new(1.0, 2.0, 3.0), 2.0), Vec3::new(2.0, 4.0, 6.0));
    }

    #[test]
    fn default_kappa() {
        let p = params();
        assert!((p.kappa - 2000.0).abs() < 1e-2);
    }

    #[test]
    fn stress_examples() {
        let p = params();
        let k = kinematics(Mat3::identity()).unwrap();
        assert_eq!(dielectric_stress(&k, &p), Mat3::zeros());
        let e0 = 3.0;
        let s = dielectric_stress(&k.with_field(Vec3::new(e0, 0.0, 0.0)), &p);
        let expect = Mat3::from_diagonal(&Vec3::new(0.5, -0.5, -0.5)) * (p.eps * e0 * e0);
        assert!(max_abs(&(s - expect)) < 1e-12);
        let k = kinematics(Mat3::from_diagonal(&Vec3::new(1.1, 1.0 / 1.1, 1.0))).unwrap();
        let s = dielectric_stress(&k, &p);
        assert!(s.trace().abs() < 1e-10);
        assert!(max_abs(&s) > 1.0);
    }

    #[test]
    fn small_strain_limit() {
        let p = params();
        let t = dielectric_tangents(&kinematics(Mat3::identity()).unwrap(), &p);
        let expect = Tensor4::outer(&Mat3::identity(), &Mat3::identity()) * p.kappa
            + Tensor4::deviatoric_projection() * (2.0 * p.mu);
        assert!((t.c_uu() - expect).norm() < 1e-9);
        assert_eq!(t.c_phiphi, Mat3::identity() * -p.eps);
    }

    #[test]
    fn tangents_match_finite_differences() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (f, e) = random_state(&mut rng);
            let kin = kinematics(f).unwrap().with_field(e);
            let t = dielectric_tangents(&kin, &p);
            let sigma = dielectric_stress(&kin, &p);

            let e0 = f.transpose() * e;
            let a = material_tangent(&f, &sigma, &t.c_uu());
            let a_fd = dpiola_df(&f, 1e-6, |g| piola(g, &sigma_at(g, &e0, &p)));
            assert!(rel((a - a_fd).norm(), a.norm()) < 1e-5);

            let h = 1e-6 * e.norm().max(1.0);
            let mut fd = Tensor3::zeros();
            for q in 0..3 {
                let mut ep = e;
                ep[q] += h;
                let mut em = e;
                em[q] -= h;
                let d = (dielectric_stress(&kin.with_field(ep), &p) - dielectric_stress(&kin.with_field(em), &p))
                    / (2.0 * h);
                for i in 0..3 {
                    for j in 0..3 {
                        fd[(i, j, q)] = -d[(i, j)];
                    }
                }
            }
            assert!(rel((fd - t.c_uphi).norm(), t.c_uphi.norm()) < 1e-5);

            // (∂D/∂F) F at fixed E0
            let d_of = |g: &Mat3| electric_displacement(&(g.try_inverse().unwrap().transpose() * e0), p.eps);
            let mut fd = Tensor3::zeros();
            for k in 0..3 {
                for big_l in 0..3 {
                    let mut fp = f;
                    fp[(k, big_l)] += 1e-6;
                    let mut fm = f;
                    fm[(k, big_l)] -= 1e-6;
                    let d = (d_of(&fp) - d_of(&fm)) / 2e-6;
                    for i in 0..3 {
                        for l in 0..3 {
                            fd[(i, k, l)] += d[i] * f[(l, big_l)];
                        }
                    }
                }
            }
            assert!(rel((fd - t.c_phiu).norm(), t.c_phiu.norm()) < 1e-5);
        }
    }

    #[test]
    fn tangent_has_minor_symmetries() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (f, e) = random_state(&mut rng);
        let c = dielectric_tangents(&kinematics(f).unwrap().with_field(e), &p).c_uu();
        assert!(c.minor_symmetry_defect() < 1e-9 * c.norm());
    }

    proptest! {
        #[test]
        fn stress_is_symmetric_and_objective(
            seed in 0u64..1000,
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in -3.0f64..3.0,
        ) {
            let p = params();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (f, e) = random_state(&mut rng);
            let s = dielectric_stress(&kinematics(f).unwrap().with_field(e), &p);
            prop_assert!(max_abs(&(s - s.transpose())) <= 1e-12 * max_abs(&s).max(1.0));
            let axis = Vec3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let q = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).into_inner();
            let sq = dielectric_stress(&kinematics(q * f).unwrap().with_field(q * e), &p);
            prop_assert!(max_abs(&(sq - q * s * q.transpose())) <= 1e-10 * max_abs(&s).max(1.0));
        }
    }
}
