//! Constitutive laws of both material families.
//!
//! Stresses are Cauchy stresses. Spatial tangents `c` are defined through the
//! Oldroyd rate of the Kirchhoff stress `τ = Jσ` (divided by `J`), so that the
//! first Piola-Kirchhoff tangent reads
//! `∂P_iJ/∂F_kL = J (c_ijkl + δ_ik σ_jl) F⁻¹_Jj F⁻¹_Ll`; see [`material_tangent`].
//! For the dielectric the spatial field `E` is carried along with the
//! deformation (`E = F⁻ᵀ E₀` with `E₀` fixed) when forming `c`.

mod aliev_panfilov;
mod dielectric;
mod kinematics;
mod myocardium;

pub use aliev_panfilov::{ap_source, ApParams, ApResponse};
pub use dielectric::{
    dielectric_stress, dielectric_stress_parts, dielectric_tangents, electric_displacement,
    DielectricParams, DielectricTangents,
};
pub use kinematics::{kinematics, KinematicState};
pub use myocardium::{
    active_tension_step, flux, ho_energy, ho_passive_stress, ho_stress_parts, ho_tangent,
    ho_tangent_parts, myo_active_stress, myo_coupling_tangents, switch_function,
    switch_function_derivative, ActiveParams, HoParams, MyoCouplingTangents, MyoHistory,
    MyoMaterial,
};

use crate::tensor::{delta, Mat3, Tensor4};

/// Volumetric, isochoric and active parts of a Cauchy stress or spatial tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parts<T> {
    pub act: T,
    pub vol: T,
    pub iso: T,
}

impl Parts<Mat3> {
    pub fn total(&self) -> Mat3 {
        self.act + self.vol + self.iso
    }
}

impl Parts<Tensor4> {
    pub fn total(&self) -> Tensor4 {
        self.act + self.vol + self.iso
    }
}

/// `p = κ(J-1)` volumetric Cauchy stress and its spatial tangent
/// `κ(2J-1) I⊗I - 2κ(J-1) 𝕀^sym`.
pub fn volumetric(kappa: f64, j: f64) -> (Mat3, Tensor4) {
    let p = kappa * (j - 1.0);
    let c = Tensor4::from_fn(|i, jj, k, l| {
        kappa * (2.0 * j - 1.0) * delta(i, jj) * delta(k, l)
            - 2.0 * p * 0.5 * (delta(i, k) * delta(jj, l) + delta(i, l) * delta(jj, k))
    });
    (Mat3::identity() * p, c)
}

/// First Piola-Kirchhoff tangent `∂P/∂F` from a Cauchy stress and its spatial tangent.
pub fn material_tangent(f: &Mat3, sigma: &Mat3, c: &Tensor4) -> Tensor4 {
    let j = f.determinant();
    let finv = f.try_inverse().expect("invertible deformation gradient");
    // a_ijkl = c_ijkl + δ_ik σ_jl, then pulled back on the second and fourth index
    let a = Tensor4::from_fn(|i, jj, k, l| c[(i, jj, k, l)] + delta(i, k) * sigma[(jj, l)]);
    Tensor4::from_fn(|i, big_j, k, big_l| {
        let mut s = 0.0;
        for jj in 0..3 {
            for l in 0..3 {
                s += a[(i, jj, k, l)] * finv[(big_j, jj)] * finv[(big_l, l)];
            }
        }
        j * s
    })
}

/// First Piola-Kirchhoff stress `P = J σ F⁻ᵀ`.
pub fn piola(f: &Mat3, sigma: &Mat3) -> Mat3 {
    let finv_t = f.try_inverse().expect("invertible deformation gradient").transpose();
    sigma * finv_t * f.determinant()
}
