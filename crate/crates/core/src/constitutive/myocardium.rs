//! Myocardium: Holzapfel-Ogden passive response, active fiber tension and
//! isotropic conduction.

use serde::{Deserialize, Serialize};

use super::{volumetric, ApParams, KinematicState, Parts};
use crate::error::{Error, Result};
use crate::smoothing::FiberFrame;
use crate::tensor::{delta, Mat3, Tensor3, Tensor4, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoParams {
    pub kappa: f64,
    pub a: f64,
    pub b: f64,
    pub a_f: f64,
    pub b_f: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub a_fs: f64,
    pub b_fs: f64,
}

impl Default for HoParams {
    fn default() -> Self {
        HoParams {
            kappa: 1000.0,
            a: 1.665,
            b: 1.237,
            a_f: 7.822,
            b_f: 0.008,
            a_s: 0.0,
            b_s: 0.0,
            a_fs: 1.342,
            b_fs: 9.178,
        }
    }
}

impl HoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.a > 0.0 && self.b > 0.0) {
            return Err(Error::InvalidParameter("Holzapfel-Ogden kappa, a and b must be positive".into()));
        }
        let rest = [self.a_f, self.b_f, self.a_s, self.b_s, self.a_fs, self.b_fs];
        if rest.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "Holzapfel-Ogden fiber and sheet parameters must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActiveParams {
    /// [kPa/mV]
    pub k_t: f64,
    /// [1/ms]
    pub a0: f64,
    /// [1/ms]
    pub a_inf: f64,
    /// [1/mV]
    pub xi: f64,
    /// Resting potential [mV].
    pub phi_r: f64,
    /// Phase shift of the switch function [mV].
    pub phi_bar: f64,
}

impl Default for ActiveParams {
    fn default() -> Self {
        ActiveParams {
            k_t: 0.005,
            a0: 1.0,
            a_inf: 0.1,
            xi: 0.1,
            phi_r: -80.0,
            phi_bar: -80.0,
        }
    }
}

impl ActiveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > self.a_inf) {
            return Err(Error::InvalidParameter(format!(
                "active tension requires a0 > a_inf (got {} and {})",
                self.a0, self.a_inf
            )));
        }
        Ok(())
    }
}

/// Full parameter set of the myocardium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MyoMaterial {
    pub ho: HoParams,
    pub active: ActiveParams,
    pub ap: ApParams,
    /// Scalar conductivity `d` [mm²/ms].
    pub conductivity: f64,
}

impl Default for MyoMaterial {
    fn default() -> Self {
        MyoMaterial {
            ho: HoParams::default(),
            active: ActiveParams::default(),
            ap: ApParams::default(),
            conductivity: 0.01,
        }
    }
}

impl MyoMaterial {
    pub fn validate(&self) -> Result<()> {
        self.ho.validate()?;
        self.active.validate()?;
        self.ap.validate()?;
        if !(self.conductivity > 0.0) {
            return Err(Error::InvalidParameter("conductivity must be positive".into()));
        }
        Ok(())
    }
}

/// Internal variables carried between time steps.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MyoHistory {
    /// Active tension [kPa].
    pub t: f64,
    /// Recovery variable of the excitation model.
    pub r: f64,
}

/// `(Ψ, Ψ', Ψ'')` of `a/(2b) [exp(b x²) - 1]` with respect to the invariant whose
/// offset is `x`.
fn exp_quadratic(a: f64, b: f64, x: f64) -> (f64, f64, f64) {
    if a == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let ex = (b * x * x).exp();
    let energy = if b == 0.0 { 0.5 * a * x * x } else { a / (2.0 * b) * (ex - 1.0) };
    (energy, a * x * ex, a * ex * (1.0 + 2.0 * b * x * x))
}

struct HoState {
    f_bar: Vec3,
    s_bar: Vec3,
    b_bar: Mat3,
    psi: f64,
    d1: f64,
    d11: f64,
    df: f64,
    dff: f64,
    ds: f64,
    dss: f64,
    dfs: f64,
    dfsfs: f64,
}

fn ho_state(kin: &KinematicState, frame: &FiberFrame, p: &HoParams) -> HoState {
    let f_bar = kin.f_bar * frame.f0;
    let s_bar = kin.f_bar * frame.s0;
    let i1 = kin.b_bar.trace();
    let e1 = (p.b * (i1 - 3.0)).exp();
    let (pf, df, dff) = exp_quadratic(p.a_f, p.b_f, f_bar.dot(&f_bar) - 1.0);
    let (ps, ds, dss) = exp_quadratic(p.a_s, p.b_s, s_bar.dot(&s_bar) - 1.0);
    let (pfs, dfs, dfsfs) = exp_quadratic(p.a_fs, p.b_fs, f_bar.dot(&s_bar));
    HoState {
        f_bar,
        s_bar,
        b_bar: kin.b_bar,
        psi: p.a / (2.0 * p.b) * e1 + pf + ps + pfs,
        d1: 0.5 * p.a * e1,
        d11: 0.5 * p.a * p.b * e1,
        df,
        dff,
        ds,
        dss,
        dfs,
        dfsfs,
    }
}

impl HoState {
    fn fs_sym(&self) -> Mat3 {
        self.f_bar * self.s_bar.transpose() + self.s_bar * self.f_bar.transpose()
    }

    /// Fictitious Kirchhoff stress `τ̄ = J σ̄`.
    fn tau_bar(&self) -> Mat3 {
        self.b_bar * (2.0 * self.d1)
            + self.f_bar * self.f_bar.transpose() * (2.0 * self.df)
            + self.s_bar * self.s_bar.transpose() * (2.0 * self.ds)
            + self.fs_sym() * self.dfs
    }
}

/// Strain energy `Ψ(F̄)` of the isochoric, fiber, sheet and fiber-sheet terms.
pub fn ho_energy(kin: &KinematicState, frame: &FiberFrame, p: &HoParams) -> f64 {
    ho_state(kin, frame, p).psi
}

/// Passive stress split into volumetric and isochoric parts (`act` is zero).
pub fn ho_stress_parts(kin: &KinematicState, frame: &FiberFrame, p: &HoParams) -> Parts<Mat3> {
    let tau = ho_state(kin, frame, p).tau_bar();
    let iso = (tau - Mat3::identity() * (tau.trace() / 3.0)) / kin.j;
    Parts {
        act: Mat3::zeros(),
        vol: Mat3::identity() * (p.kappa * (kin.j - 1.0)),
        iso,
    }
}

pub fn ho_passive_stress(kin: &KinematicState, frame: &FiberFrame, p: &HoParams) -> Mat3 {
    let s = ho_stress_parts(kin, frame, p);
    s.vol + s.iso
}

/// Spatial tangent of the passive stress split into volumetric and isochoric parts.
pub fn ho_tangent_parts(kin: &KinematicState, frame: &FiberFrame, p: &HoParams) -> Parts<Tensor4> {
    let st = ho_state(kin, frame, p);
    let tau = st.tau_bar();
    let tau_iso = tau - Mat3::identity() * (tau.trace() / 3.0);
    let ff = st.f_bar * st.f_bar.transpose();
    let ss = st.s_bar * st.s_bar.transpose();
    let fs = st.fs_sym();
    let c_bar = Tensor4::outer(&st.b_bar, &st.b_bar) * (4.0 * st.d11)
        + Tensor4::outer(&ff, &ff) * (4.0 * st.dff)
        + Tensor4::outer(&ss, &ss) * (4.0 * st.dss)
        + Tensor4::outer(&fs, &fs) * st.dfsfs;
    let proj = Tensor4::deviatoric_projection();
    let id = Mat3::identity();
    let geometric = proj * (2.0 / 3.0 * tau.trace())
        - (Tensor4::outer(&tau_iso, &id) + Tensor4::outer(&id, &tau_iso)) * (2.0 / 3.0);
    let iso = (proj.compose(&c_bar).compose(&proj) + geometric) * (1.0 / kin.j);
    Parts {
        act: Tensor4::zeros(),
        vol: volumetric(p.kappa, kin.j).1,
        iso,
    }
}

pub fn ho_tangent(kin: &KinematicState, frame: &FiberFrame, p: &HoParams) -> Tensor4 {
    let t = ho_tangent_parts(kin, frame, p);
    t.vol + t.iso
}

/// Rate switch `a(φ)`.
pub fn switch_function(phi: f64, p: &ActiveParams) -> f64 {
    let inner = (-p.xi * (phi - p.phi_bar)).exp();
    p.a0 + (p.a_inf - p.a0) * (-inner).exp()
}

pub fn switch_function_derivative(phi: f64, p: &ActiveParams) -> f64 {
    let inner = (-p.xi * (phi - p.phi_bar)).exp();
    if !inner.is_finite() {
        return 0.0;
    }
    (p.a_inf - p.a0) * (-inner).exp() * inner * p.xi
}

/// One backward-Euler step of the active tension, returning `(T, ∂T/∂φ)`.
pub fn active_tension_step(t_n: f64, phi: f64, dt: f64, p: &ActiveParams) -> (f64, f64) {
    let a = switch_function(phi, p);
    let da = switch_function_derivative(phi, p);
    let target = p.k_t * (phi - p.phi_r);
    let num = t_n + dt * a * target;
    let den = 1.0 + dt * a;
    let dnum = dt * (da * target + a * p.k_t);
    let dden = dt * da;
    (num / den, (dnum * den - num * dden) / (den * den))
}

/// Active stress `(T/J) f ⊗ f` with `f = F f₀`.
pub fn myo_active_stress(kin: &KinematicState, t: f64, f0: &Vec3) -> Mat3 {
    let f = kin.f * f0;
    f * f.transpose() * (t / kin.j)
}

/// Conduction flux `q = -d E`.
pub fn flux(e: &Vec3, d: f64) -> Vec3 {
    -e * d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MyoCouplingTangents {
    /// `∂σ/∂φ`
    pub c_uphi: Mat3,
    /// `(∂q_i/∂F_kL) F_lL` at fixed material field
    pub c_phiu: Tensor3,
    /// `-∂q/∂E`
    pub c_phiphi: Mat3,
}

pub fn myo_coupling_tangents(kin: &KinematicState, f0: &Vec3, dt_dphi: f64, d: f64) -> MyoCouplingTangents {
    let e = kin.e;
    MyoCouplingTangents {
        c_uphi: myo_active_stress(kin, dt_dphi, f0),
        c_phiu: Tensor3::from_fn(|i, k, l| d * delta(i, l) * e[k]),
        c_phiphi: Mat3::identity() * d,
    }
}
