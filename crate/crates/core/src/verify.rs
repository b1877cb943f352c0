//! Self-check suites: volume partition, patch tests, constitutive oracles and
//! tangent consistency.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble, Discretisation, DofMap, Material, Method, MethodConfig};
use crate::constitutive::{
    active_tension_step, ap_source, dielectric_stress, dielectric_tangents, ho_energy, ho_passive_stress,
    ho_stress_parts, ho_tangent, kinematics, material_tangent, myo_active_stress, piola, switch_function,
    ActiveParams, ApParams, DielectricParams, HoParams, MyoMaterial,
};
use crate::error::Result;
use crate::mesh::{Mesh, TetMesh};
use crate::scenarios::{cube_hex_mesh, cube_tet_mesh, FiberRule};
use crate::smoothing::{
    FiberFrame, build_element_domains, build_face_domains, build_node_domains, element_deformation_gradient,
    smooth_deformation_gradient, smooth_electric_field, SmoothingDomain,
};
use crate::solver::SystemState;
use crate::tensor::{max_abs, Mat3, Tensor3, Tensor4, Vec3};

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {:.3e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {c}", self.suite)?;
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Partition of unity of the smoothing domains and per-element quarter audit.
pub fn volumes_suite(mesh: &TetMesh) -> Result<SuiteReport> {
    let total = mesh.total_volume();
    let mut checks = Vec::new();
    let kinds: [(&str, Vec<SmoothingDomain>); 3] = [
        ("element", build_element_domains(mesh)),
        ("face", build_face_domains(mesh)?),
        ("node", build_node_domains(mesh)),
    ];
    for (name, domains) in &kinds {
        let sum: f64 = domains.iter().map(|d| d.volume).sum();
        checks.push(Check::new(format!("{name} domain volume sum"), rel(sum, total), 1e-12));
        let mut share = vec![0.0; mesh.num_elements()];
        for d in domains {
            for m in &d.members {
                share[m.element] += m.weight * d.volume;
            }
        }
        let worst = share
            .iter()
            .zip(mesh.volumes())
            .map(|(s, v)| rel(*s, *v))
            .fold(0.0, f64::max);
        checks.push(Check::new(format!("{name} per-element audit"), worst, 1e-12));
    }
    Ok(SuiteReport {
        suite: "volumes".into(),
        checks,
    })
}

fn random_affine(rng: &mut ChaCha8Rng) -> (Mat3, Vec3, Vec3, f64) {
    let f = Mat3::identity() + Mat3::from_fn(|_, _| rng.random_range(-0.2..0.2));
    let c = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let g = Vec3::from_fn(|_, _| rng.random_range(-5.0..5.0));
    (f, c, g, rng.random_range(-10.0..10.0))
}

/// Affine displacement and linear potential are reproduced on every domain.
pub fn patch_suite(mesh: &TetMesh, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (f, c, g, phi0) = random_affine(&mut rng);
    let u: Vec<Vec3> = mesh.nodes().iter().map(|x| (f - Mat3::identity()) * x.coords + c).collect();
    let phi: Vec<f64> = mesh.nodes().iter().map(|x| g.dot(&x.coords) + phi0).collect();
    let e_exact = -f.try_inverse().expect("random affine map is invertible").transpose() * g;
    let element_f: Vec<Mat3> = (0..mesh.num_elements())
        .map(|e| element_deformation_gradient(mesh, e, &u))
        .collect();
    let mut checks = Vec::new();
    let kinds: [(&str, Vec<SmoothingDomain>); 3] = [
        ("element", build_element_domains(mesh)),
        ("face", build_face_domains(mesh)?),
        ("node", build_node_domains(mesh)),
    ];
    for (name, domains) in &kinds {
        let mut worst_f: f64 = 0.0;
        let mut worst_e: f64 = 0.0;
        for d in domains {
            let fk = smooth_deformation_gradient(d, &u)?;
            worst_f = worst_f.max((fk - f).norm() / f.norm());
            let ek = smooth_electric_field(d, mesh, &phi, &element_f)?;
            worst_e = worst_e.max((ek - e_exact).norm() / e_exact.norm());
        }
        checks.push(Check::new(format!("{name} F^k patch"), worst_f, 1e-12));
        checks.push(Check::new(format!("{name} E^k patch"), worst_e, 1e-12));
    }
    Ok(SuiteReport {
        suite: "patch".into(),
        checks,
    })
}

/// Random admissible state for the tangent check.
pub fn random_state(disc: &Discretisation, rng: &mut ChaCha8Rng) -> SystemState {
    let mut s = disc.initial_state();
    let myo = disc.material().is_myocardium();
    for u in s.u.iter_mut() {
        *u = Vec3::from_fn(|_, _| rng.random_range(-0.05..0.05));
    }
    for (p, pn) in s.phi.iter_mut().zip(s.phi_n.iter_mut()) {
        if myo {
            *p = rng.random_range(-85.0..25.0);
            *pn = *p + rng.random_range(-5.0..5.0);
        } else {
            *p = rng.random_range(-20.0..20.0);
            *pn = *p;
        }
    }
    for t in s.tension.iter_mut() {
        *t = rng.random_range(0.0..1.0);
    }
    for r in s.recovery.iter_mut() {
        *r = rng.random_range(0.0..0.5);
    }
    s
}

/// Relative Frobenius error between the assembled tangent and central
/// differences of `-R`.
pub fn tangent_fd_error(disc: &Discretisation, state: &SystemState, dt: f64) -> Result<f64> {
    let dofs = DofMap::new(disc.num_nodes());
    let k = assemble(disc, state, dt, &dofs)?.matrix.to_dense();
    let n = disc.num_dofs();
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..n {
        let h = if j % 4 == 3 { 1e-4 } else { 1e-6 };
        let mut plus = state.clone();
        plus.set_dof(j, state.dof(j) + h);
        let mut minus = state.clone();
        minus.set_dof(j, state.dof(j) - h);
        let rp = assemble(disc, &plus, dt, &dofs)?.residual;
        let rm = assemble(disc, &minus, dt, &dofs)?.residual;
        for i in 0..n {
            let fd = -(rp[i] - rm[i]) / (2.0 * h);
            num += (k[i][j] - fd).powi(2);
            den += k[i][j].powi(2);
        }
    }
    Ok((num / den).sqrt())
}

/// Small discretisation used by the tangent suite: a 6-tet cube or an 8-hex cube.
pub fn tangent_test_discretisation(method: Method, material: Material) -> Result<Discretisation> {
    let l = 1.0;
    let mesh = if method.needs_hex_mesh() {
        Mesh::Hex(cube_hex_mesh(l, 3)?)
    } else {
        Mesh::Tet(cube_tet_mesh(l, 2)?)
    };
    let rule = FiberRule::new(l);
    Discretisation::new(mesh, MethodConfig { method, material }, &|x| rule.frame(x))
}

pub fn default_materials() -> [Material; 2] {
    [
        Material::Dielectric(DielectricParams::default()),
        Material::Myocardium(MyoMaterial::default()),
    ]
}

/// Global tangent against finite differences for every method and material.
pub fn tangents_suite(states: usize, seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for material in default_materials() {
        let mat_name = if material.is_myocardium() { "myocardium" } else { "dielectric" };
        for method in Method::ALL {
            let disc = tangent_test_discretisation(method, material)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..states {
                let s = random_state(&disc, &mut rng);
                worst = worst.max(tangent_fd_error(&disc, &s, 1.0)?);
            }
            checks.push(Check::new(format!("{method} {mat_name}"), worst, 1e-4));
        }
    }
    Ok(SuiteReport {
        suite: "tangents".into(),
        checks,
    })
}

/// `∂P/∂F` by central differences.
fn dpiola_fd(f: &Mat3, h: f64, p: impl Fn(&Mat3) -> Mat3) -> Tensor4 {
    let mut out = Tensor4::zeros();
    for k in 0..3 {
        for l in 0..3 {
            let mut fp = *f;
            fp[(k, l)] += h;
            let mut fm = *f;
            fm[(k, l)] -= h;
            let d = (p(&fp) - p(&fm)) / (2.0 * h);
            for i in 0..3 {
                for j in 0..3 {
                    out[(i, j, k, l)] = d[(i, j)];
                }
            }
        }
    }
    out
}

/// Isochoric Cauchy stress `J⁻¹ ∂Ψ/∂F Fᵀ` from Richardson-extrapolated central differences of the energy.
fn ho_energy_oracle(f: &Mat3, frame: &FiberFrame, p: &HoParams) -> Result<Mat3> {
    let psi = |g: &Mat3| kinematics(*g).map(|k| ho_energy(&k, frame, p));
    let mut dpsi = Mat3::zeros();
    for k in 0..3 {
        for l in 0..3 {
            let diff = |h: f64| -> Result<f64> {
                let mut fp = *f;
                fp[(k, l)] += h;
                let mut fm = *f;
                fm[(k, l)] -= h;
                Ok((psi(&fp)? - psi(&fm)?) / (2.0 * h))
            };
            let h = 1e-3;
            dpsi[(k, l)] = (4.0 * diff(h / 2.0)? - diff(h)?) / 3.0;
        }
    }
    Ok(dpsi * f.transpose() / f.determinant())
}

fn random_gradient(rng: &mut ChaCha8Rng) -> Mat3 {
    Mat3::identity() + Mat3::from_fn(|_, _| rng.random_range(-0.2 / 3.0..0.2 / 3.0))
}

/// Analytic stresses and sensitivities of both materials against energy and
/// finite-difference oracles, plus the switch-function limits and the active
/// tension fixed point.
pub fn constitutive_suite(states: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ho = HoParams::default();
    let active = ActiveParams::default();
    let ap = ApParams::default();
    let diel = DielectricParams::default();
    let rel_norm = |d: f64, n: f64| d / n.max(1e-300);
    let (mut w_energy, mut w_ho, mut w_diel_uu, mut w_diel_uphi) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut w_tension, mut w_active, mut w_ap) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..states {
        let f = random_gradient(&mut rng);
        let angle: f64 = rng.random_range(-1.5..1.5);
        let frame = FiberFrame::from_fiber_sheet(Vec3::new(angle.cos(), angle.sin(), 0.0), Vec3::z())?;
        let kin = kinematics(f)?;

        let iso = ho_stress_parts(&kin, &frame, &ho).iso;
        let oracle = ho_energy_oracle(&f, &frame, &ho)?;
        w_energy = w_energy.max(max_abs(&(iso - oracle)) / max_abs(&iso).max(1e-3));

        let s = ho_passive_stress(&kin, &frame, &ho);
        let a = material_tangent(&f, &s, &ho_tangent(&kin, &frame, &ho));
        let a_fd = dpiola_fd(&f, 1e-6, |g| piola(g, &ho_passive_stress(&kinematics(*g).unwrap(), &frame, &ho)));
        w_ho = w_ho.max(rel_norm((a - a_fd).norm(), a.norm()));

        let e = Vec3::from_fn(|_, _| rng.random_range(-115.0..115.0));
        let kin_e = kin.with_field(e);
        let t = dielectric_tangents(&kin_e, &diel);
        let e0 = f.transpose() * e;
        let sigma_at = |g: &Mat3| {
            let eg = g.try_inverse().unwrap().transpose() * e0;
            dielectric_stress(&kinematics(*g).unwrap().with_field(eg), &diel)
        };
        let a = material_tangent(&f, &dielectric_stress(&kin_e, &diel), &t.c_uu());
        let a_fd = dpiola_fd(&f, 1e-6, |g| piola(g, &sigma_at(g)));
        w_diel_uu = w_diel_uu.max(rel_norm((a - a_fd).norm(), a.norm()));
        let h = 1e-6 * e.norm().max(1.0);
        let mut fd = Tensor3::zeros();
        for q in 0..3 {
            let mut ep = e;
            ep[q] += h;
            let mut em = e;
            em[q] -= h;
            let d = (dielectric_stress(&kin.with_field(ep), &diel) - dielectric_stress(&kin.with_field(em), &diel))
                / (2.0 * h);
            for i in 0..3 {
                for j in 0..3 {
                    fd[(i, j, q)] = -d[(i, j)];
                }
            }
        }
        w_diel_uphi = w_diel_uphi.max(rel_norm((fd - t.c_uphi).norm(), t.c_uphi.norm()));

        let phi = rng.random_range(-90.0..20.0);
        let t_n = rng.random_range(0.0..0.5);
        let h = 1e-5;
        let (_, dtdphi) = active_tension_step(t_n, phi, 1.0, &active);
        let tension = |phi: f64| active_tension_step(t_n, phi, 1.0, &active).0;
        let fd = (tension(phi + h) - tension(phi - h)) / (2.0 * h);
        w_tension = w_tension.max(rel_norm((fd - dtdphi).abs(), dtdphi.abs()));
        let ds = myo_active_stress(&kin, dtdphi, &frame.f0);
        let fd = (myo_active_stress(&kin, tension(phi + h), &frame.f0)
            - myo_active_stress(&kin, tension(phi - h), &frame.f0))
            / (2.0 * h);
        w_active = w_active.max(max_abs(&(fd - ds)) / max_abs(&ds).max(1e-12));

        let r = rng.random_range(0.0..1.0);
        let di = ap_source(phi, r, 1.0, &ap).dcurrent_dphi;
        let fd = (ap_source(phi + h, r, 1.0, &ap).current - ap_source(phi - h, r, 1.0, &ap).current) / (2.0 * h);
        w_ap = w_ap.max(rel_norm((fd - di).abs(), di.abs().max(1e-6)));
    }

    let limits = (switch_function(-1e4, &active) - active.a0).abs() + (switch_function(1e4, &active) - active.a_inf).abs();
    let mut t = 0.0;
    for _ in 0..10_000 {
        t = active_tension_step(t, 20.0, 1.0, &active).0;
    }
    let t_inf = active.k_t * (20.0 - active.phi_r);

    Ok(SuiteReport {
        suite: "constitutive".into(),
        checks: vec![
            Check::new("ho stress vs energy", w_energy, 1e-8),
            Check::new("ho tangent vs fd", w_ho, 1e-5),
            Check::new("dielectric c_uu vs fd", w_diel_uu, 1e-5),
            Check::new("dielectric c_uphi vs fd", w_diel_uphi, 1e-5),
            Check::new("active tension dT/dphi vs fd", w_tension, 1e-5),
            Check::new("active stress dsigma/dphi vs fd", w_active, 1e-5),
            Check::new("ap source dI/dphi vs fd", w_ap, 1e-5),
            Check::new("switch function limits", limits, 1e-10),
            Check::new("tension fixed point at 20 mV", (t - 0.5).abs() + (t_inf - 0.5).abs(), 1e-10),
        ],
    })
}


#[cfg(test)]
mod tangent_tests {
    use super::*;

    #[test]
    fn tangents_match_finite_differences() {
        let r = tangents_suite(1, 11).unwrap();
        print!("{r}");
        assert!(r.passed(), "{r}");
    }
}
