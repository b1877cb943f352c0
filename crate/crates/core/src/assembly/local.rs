use super::cells::{SourceCell, StressCell};
use super::Material;
use crate::constitutive::{
    active_tension_step, ap_source, dielectric_stress_parts, dielectric_tangents, electric_displacement, flux,
    ho_stress_parts, ho_tangent_parts, kinematics, myo_active_stress, volumetric, Parts,
};
use crate::error::{Error, Result};
use crate::solver::SystemState;
use crate::tensor::{Mat3, Tensor3, Tensor4, Vec3};

/// Residual and dense tangent of one cell over its support nodes.
///
/// Rows and columns of `tangent` are ordered `(4a + i)` with `i ∈ {u_x, u_y, u_z, φ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalContribution {
    pub nodes: Vec<usize>,
    pub residual: Vec<[f64; 4]>,
    pub tangent: Vec<f64>,
}

impl LocalContribution {
    fn zeros(nodes: Vec<usize>) -> Self {
        let n = nodes.len();
        LocalContribution {
            nodes,
            residual: vec![[0.0; 4]; n],
            tangent: vec![0.0; 16 * n * n],
        }
    }

    #[inline]
    fn k_mut(&mut self, a: usize, i: usize, b: usize, k: usize) -> &mut f64 {
        let n = 4 * self.nodes.len();
        &mut self.tangent[(4 * a + i) * n + 4 * b + k]
    }

    pub fn k(&self, a: usize, i: usize, b: usize, k: usize) -> f64 {
        let n = 4 * self.nodes.len();
        self.tangent[(4 * a + i) * n + 4 * b + k]
    }

    /// Displacement-displacement block of the node pair `(a, b)`.
    pub fn k_uu(&self, a: usize, b: usize) -> Mat3 {
        Mat3::from_fn(|i, k| self.k(a, i, b, k))
    }

    pub fn k_uphi(&self, a: usize, b: usize) -> Vec3 {
        Vec3::from_fn(|i, _| self.k(a, i, b, 3))
    }

    pub fn k_phiu(&self, a: usize, b: usize) -> Vec3 {
        Vec3::from_fn(|k, _| self.k(a, 3, b, k))
    }

    pub fn k_phiphi(&self, a: usize, b: usize) -> f64 {
        self.k(a, 3, b, 3)
    }
}

/// `R^a_u = -(σ ∇N^a) J V` for every node.
pub fn residual_mech(spatial_grads: &[Vec3], sigma: &Mat3, jv: f64) -> Vec<Vec3> {
    spatial_grads.iter().map(|g| -(sigma * g) * jv).collect()
}

/// `R^a_φ = (∇N^a · Q) J V` for a displacement or flux vector `Q`.
pub fn residual_elec(spatial_grads: &[Vec3], q: &Vec3, jv: f64) -> Vec<f64> {
    spatial_grads.iter().map(|g| g.dot(q) * jv).collect()
}

/// Constitutive response at a cell, restricted to its selection.
struct Response {
    sigma: Mat3,
    c: Tensor4,
    /// `∂σ_ij/∂E_p`
    dsigma_de: Option<Tensor3>,
    /// `∂σ/∂φ` of the cell potential
    dsigma_dphi: Option<Mat3>,
    q: Vec3,
    dq_de: Mat3,
}

fn select<T: Copy + std::ops::Add<Output = T>>(parts: &Parts<T>, cell: &StressCell, zero: T) -> T {
    let s = cell.selection;
    let mut out = zero;
    if s.active() {
        out = out + parts.act;
    }
    if s.volumetric() {
        out = out + parts.vol;
    }
    if s.isochoric() {
        out = out + parts.iso;
    }
    out
}

pub(crate) fn evaluate_stress_cell(
    material: &Material,
    cell: &StressCell,
    index: usize,
    state: &SystemState,
    dt: f64,
) -> Result<LocalContribution> {
    let g = &cell.geometry;
    let ns = g.support.len();
    let u = &state.u;
    let phi = &state.phi;

    let f = g
        .support
        .iter()
        .zip(&g.grads)
        .fold(Mat3::identity(), |f, (&n, gr)| f + u[n] * gr.transpose());
    let det = f.determinant();
    if !(det > 0.0) {
        return Err(Error::Inverted { cell: index, det });
    }
    let kin = kinematics(f).map_err(|_| Error::Inverted { cell: index, det })?;
    let finv_t = kin.f_inv.transpose();
    let dn: Vec<Vec3> = g.grads.iter().map(|gr| finv_t * gr).collect();
    let jv = kin.j * g.volume;

    // electric field as the weighted mean of member fields, with its sensitivities
    let electric = cell.selection.electric();
    let mut e = Vec3::zeros();
    let mut h = vec![Vec3::zeros(); ns];
    let mut m = vec![Mat3::zeros(); ns];
    if electric {
        for mem in &g.members {
            let fm = mem
                .local
                .iter()
                .zip(&mem.grads)
                .fold(Mat3::identity(), |f, (&l, gr)| f + u[g.support[l]] * gr.transpose());
            let fm_inv_t = fm.try_inverse().ok_or(Error::SingularDeformation)?.transpose();
            let hm: Vec<Vec3> = mem.grads.iter().map(|gr| fm_inv_t * gr).collect();
            let em = -mem
                .local
                .iter()
                .zip(&hm)
                .fold(Vec3::zeros(), |s, (&l, hv)| s + hv * phi[g.support[l]]);
            e += em * mem.weight;
            for (&l, hv) in mem.local.iter().zip(&hm) {
                h[l] += hv * mem.weight;
                m[l] -= hv * em.transpose() * mem.weight;
            }
        }
    }
    let kin = kin.with_field(e);

    let resp = match material {
        Material::Dielectric(p) => {
            let s = dielectric_stress_parts(&kin, p);
            let t = dielectric_tangents(&kin, p);
            Response {
                sigma: select(&s, cell, Mat3::zeros()),
                c: select(&t.c, cell, Tensor4::zeros()),
                dsigma_de: cell.selection.active().then(|| t.c_uphi.scaled(-1.0)),
                dsigma_dphi: None,
                q: electric_displacement(&e, p.eps),
                dq_de: Mat3::identity() * p.eps,
            }
        }
        Material::Myocardium(p) if !cell.selection.isochoric() => {
            let (sigma, c) = volumetric(p.ho.kappa, kin.j);
            Response {
                sigma,
                c,
                dsigma_de: None,
                dsigma_dphi: None,
                q: flux(&e, p.conductivity),
                dq_de: Mat3::identity() * -p.conductivity,
            }
        }
        Material::Myocardium(p) => {
            let frame = cell.frame.as_ref().expect("myocardium stress cells carry a fiber frame");
            let mut s = ho_stress_parts(&kin, frame, &p.ho);
            let c = ho_tangent_parts(&kin, frame, &p.ho);
            let mut dsigma_dphi = None;
            if cell.selection.active() {
                if !(dt > 0.0) {
                    return Err(Error::InvalidTimeStep(dt));
                }
                let (t, dtdphi) = active_tension_step(state.tension[index], g.potential(phi), dt, &p.active);
                s.act = myo_active_stress(&kin, t, &frame.f0);
                dsigma_dphi = Some(myo_active_stress(&kin, dtdphi, &frame.f0));
            }
            Response {
                sigma: select(&s, cell, Mat3::zeros()),
                c: select(&c, cell, Tensor4::zeros()),
                dsigma_de: None,
                dsigma_dphi,
                q: flux(&e, p.conductivity),
                dq_de: Mat3::identity() * -p.conductivity,
            }
        }
    };

    let mut out = LocalContribution::zeros(g.support.clone());
    for (a, r) in residual_mech(&dn, &resp.sigma, jv).into_iter().enumerate() {
        out.residual[a][..3].copy_from_slice(r.as_slice());
    }
    if electric {
        for (a, r) in residual_elec(&dn, &resp.q, jv).into_iter().enumerate() {
            out.residual[a][3] = r;
        }
    }

    // c_ijkl ∇N^b_l per node
    let cb: Vec<Tensor3> = dn
        .iter()
        .map(|d| Tensor3::from_fn(|i, j, k| (0..3).map(|l| resp.c[(i, j, k, l)] * d[l]).sum()))
        .collect();
    let sig_dn: Vec<Vec3> = dn.iter().map(|d| resp.sigma * d).collect();
    // ∂σ_ij/∂E_p ΔM^b_pk and ∂σ_ij/∂E_p h^b_p
    let (x_b, y_b): (Vec<Tensor3>, Vec<Mat3>) = match &resp.dsigma_de {
        Some(ds) => (0..ns)
            .map(|b| {
                let dm = m[b] + dn[b] * e.transpose();
                let x = Tensor3::from_fn(|i, j, k| (0..3).map(|p| ds[(i, j, p)] * dm[(p, k)]).sum());
                let y = Mat3::from_fn(|i, j| (0..3).map(|p| ds[(i, j, p)] * h[b][p]).sum());
                (x, y)
            })
            .unzip(),
        None => (Vec::new(), Vec::new()),
    };

    for a in 0..ns {
        let da = dn[a];
        let dqa = resp.dq_de.transpose() * da;
        let qa = da.dot(&resp.q);
        for b in 0..ns {
            let geo = da.dot(&sig_dn[b]);
            for i in 0..3 {
                for k in 0..3 {
                    let mut v: f64 = (0..3).map(|j| da[j] * cb[b][(i, j, k)]).sum();
                    if i == k {
                        v += geo;
                    }
                    if let Some(x) = x_b.get(b) {
                        v += (0..3).map(|j| da[j] * x[(i, j, k)]).sum::<f64>();
                    }
                    *out.k_mut(a, i, b, k) = jv * v;
                }
            }
            if let Some(y) = y_b.get(b) {
                let v = y * da;
                for i in 0..3 {
                    *out.k_mut(a, i, b, 3) = -jv * v[i];
                }
            }
            if let Some(ds) = &resp.dsigma_dphi {
                let v = ds * da * g.values[b];
                for i in 0..3 {
                    *out.k_mut(a, i, b, 3) += jv * v[i];
                }
            }
            if electric {
                let mq = m[b].transpose() * dqa;
                let qb = dn[b].dot(&resp.q);
                for k in 0..3 {
                    *out.k_mut(a, 3, b, k) = -jv * (qa * dn[b][k] - da[k] * qb + mq[k]);
                }
                *out.k_mut(a, 3, b, 3) = jv * dqa.dot(&h[b]);
            }
        }
    }
    Ok(out)
}

pub(crate) fn evaluate_source_cell(
    material: &Material,
    cell: &SourceCell,
    index: usize,
    state: &SystemState,
    dt: f64,
) -> Result<LocalContribution> {
    let Material::Myocardium(p) = material else {
        return Ok(LocalContribution::zeros(cell.nodes.clone()));
    };
    if !(dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let n = cell.nodes.len();
    let src = ap_source(cell.potential(&state.phi), state.recovery[index], dt, &p.ap);
    let mut out = LocalContribution::zeros(cell.nodes.clone());
    for a in 0..n {
        let mut r = -cell.weights[a] * src.current;
        for b in 0..n {
            let mab = cell.mass[a * n + b];
            let nb = cell.nodes[b];
            r += mab * (state.phi[nb] - state.phi_n[nb]) / dt;
            *out.k_mut(a, 3, b, 3) = -mab / dt + cell.weights[a] * src.dcurrent_dphi * cell.shape[b];
        }
        out.residual[a][3] = r;
    }
    Ok(out)
}
