//! Implicit time stepping with a monolithic Newton scheme over `(u, φ)`.

mod linear;
mod schedule;

use std::fmt;

pub use linear::{linear_solve, solve_residual, LinearSolver, SOLVE_TOLERANCE};
pub use schedule::{BoundarySchedule, Constraint, DofKind, Profile, Step};

use crate::assembly::{assemble, Discretisation, DofMap};
use crate::error::{Error, Result};
use crate::tensor::Vec3;

/// Nodal unknowns plus the myocardium history.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    /// [ms]
    pub time: f64,
    /// [mm]
    pub u: Vec<Vec3>,
    /// [mV]
    pub phi: Vec<f64>,
    /// Potential at the last accepted step.
    pub phi_n: Vec<f64>,
    /// Active tension at the last accepted step, per stress cell [kPa].
    pub tension: Vec<f64>,
    /// Aliev-Panfilov recovery variable, per source cell.
    pub recovery: Vec<f64>,
}

impl SystemState {
    pub fn new(num_nodes: usize, num_stress: usize, num_source: usize) -> Self {
        SystemState {
            time: 0.0,
            u: vec![Vec3::zeros(); num_nodes],
            phi: vec![0.0; num_nodes],
            phi_n: vec![0.0; num_nodes],
            tension: vec![0.0; num_stress],
            recovery: vec![0.0; num_source],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.u.len()
    }

    pub fn dof(&self, dof: usize) -> f64 {
        let (n, c) = (dof / 4, dof % 4);
        if c == 3 {
            self.phi[n]
        } else {
            self.u[n][c]
        }
    }

    pub fn set_dof(&mut self, dof: usize, v: f64) {
        let (n, c) = (dof / 4, dof % 4);
        if c == 3 {
            self.phi[n] = v;
        } else {
            self.u[n][c] = v;
        }
    }

    /// `x ← x + Δx` over all dofs.
    pub fn add_increment(&mut self, dx: &[f64]) {
        for (n, d) in dx.chunks_exact(4).enumerate() {
            self.u[n] += Vec3::new(d[0], d[1], d[2]);
            self.phi[n] += d[3];
        }
    }

    /// Sets the potential everywhere and snapshots it as the previous step.
    pub fn fill_potential(&mut self, v: f64) {
        self.phi.fill(v);
        self.phi_n.fill(v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// [ms]
    pub dt: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_iter: 25,
            dt: 1.0,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_iter >= 1) {
            return Err(Error::InvalidParameter(
                "Newton tolerances must be positive and max_iter at least 1".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidTimeStep(self.dt));
        }
        Ok(())
    }
}

/// Residual norms of one Newton solve, one per assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub residuals: Vec<f64>,
}

impl NewtonReport {
    /// Number of assemblies (a zero-load solve takes one).
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().unwrap_or(&0.0)
    }

    /// Ratios `r_{k+1} / r_k^q` over the history, skipping zero residuals.
    pub fn convergence_ratios(&self, q: f64) -> Vec<f64> {
        self.residuals
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0].powf(q))
            .collect()
    }
}

/// Iterates `K Δx = R`, `x ← x + Δx` until `‖R_free‖ < max(abs_tol, rel_tol ‖R_0‖)`.
/// Constrained dofs must already hold their prescribed values.
pub fn newton_solve(
    disc: &Discretisation,
    state: &mut SystemState,
    dofs: &DofMap,
    settings: &NewtonSettings,
    solver: &mut LinearSolver,
) -> Result<NewtonReport> {
    settings.validate()?;
    let mut residuals = Vec::new();
    let mut tol = settings.abs_tol;
    for it in 0..settings.max_iter {
        let sys = assemble(disc, state, settings.dt, dofs)?;
        let norm = sys.residual_norm();
        if !norm.is_finite() {
            return Err(Error::SingularDeformation);
        }
        residuals.push(norm);
        if it == 0 {
            tol = tol.max(settings.rel_tol * norm);
        }
        if norm < tol {
            return Ok(NewtonReport { residuals });
        }
        let dx = solver.solve(&sys.matrix, &sys.residual)?;
        state.add_increment(&dx);
    }
    let sys = assemble(disc, state, settings.dt, dofs)?;
    let norm = sys.residual_norm();
    if norm < tol {
        residuals.push(norm);
        return Ok(NewtonReport { residuals });
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iter,
        residual: norm,
    })
}

/// Progress record of one accepted increment.
#[derive(Debug, Clone, PartialEq)]
pub struct StepLog {
    pub step: usize,
    pub time: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl fmt::Display for StepLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step={} t={} iters={} res={:.6e}",
            self.step, self.time, self.iterations, self.residual
        )
    }
}

/// Callbacks of [`time_loop`].
pub trait Observer {
    /// Called after every accepted increment.
    fn on_step(&mut self, _log: &StepLog) {}
    /// Called at `t = 0` and at every output instant.
    fn on_output(&mut self, _state: &SystemState) -> Result<()> {
        Ok(())
    }
}

/// Observer that ignores everything.
pub struct Silent;

impl Observer for Silent {}

/// Output control of [`time_loop`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeLoopSettings {
    pub newton: NewtonSettings,
    /// [ms]
    pub output_interval: f64,
}

impl Default for TimeLoopSettings {
    fn default() -> Self {
        TimeLoopSettings {
            newton: NewtonSettings::default(),
            output_interval: 5.0,
        }
    }
}

fn whole_multiple(total: f64, unit: f64) -> Option<usize> {
    let n = (total / unit).round();
    ((total - n * unit).abs() <= 1e-9 * total.abs().max(1.0) && n >= 1.0).then_some(n as usize)
}

/// Runs every step of `schedule` from `state` with a fixed increment.
///
/// After each converged increment the history is advanced and `φ_n ← φ`.
pub fn time_loop(
    disc: &Discretisation,
    schedule: &BoundarySchedule,
    state: &mut SystemState,
    settings: &TimeLoopSettings,
    observer: &mut dyn Observer,
) -> Result<Vec<StepLog>> {
    let dt = settings.newton.dt;
    settings.newton.validate()?;
    let sets = disc.mesh().node_sets();
    schedule.validate(sets)?;
    let per_output = whole_multiple(settings.output_interval, dt).ok_or(Error::InvalidTimeStep(dt))?;

    let mut solver = LinearSolver::new();
    let mut logs = Vec::new();
    let t0 = state.time;
    let mut increment = 0usize;
    observer.on_output(state)?;
    let mut step_start = t0;
    for (s, step) in schedule.steps.iter().enumerate() {
        let n_inc = whole_multiple(step.duration, dt).ok_or(Error::InvalidTimeStep(dt))?;
        let dofs = schedule.dof_map(s, sets, disc.num_nodes())?;
        for i in 1..=n_inc {
            increment += 1;
            let t = step_start + i as f64 * dt;
            for (dof, v) in schedule.prescribed(s, sets, t)? {
                state.set_dof(dof, v);
            }
            let report = newton_solve(disc, state, &dofs, &settings.newton, &mut solver).map_err(|e| {
                Error::StepFailed {
                    step: increment,
                    time: t,
                    source: Box::new(e),
                }
            })?;
            state.time = t;
            disc.advance_history(state, dt);
            let log = StepLog {
                step: increment,
                time: t,
                iterations: report.iterations(),
                residual: report.final_residual(),
            };
            log::debug!("{log}");
            observer.on_step(&log);
            logs.push(log);
            if increment % per_output == 0 {
                observer.on_output(state)?;
            }
        }
        step_start += n_inc as f64 * dt;
    }
    Ok(logs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{Material, Method, MethodConfig};
    use crate::constitutive::DielectricParams;
    use crate::mesh::Mesh;
    use crate::scenarios::{cube_tet_mesh, FiberRule};

    fn dielectric_cube(method: Method) -> Discretisation {
        let mesh = Mesh::Tet(cube_tet_mesh(1.0, 3).unwrap());
        let rule = FiberRule::new(1.0);
        let config = MethodConfig {
            method,
            material: Material::Dielectric(DielectricParams::default()),
        };
        Discretisation::new(mesh, config, &|x| rule.frame(x)).unwrap()
    }

    /// Clamps `xmin`, grounds `zmax` and drives `zmin` to `volts`.
    fn loaded(disc: &Discretisation, volts: f64) -> (DofMap, SystemState) {
        let sets = disc.mesh().node_sets();
        let mut dofs = DofMap::new(disc.num_nodes());
        let mut state = disc.initial_state();
        for &n in &sets["xmin"] {
            (0..3).for_each(|c| dofs.fix(n, c));
        }
        for &n in &sets["zmax"] {
            dofs.fix(n, 3);
        }
        for &n in &sets["zmin"] {
            dofs.fix(n, 3);
            state.phi[n] = volts;
        }
        (dofs, state)
    }

    fn schedule(volts: f64) -> BoundarySchedule {
        let clamp = |c| Constraint::new("xmin", c, Profile::constant(0.0));
        BoundarySchedule::new(vec![Step {
            name: "load".into(),
            duration: 4.0,
            constraints: vec![
                clamp(DofKind::Ux),
                clamp(DofKind::Uy),
                clamp(DofKind::Uz),
                Constraint::new("zmax", DofKind::Potential, Profile::constant(0.0)),
                Constraint::new("zmin", DofKind::Potential, Profile::ramp(0.0, 0.0, 4.0, volts).unwrap()),
            ],
        }])
    }

    #[test]
    fn newton_converges_quadratically() {
        let disc = dielectric_cube(Method::Fsns);
        let (dofs, mut state) = loaded(&disc, 30.0);
        let report = newton_solve(&disc, &mut state, &dofs, &NewtonSettings::default(), &mut LinearSolver::new()).unwrap();
        let r0 = report.residuals[0];
        let rel: Vec<f64> = report.residuals.iter().map(|r| r / r0).collect();
        assert!(report.iterations() <= 8, "{rel:?}");
        assert!(state.u.iter().any(|u| u.norm() > 1e-3));
        // once in the basin, each step squares the relative residual
        let tail: Vec<&[f64]> = rel.windows(2).filter(|w| w[0] < 1e-2 && w[1] > 1e-14).collect();
        assert!(!tail.is_empty(), "{rel:?}");
        for w in tail {
            assert!(w[1] < 10.0 * w[0] * w[0], "{rel:?}");
        }
    }

    #[test]
    fn halved_tangent_loses_convergence() {
        let disc = dielectric_cube(Method::Fsns);
        let (dofs, mut state) = loaded(&disc, 30.0);
        let mut solver = LinearSolver::new();
        let r0 = assemble(&disc, &state, 1.0, &dofs).unwrap().residual_norm();
        let mut converged = false;
        for _ in 0..8 {
            // an inverted element also ends the iteration without convergence
            let Ok(mut sys) = assemble(&disc, &state, 1.0, &dofs) else { break };
            if sys.residual_norm() < 1e-8 * r0 {
                converged = true;
                break;
            }
            sys.matrix.scale(0.5);
            let dx = solver.solve(&sys.matrix, &sys.residual).unwrap();
            state.add_increment(&dx);
        }
        assert!(!converged);
    }

    #[test]
    fn zero_load_needs_one_assembly() {
        let disc = dielectric_cube(Method::Tet);
        let (dofs, mut state) = loaded(&disc, 0.0);
        let report = newton_solve(&disc, &mut state, &dofs, &NewtonSettings::default(), &mut LinearSolver::new()).unwrap();
        assert_eq!(report.iterations(), 1);
        assert_eq!(report.final_residual(), 0.0);
    }

    #[test]
    fn nonconvergence_is_reported() {
        let disc = dielectric_cube(Method::Tet);
        let (dofs, mut state) = loaded(&disc, 30.0);
        let settings = NewtonSettings {
            max_iter: 1,
            ..NewtonSettings::default()
        };
        let err = newton_solve(&disc, &mut state, &dofs, &settings, &mut LinearSolver::new()).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 1, .. }));
    }

    #[test]
    fn zero_boundary_data_gives_zero_trajectory() {
        let disc = dielectric_cube(Method::Ns);
        let mut state = disc.initial_state();
        let logs = time_loop(&disc, &schedule(0.0), &mut state, &TimeLoopSettings::default(), &mut Silent).unwrap();
        assert_eq!(logs.len(), 4);
        assert!(logs.iter().all(|l| l.iterations == 1));
        assert!(state.u.iter().all(|u| *u == Vec3::zeros()));
        assert!(state.phi.iter().all(|p| *p == 0.0));
        assert_eq!(state.time, 4.0);
    }

    struct Recorder {
        outputs: Vec<f64>,
        steps: usize,
    }

    impl Observer for Recorder {
        fn on_step(&mut self, _log: &StepLog) {
            self.steps += 1;
        }
        fn on_output(&mut self, state: &SystemState) -> Result<()> {
            self.outputs.push(state.time);
            Ok(())
        }
    }

    #[test]
    fn time_loop_reports_steps_and_outputs() {
        let disc = dielectric_cube(Method::Fs);
        let mut state = disc.initial_state();
        let settings = TimeLoopSettings {
            newton: NewtonSettings {
                dt: 0.5,
                ..NewtonSettings::default()
            },
            output_interval: 1.0,
        };
        let mut rec = Recorder {
            outputs: Vec::new(),
            steps: 0,
        };
        let logs = time_loop(&disc, &schedule(20.0), &mut state, &settings, &mut rec).unwrap();
        assert_eq!(rec.steps, 8);
        assert_eq!(rec.outputs, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(logs[0].to_string().split_whitespace().next(), Some("step=1"));
        assert!(logs[7].to_string().starts_with("step=8 t=4 iters="));
        let top = disc.mesh().node_sets()["zmin"][0];
        assert_eq!(state.phi[top], 20.0);
    }

    #[test]
    fn time_step_must_divide_durations() {
        let disc = dielectric_cube(Method::Tet);
        let mut state = disc.initial_state();
        let settings = TimeLoopSettings {
            newton: NewtonSettings {
                dt: 0.3,
                ..NewtonSettings::default()
            },
            output_interval: 0.3,
        };
        let err = time_loop(&disc, &schedule(1.0), &mut state, &settings, &mut Silent).unwrap_err();
        assert!(matches!(err, Error::InvalidTimeStep(_)));
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let disc = dielectric_cube(Method::Fsns);
        let run = || {
            let mut state = disc.initial_state();
            time_loop(&disc, &schedule(25.0), &mut state, &TimeLoopSettings::default(), &mut Silent).unwrap();
            state
        };
        let (a, b) = (run(), run());
        assert!(a.u.iter().zip(&b.u).all(|(x, y)| x.iter().zip(y.iter()).all(|(p, q)| p.to_bits() == q.to_bits())));
        assert!(a.phi.iter().zip(&b.phi).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
