use std::path::PathBuf;
use std::time::{Duration, Instant};

use super::output::{avg_surface_displacement, write_vtk, OutputCurve};
use super::problem::Problem;
use crate::error::Result;
use crate::solver::{time_loop, NewtonSettings, Observer, StepLog, SystemState, TimeLoopSettings};

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub curve: OutputCurve,
    pub logs: Vec<StepLog>,
    pub final_state: SystemState,
    pub wall_time: Duration,
}

impl RunOutput {
    pub fn total_iterations(&self) -> usize {
        self.logs.iter().map(|l| l.iterations).sum()
    }
}

struct Recorder<'a> {
    problem: &'a Problem,
    nodes: &'a [usize],
    curve: OutputCurve,
    vtk_dir: Option<PathBuf>,
    frame: usize,
    progress: &'a mut dyn FnMut(&StepLog),
}

impl Observer for Recorder<'_> {
    fn on_step(&mut self, log: &StepLog) {
        (self.progress)(log);
    }

    fn on_output(&mut self, state: &SystemState) -> Result<()> {
        let v = avg_surface_displacement(state, self.nodes, &self.problem.output_set)?;
        self.curve.push(state.time, v);
        if let Some(dir) = &self.vtk_dir {
            write_vtk(state, self.problem.disc.mesh(), &dir.join(format!("state_{:04}.vtk", self.frame)))?;
        }
        self.frame += 1;
        Ok(())
    }
}

/// Runs `problem` to completion. VTK snapshots go to `vtk_dir` when given;
/// `progress` sees every accepted increment.
pub fn run_problem(
    problem: &Problem,
    vtk_dir: Option<PathBuf>,
    progress: &mut dyn FnMut(&StepLog),
) -> Result<RunOutput> {
    let c = &problem.config;
    let settings = TimeLoopSettings {
        newton: NewtonSettings {
            abs_tol: c.newton.abs_tol,
            rel_tol: c.newton.rel_tol,
            max_iter: c.newton.max_iter,
            dt: c.dt,
        },
        output_interval: c.output_interval,
    };
    let nodes = &problem.disc.mesh().node_sets()[&problem.output_set];
    let mut state = problem.initial.clone();
    let mut rec = Recorder {
        problem,
        nodes,
        curve: OutputCurve::default(),
        vtk_dir,
        frame: 0,
        progress,
    };
    let start = Instant::now();
    let logs = time_loop(&problem.disc, &problem.schedule, &mut state, &settings, &mut rec)?;
    Ok(RunOutput {
        curve: rec.curve,
        logs,
        final_state: state,
        wall_time: start.elapsed(),
    })
}
