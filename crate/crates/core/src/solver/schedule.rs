use serde::{Deserialize, Serialize};

use crate::assembly::DofMap;
use crate::error::{Error, Result};
use crate::mesh::NodeSets;

/// Piecewise-linear function of time, held constant outside its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    points: Vec<(f64, f64)>,
}

impl Profile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("profile needs at least one point".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("profile times must be strictly increasing".into()));
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Config("profile values must be finite".into()));
        }
        Ok(Profile { points })
    }

    pub fn constant(v: f64) -> Self {
        Profile { points: vec![(0.0, v)] }
    }

    /// Linear ramp from `(t0, v0)` to `(t1, v1)`.
    pub fn ramp(t0: f64, v0: f64, t1: f64, v1: f64) -> Result<Self> {
        Self::new(vec![(t0, v0), (t1, v1)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn eval(&self, t: f64) -> f64 {
        let p = &self.points;
        if t <= p[0].0 {
            return p[0].1;
        }
        for w in p.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if t <= t1 {
                return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
        }
        p[p.len() - 1].1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DofKind {
    Ux,
    Uy,
    Uz,
    Potential,
}

impl DofKind {
    pub fn component(&self) -> usize {
        match self {
            DofKind::Ux => 0,
            DofKind::Uy => 1,
            DofKind::Uz => 2,
            DofKind::Potential => 3,
        }
    }
}

/// Dirichlet condition on every node of a named set.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub set: String,
    pub kind: DofKind,
    /// Prescribed value against global time.
    pub profile: Profile,
}

impl Constraint {
    pub fn new(set: impl Into<String>, kind: DofKind, profile: Profile) -> Self {
        Constraint {
            set: set.into(),
            kind,
            profile,
        }
    }
}

/// A loading step of fixed duration with its own set of constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub name: String,
    /// [ms]
    pub duration: f64,
    pub constraints: Vec<Constraint>,
}

/// Sequence of steps covering the simulation window from `t = 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundarySchedule {
    pub steps: Vec<Step>,
}

impl BoundarySchedule {
    pub fn new(steps: Vec<Step>) -> Self {
        BoundarySchedule { steps }
    }

    pub fn total_duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    /// Checks durations and that every referenced set exists and is non-empty.
    pub fn validate(&self, sets: &NodeSets) -> Result<()> {
        for step in &self.steps {
            if !(step.duration > 0.0 && step.duration.is_finite()) {
                return Err(Error::Config(format!("step '{}' needs a positive duration", step.name)));
            }
            for c in &step.constraints {
                match sets.get(&c.set) {
                    None => return Err(Error::UnknownNodeSet(c.set.clone())),
                    Some(n) if n.is_empty() => return Err(Error::EmptyNodeSet(c.set.clone())),
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Dof map fixing every constrained dof of `step`.
    pub fn dof_map(&self, step: usize, sets: &NodeSets, num_nodes: usize) -> Result<DofMap> {
        let mut dofs = DofMap::new(num_nodes);
        for c in &self.steps[step].constraints {
            let nodes = sets.get(&c.set).ok_or_else(|| Error::UnknownNodeSet(c.set.clone()))?;
            for &n in nodes {
                dofs.fix(n, c.kind.component());
            }
        }
        Ok(dofs)
    }

    /// Prescribed `(dof, value)` pairs of `step` at time `t`. Later constraints
    /// override earlier ones on shared dofs.
    pub fn prescribed(&self, step: usize, sets: &NodeSets, t: f64) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::new();
        for c in &self.steps[step].constraints {
            let nodes = sets.get(&c.set).ok_or_else(|| Error::UnknownNodeSet(c.set.clone()))?;
            let v = c.profile.eval(t);
            out.extend(nodes.iter().map(|&n| (DofMap::dof(n, c.kind.component()), v)));
        }
        Ok(out)
    }

    /// Number of potential constraints in `step`.
    pub fn potential_constraint_count(&self, step: usize) -> usize {
        self.steps[step]
            .constraints
            .iter()
            .filter(|c| c.kind == DofKind::Potential)
            .count()
    }
}
