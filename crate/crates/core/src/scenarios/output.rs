use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::solver::SystemState;

/// Averaged displacement magnitude over time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputCurve {
    /// [ms]
    pub times: Vec<f64>,
    /// [mm]
    pub values: Vec<f64>,
}

pub const CSV_HEADER: &str = "time_ms,avg_disp_mm";

impl OutputCurve {
    pub fn push(&mut self, t: f64, v: f64) {
        self.times.push(t);
        self.values.push(v);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at the sample closest to `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() < 1e-9)
            .map(|i| self.values[i])
    }

    /// Index and value of the largest sample.
    pub fn peak(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold(None, |best, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }

    /// Keeps the samples at times shared with `times`.
    pub fn restrict_to(&self, times: &[f64]) -> OutputCurve {
        let mut out = OutputCurve::default();
        for &t in times {
            if let Some(v) = self.at(t) {
                out.push(t, v);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for (t, v) in self.times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t},{v:.15e}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(Error::Config(format!(
                    "expected CSV header '{CSV_HEADER}', found {:?}",
                    other.unwrap_or("")
                )))
            }
        }
        let mut c = OutputCurve::default();
        for (i, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .and_then(|p| p.trim().parse().ok())
                    .ok_or_else(|| Error::Config(format!("CSV row {}: expected two numbers in '{line}'", i + 2)))
            };
            let t = next()?;
            let v = next()?;
            if let Some(&last) = c.times.last() {
                if t <= last {
                    return Err(Error::Config(format!("CSV row {}: times must increase", i + 2)));
                }
            }
            c.push(t, v);
        }
        Ok(c)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// Mean Euclidean norm of the displacement over `nodes`.
pub fn avg_surface_displacement(state: &SystemState, nodes: &[usize], set_name: &str) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet(set_name.into()));
    }
    Ok(nodes.iter().map(|&n| state.u[n].norm()).sum::<f64>() / nodes.len() as f64)
}

/// Reference values below this are skipped by [`mean_relative_error`] [mm].
pub const REFERENCE_FLOOR: f64 = 1e-12;

/// Time-averaged relative error `mean |1 - u_i / u_ref_i|` over samples with a
/// non-negligible reference.
pub fn mean_relative_error(curve: &OutputCurve, reference: &OutputCurve) -> Result<f64> {
    if curve.len() != reference.len()
        || curve
            .times
            .iter()
            .zip(&reference.times)
            .any(|(a, b)| (a - b).abs() > 1e-9 * a.abs().max(1.0))
    {
        return Err(Error::TimeGridMismatch(format!(
            "{} samples vs {} reference samples",
            curve.len(),
            reference.len()
        )));
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    for (v, r) in curve.values.iter().zip(&reference.values) {
        if r.abs() < REFERENCE_FLOOR {
            continue;
        }
        sum += (1.0 - v / r).abs();
        used += 1;
    }
    let skipped = curve.len() - used;
    if skipped > 0 {
        log::info!("mean relative error: skipped {skipped} samples with a vanishing reference");
    }
    if used == 0 {
        return Err(Error::TimeGridMismatch("no samples with a nonzero reference".into()));
    }
    Ok(sum / used as f64)
}

/// Legacy ASCII VTK unstructured grid with `displacement` and `potential`.
pub fn vtk_string(state: &SystemState, mesh: &Mesh) -> Result<String> {
    let nodes = mesh.nodes();
    if state.u.len() != nodes.len() || state.phi.len() != nodes.len() {
        return Err(Error::InvalidParameter("state size does not match the mesh".into()));
    }
    let (cells, cell_type): (Vec<&[usize]>, u8) = match mesh {
        Mesh::Tet(t) => (t.tets().iter().map(|c| c.as_slice()).collect(), 10),
        Mesh::Hex(h) => (h.hexes().iter().map(|c| c.as_slice()).collect(), 12),
    };
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "t = {} ms", state.time);
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", nodes.len());
    for p in nodes {
        let _ = writeln!(s, "{:e} {:e} {:e}", p.x, p.y, p.z);
    }
    let size: usize = cells.iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", cells.len());
    for c in &cells {
        let _ = write!(s, "{}", c.len());
        for n in c.iter() {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    for _ in &cells {
        let _ = writeln!(s, "{cell_type}");
    }
    let _ = writeln!(s, "POINT_DATA {}", nodes.len());
    let _ = writeln!(s, "VECTORS displacement double");
    for u in &state.u {
        let _ = writeln!(s, "{:.17e} {:.17e} {:.17e}", u.x, u.y, u.z);
    }
    let _ = writeln!(s, "SCALARS potential double 1\nLOOKUP_TABLE default");
    for p in &state.phi {
        let _ = writeln!(s, "{p:.17e}");
    }
    Ok(s)
}

pub fn write_vtk(state: &SystemState, mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, vtk_string(state, mesh)?).map_err(|e| Error::io(path, e))
}
