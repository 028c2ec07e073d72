use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Coefficient vectors `j_0, ..., j_N` of a surface density on a uniform
/// time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityHistory {
    steps: Vec<Vec<f64>>,
    dt: f64,
    dim: usize,
    onset: usize,
}

impl DensityHistory {
    pub fn new(steps: Vec<Vec<f64>>, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive (got {dt})")));
        }
        let dim = steps.first().map_or(0, Vec::len);
        for (n, j) in steps.iter().enumerate() {
            if j.len() != dim {
                return Err(Error::Dimension(format!(
                    "step {n} has length {}, expected {dim}",
                    j.len()
                )));
            }
            if j.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("density at step {n}")));
            }
        }
        let onset = first_nonzero(&steps);
        Ok(Self { steps, dt, dim, onset })
    }

    /// Number of stored steps, `N + 1`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// First step with a nonzero entry; `len()` for an all-zero history.
    pub fn onset(&self) -> usize {
        self.onset
    }

    pub fn step(&self, n: usize) -> &[f64] {
        &self.steps[n]
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<Vec<f64>> {
        self.steps
    }

    /// CSV with header `t,dof_0,...,dof_{M-1}` and one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.dim {
            write!(out, ",dof_{i}").unwrap();
        }
        out.push('\n');
        for (n, j) in self.steps.iter().enumerate() {
            write!(out, "{:e}", self.time(n)).unwrap();
            for v in j {
                write!(out, ",{v:e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn first_nonzero(steps: &[Vec<f64>]) -> usize {
    steps
        .iter()
        .position(|j| j.iter().any(|&v| v != 0.0))
        .unwrap_or(steps.len())
}

/// Reads a history written by [`DensityHistory::to_csv`].
pub fn parse_history_csv(text: &str) -> Result<DensityHistory> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty history"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"t") {
        return Err(Error::parse(1, "header must start with `t`"));
    }
    for (i, c) in columns.iter().enumerate().skip(1) {
        if *c != format!("dof_{}", i - 1) {
            return Err(Error::parse(1, format!("unexpected column `{c}`")));
        }
    }
    let dim = columns.len() - 1;
    let mut times = Vec::new();
    let mut steps = Vec::new();
    for (index, line) in lines {
        let values = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(index + 1, e.to_string()))?;
        if values.len() != dim + 1 {
            return Err(Error::parse(
                index + 1,
                format!("expected {} values, found {}", dim + 1, values.len()),
            ));
        }
        times.push(values[0]);
        steps.push(values[1..].to_vec());
    }
    let dt = match times.as_slice() {
        [_, t1, ..] => *t1 - times[0],
        _ => 1.0,
    };
    for (n, t) in times.iter().enumerate() {
        if !((t - n as f64 * dt).abs() <= 1e-9 * (1.0 + t.abs())) {
            return Err(Error::parse(n + 2, format!("time {t} is not on a uniform grid")));
        }
    }
    DensityHistory::new(steps, dt)
}
