use faer::Mat;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::history::{first_nonzero, DensityHistory};
use super::{bdf_symbol, check_history, cq_weights, CqConfig, CONTOUR_EPSILON};
use crate::c64;
use crate::efie::TransferOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, Lu};

/// Relative residual accepted for each implicit step.
const STEP_RESIDUAL: f64 = 1e-10;

/// Memory above which [`SolveMethod::Auto`] avoids storing all weights.
pub const AUTO_MEMORY_BUDGET: usize = 512 << 20;

/// How the block lower-triangular Toeplitz system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Forward substitution with materialized weights.
    March,
    /// Diagonalization on `N + 1` contour points: one complex solve per frequency.
    AllAtOnce,
    /// `March` unless its weights would exceed [`AUTO_MEMORY_BUDGET`].
    #[default]
    Auto,
}

impl SolveMethod {
    pub fn resolve(self, dim: usize, cfg: &CqConfig) -> SolveMethod {
        match self {
            SolveMethod::Auto => {
                let entries = dim * dim;
                let weights = (cfg.steps + 1) * entries * 8;
                let samples = (cfg.contour_nodes() / 2 + 1) * entries * 16;
                if weights.saturating_add(samples) <= AUTO_MEMORY_BUDGET {
                    SolveMethod::March
                } else {
                    SolveMethod::AllAtOnce
                }
            }
            m => m,
        }
    }
}

pub fn cq_solve(
    v: &dyn TransferOperator,
    rhs: &[Vec<f64>],
    cfg: &CqConfig,
    method: SolveMethod,
) -> Result<DensityHistory> {
    match method.resolve(v.shape().0, cfg) {
        SolveMethod::AllAtOnce => cq_solve_all_at_once(v, rhs, cfg),
        _ => cq_march(v, rhs, cfg),
    }
}

fn check_square(v: &dyn TransferOperator) -> Result<usize> {
    let (rows, cols) = v.shape();
    if rows != cols {
        return Err(Error::Dimension(format!("operator is {rows}x{cols}, not square")));
    }
    Ok(rows)
}

/// Solves `sum_{m <= n} W_{n-m} j_m = b_n` by forward substitution.
pub fn cq_march(v: &dyn TransferOperator, rhs: &[Vec<f64>], cfg: &CqConfig) -> Result<DensityHistory> {
    let dim = check_square(v)?;
    check_history(rhs, dim, cfg)?;
    let onset = first_nonzero(rhs);
    let mut j = vec![vec![0.0; dim]; rhs.len()];
    if onset == rhs.len() {
        return DensityHistory::new(j, cfg.dt);
    }
    let weights = cq_weights(v, cfg)?;
    let lu = Lu::<f64>::new(&weights[0], "W_0")?;
    for n in onset..rhs.len() {
        let mut r = rhs[n].clone();
        let mut history = vec![0.0; dim];
        for m in onset..n {
            linalg::matvec(&weights[n - m], &j[m], &mut history);
        }
        for (ri, hi) in r.iter_mut().zip(&history) {
            *ri -= hi;
        }
        if r.iter().all(|&x| x == 0.0) {
            continue;
        }
        let mut x = lu.solve(&r);
        let scale = linalg::norm2(&r);
        let mut residue = step_residual(&weights[0], &x, &r);
        if residue > STEP_RESIDUAL * scale {
            let correction = lu.solve(&residual_vector(&weights[0], &x, &r));
            for (xi, ci) in x.iter_mut().zip(&correction) {
                *xi += ci;
            }
            residue = step_residual(&weights[0], &x, &r);
            if residue > STEP_RESIDUAL * scale {
                return Err(Error::MarchResidual {
                    step: n,
                    residue: residue / scale,
                });
            }
        }
        j[n] = x;
    }
    DensityHistory::new(j, cfg.dt)
}

fn residual_vector(a: &Mat<f64>, x: &[f64], r: &[f64]) -> Vec<f64> {
    let mut ax = vec![0.0; r.len()];
    linalg::matvec(a, x, &mut ax);
    r.iter().zip(&ax).map(|(ri, ai)| ri - ai).collect()
}

fn step_residual(a: &Mat<f64>, x: &[f64], r: &[f64]) -> f64 {
    linalg::norm2(&residual_vector(a, x, r))
}

/// Solves the same system as [`cq_march`] in the frequency domain.
///
/// Leading zero steps of the right-hand side are dropped, the remaining
/// `N' + 1` steps are transformed on the circle of radius
/// `eps^(1 / (2 (N' + 1)))`, one complex system is solved per frequency and
/// the result is transformed back. The contour is independent of
/// `cfg.lambda`.
pub fn cq_solve_all_at_once(v: &dyn TransferOperator, rhs: &[Vec<f64>], cfg: &CqConfig) -> Result<DensityHistory> {
    let dim = check_square(v)?;
    check_history(rhs, dim, cfg)?;
    let onset = first_nonzero(rhs);
    let mut out = vec![vec![0.0; dim]; rhs.len()];
    if onset == rhs.len() {
        return DensityHistory::new(out, cfg.dt);
    }
    let b = &rhs[onset..];
    let l = b.len();
    let radius = CONTOUR_EPSILON.powf(1.0 / (2.0 * l as f64));
    let freqs: Vec<c64> = (0..l)
        .map(|k| {
            let zeta = c64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / l as f64);
            bdf_symbol(zeta, cfg.order).map(|d| d / cfg.dt)
        })
        .collect::<Result<_>>()?;

    let mut planner = FftPlanner::<f64>::new();
    let backward = planner.plan_fft_inverse(l);
    let forward = planner.plan_fft_forward(l);

    // b_hat[k][i] = sum_n radius^n b_n[i] exp(2 pi i k n / L)
    let mut b_hat = vec![vec![c64::new(0.0, 0.0); dim]; l];
    let mut buffer = vec![c64::new(0.0, 0.0); l];
    let powers: Vec<f64> = (0..l).map(|n| radius.powi(n as i32)).collect();
    for i in 0..dim {
        for n in 0..l {
            buffer[n] = c64::new(powers[n] * b[n][i], 0.0);
        }
        backward.process(&mut buffer);
        for k in 0..l {
            b_hat[k][i] = buffer[k];
        }
    }

    let symmetric = v.conjugate_symmetric();
    let count = if symmetric { l / 2 + 1 } else { l };
    let solved: Vec<Vec<c64>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let m = v.evaluate(freqs[k])?;
            let lu = Lu::<c64>::new(&m, "V(s)")?;
            Ok(lu.solve(&b_hat[k]))
        })
        .collect::<Result<_>>()?;
    let mut j_hat = solved;
    for k in count..l {
        let mirror: Vec<c64> = j_hat[l - k].iter().map(|z| z.conj()).collect();
        j_hat.push(mirror);
    }

    for i in 0..dim {
        for k in 0..l {
            buffer[k] = j_hat[k][i];
        }
        forward.process(&mut buffer);
        for n in 0..l {
            out[onset + n][i] = buffer[n].re / (powers[n] * l as f64);
        }
    }
    DensityHistory::new(out, cfg.dt)
}
