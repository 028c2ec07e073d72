//! Multistep convolution quadrature.
//!
//! A causal convolution `K * u` with Laplace symbol `K(s)` is discretized as
//! `sum_{m <= n} W_{n-m} u_m`, where `W_n` are the Taylor coefficients of
//! `K(delta(zeta) / dt)` and `delta` is the BDF generating polynomial. The
//! coefficients are recovered from samples of `K` on a circle of radius
//! `lambda` by a discrete Fourier transform.

mod history;
mod march;

pub use history::{parse_history_csv, DensityHistory};
pub use march::{cq_march, cq_solve, cq_solve_all_at_once, SolveMethod, AUTO_MEMORY_BUDGET};

use faer::Mat;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::efie::TransferOperator;
use crate::error::{Error, Result};

/// Target accuracy used for the default contour radius.
pub const CONTOUR_EPSILON: f64 = 1e-14;

/// Imaginary parts of the weights above this fraction of their largest
/// magnitude are reported rather than discarded.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-8;

/// A history of real vectors `u_0, ..., u_N`.
pub type VectorHistory = Vec<Vec<f64>>;

/// Time discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqConfig {
    /// BDF order, 1 or 2.
    pub order: usize,
    pub dt: f64,
    /// Number of steps `N`; histories hold `N + 1` entries.
    pub steps: usize,
    /// Contour radius, in `(0, 1)`.
    pub lambda: f64,
}

impl CqConfig {
    /// Configuration with the default contour radius `eps^(1 / (6 N))`.
    pub fn new(order: usize, dt: f64, steps: usize) -> Result<Self> {
        let cfg = Self {
            order,
            dt,
            steps,
            lambda: default_lambda(steps),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.order, 1 | 2) {
            return Err(Error::Config(format!("BDF order must be 1 or 2 (got {})", self.order)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive (got {})", self.dt)));
        }
        if self.steps < 1 {
            return Err(Error::Config("at least one time step is required".into()));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(Error::Config(format!(
                "contour radius must lie in (0, 1) (got {})",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    /// Number of contour samples: enough that `lambda^L` falls below the
    /// contour accuracy, and never fewer than `N + 1`.
    pub fn contour_nodes(&self) -> usize {
        let aliasing = (CONTOUR_EPSILON.ln() / self.lambda.ln()).ceil();
        let nodes = if aliasing.is_finite() {
            aliasing as usize
        } else {
            usize::MAX
        };
        nodes.clamp(self.steps + 1, 64 * (self.steps + 1))
    }

    /// Laplace parameters `delta(lambda zeta_l) / dt` at which `K` is sampled.
    pub fn frequencies(&self) -> Result<Vec<c64>> {
        contour(self.order, self.dt, self.lambda, self.contour_nodes())
    }
}

pub fn default_lambda(steps: usize) -> f64 {
    CONTOUR_EPSILON.powf(1.0 / (6.0 * steps.max(1) as f64))
}

/// BDF generating polynomial `delta(zeta) = sum_{k=1}^{p} (1 - zeta)^k / k`.
pub fn bdf_symbol(zeta: c64, order: usize) -> Result<c64> {
    let one = c64::new(1.0, 0.0);
    match order {
        1 => Ok(one - zeta),
        2 => {
            let d = one - zeta;
            Ok(d + d * d * 0.5)
        }
        p => Err(Error::Config(format!("BDF order must be 1 or 2 (got {p})"))),
    }
}

fn contour(order: usize, dt: f64, radius: f64, nodes: usize) -> Result<Vec<c64>> {
    (0..nodes)
        .map(|l| {
            let zeta = c64::from_polar(radius, 2.0 * std::f64::consts::PI * l as f64 / nodes as f64);
            Ok(bdf_symbol(zeta, order)? / dt)
        })
        .collect()
}

/// Samples `K` at the first `nodes / 2 + 1` contour points when `K` is
/// conjugate symmetric, else at all of them; the rest are conjugates.
fn sample_operator(k: &dyn TransferOperator, freqs: &[c64]) -> Result<Vec<Mat<c64>>> {
    let l = freqs.len();
    let count = if k.conjugate_symmetric() { l / 2 + 1 } else { l };
    let (rows, cols) = k.shape();
    let mut samples: Vec<Mat<c64>> = freqs[..count]
        .par_iter()
        .map(|&s| {
            let m = k.evaluate(s)?;
            if (m.nrows(), m.ncols()) != (rows, cols) {
                return Err(Error::Dimension(format!(
                    "operator returned {}x{} at s = {s}, declared {rows}x{cols}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    for idx in count..l {
        let mirror = &samples[l - idx];
        let conj = Mat::<c64>::from_fn(rows, cols, |i, j| mirror[(i, j)].conj());
        samples.push(conj);
    }
    Ok(samples)
}

/// Convolution weights `W_0, ..., W_N` of `K`.
///
/// Entries below the round-off floor of the transform, which grows like
/// `lambda^-n`, are set to zero; symbols that are polynomials in `zeta`
/// therefore yield exact zeros past their degree.
pub fn cq_weights(k: &dyn TransferOperator, cfg: &CqConfig) -> Result<Vec<Mat<f64>>> {
    cfg.validate()?;
    let freqs = cfg.frequencies()?;
    let l = freqs.len();
    let samples = sample_operator(k, &freqs)?;
    let (rows, cols) = k.shape();
    let n_out = cfg.steps + 1;

    let scale = samples
        .iter()
        .flat_map(|m| (0..cols).flat_map(move |j| (0..rows).map(move |i| m[(i, j)].norm())))
        .fold(0.0f64, f64::max);
    if !scale.is_finite() {
        return Err(Error::NonFinite("transfer operator returned non-finite values".into()));
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(l);
    let mut buffer = vec![c64::new(0.0, 0.0); l];
    let mut weights = vec![Mat::<f64>::zeros(rows, cols); n_out];
    let inv_radius: Vec<f64> = (0..n_out).map(|n| cfg.lambda.powi(-(n as i32)) / l as f64).collect();
    let floor: Vec<f64> = (0..n_out)
        .map(|n| 4.0 * f64::EPSILON * (l as f64).log2().max(1.0) * scale * cfg.lambda.powi(-(n as i32)))
        .collect();
    let mut residue = 0.0f64;
    let mut largest = 0.0f64;
    for j in 0..cols {
        for i in 0..rows {
            for (b, m) in buffer.iter_mut().zip(&samples) {
                *b = m[(i, j)];
            }
            fft.process(&mut buffer);
            for n in 0..n_out {
                let w = buffer[n] * inv_radius[n];
                residue = residue.max(w.im.abs());
                largest = largest.max(w.norm());
                weights[n][(i, j)] = if w.re.abs() <= floor[n] { 0.0 } else { w.re };
            }
        }
    }
    if residue > IMAGINARY_RESIDUE_TOLERANCE * largest.max(f64::MIN_POSITIVE) {
        return Err(Error::ImaginaryResidue {
            residue: residue / largest,
            threshold: IMAGINARY_RESIDUE_TOLERANCE,
        });
    }
    Ok(weights)
}

/// Discrete causal convolution `out_n = sum_{m <= n} W_{n-m} u_m`.
pub fn cq_convolve(k: &dyn TransferOperator, input: &[Vec<f64>], cfg: &CqConfig) -> Result<VectorHistory> {
    check_history(input, k.shape().1, cfg)?;
    let weights = cq_weights(k, cfg)?;
    Ok(convolve_with_weights(&weights, input))
}

/// Convolution with precomputed weights.
pub fn convolve_with_weights(weights: &[Mat<f64>], input: &[Vec<f64>]) -> VectorHistory {
    let rows = weights.first().map_or(0, |w| w.nrows());
    let mut out = vec![vec![0.0; rows]; input.len()];
    for (m, u) in input.iter().enumerate() {
        if u.iter().all(|&v| v == 0.0) {
            continue;
        }
        for (n, o) in out.iter_mut().enumerate().skip(m) {
            crate::linalg::matvec(&weights[n - m], u, o);
        }
    }
    out
}

pub(crate) fn check_history(input: &[Vec<f64>], dim: usize, cfg: &CqConfig) -> Result<()> {
    cfg.validate()?;
    if input.len() != cfg.steps + 1 {
        return Err(Error::Dimension(format!(
            "history has {} entries, expected N + 1 = {}",
            input.len(),
            cfg.steps + 1
        )));
    }
    for (n, u) in input.iter().enumerate() {
        if u.len() != dim {
            return Err(Error::Dimension(format!(
                "entry {n} has length {}, expected {dim}",
                u.len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("entry {n} of the history")));
        }
    }
    Ok(())
}
