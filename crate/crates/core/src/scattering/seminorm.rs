use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg;

/// Cumulative seminorm `H_k(f, t) = sum_{l <= k} int_0^t |f^(l)(tau)| dtau`
/// by the composite trapezoid rule on the sample grid.
///
/// `derivatives[l]` holds samples of `f^(l)` at `n dt`; the norm is
/// `sqrt(x^T G x)` for `G = norm_matrix`, or Euclidean without one. A final
/// partial interval is integrated with linearly interpolated norms.
pub fn hk_seminorm(
    derivatives: &[Vec<Vec<f64>>],
    dt: f64,
    k: usize,
    t: f64,
    norm_matrix: Option<&Mat<f64>>,
) -> Result<f64> {
    if k >= derivatives.len() {
        return Err(Error::Config(format!(
            "H_{k} needs derivatives up to order {k}, only {} supplied",
            derivatives.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be positive (got {dt})")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("time must be non-negative (got {t})")));
    }
    let mut total = 0.0;
    for history in &derivatives[..=k] {
        let norms: Vec<f64> = history.iter().map(|x| linalg::quadratic_norm(norm_matrix, x)).collect();
        total += trapezoid(&norms, dt, t)?;
    }
    Ok(total)
}

fn trapezoid(values: &[f64], dt: f64, t: f64) -> Result<f64> {
    let horizon = values.len().saturating_sub(1) as f64 * dt;
    if values.is_empty() || t > horizon * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "t = {t} lies beyond the sampled horizon {horizon}"
        )));
    }
    let full = ((t / dt).floor() as usize).min(values.len() - 1);
    let mut sum = 0.0;
    for n in 0..full {
        sum += 0.5 * dt * (values[n] + values[n + 1]);
    }
    let rest = t - full as f64 * dt;
    if rest > 1e-12 * dt && full + 1 < values.len() {
        let end = values[full] + rest / dt * (values[full + 1] - values[full]);
        sum += 0.5 * rest * (values[full] + end);
    }
    Ok(sum)
}
