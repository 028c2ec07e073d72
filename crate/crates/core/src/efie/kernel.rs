use std::f64::consts::PI;

use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::Point3;

/// Laplace-domain retarded kernel `exp(-(s/c) r) / (4 pi r)`, `r = |x - y|`.
pub fn helmholtz_kernel(s: c64, c: f64, x: &Point3, y: &Point3) -> Result<c64> {
    check_laplace_parameter(s)?;
    let r = (x - y).norm();
    if r == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(green(s / c, r))
}

pub(crate) fn check_laplace_parameter(s: c64) -> Result<()> {
    if !(s.re > 0.0) || !s.im.is_finite() || !s.re.is_finite() {
        return Err(Error::LeftHalfPlane(s));
    }
    Ok(())
}

#[inline]
pub(crate) fn green(kappa: c64, r: f64) -> c64 {
    (-kappa * r).exp() / (4.0 * PI * r)
}

/// `grad_x G` for `d = x - y`, `r = |d|`.
#[inline]
pub(crate) fn green_gradient(kappa: c64, d: &Point3, r: f64) -> [c64; 3] {
    let f = -(1.0 + kappa * r) * (-kappa * r).exp() / (4.0 * PI * r * r * r);
    [f * d.x, f * d.y, f * d.z]
}
