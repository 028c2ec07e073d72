use faer::Mat;

use super::assembly::assemble_efie_matrix;
use super::kernel::check_laplace_parameter;
use super::potential::{check_probes, potential_matrix_unchecked};
use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::Point3;
use crate::quadrature::QuadratureConfig;
use crate::rwg::RwgSpace;

/// A Laplace-domain transfer function `s -> K(s)`, defined for `Re s > 0`.
pub trait TransferOperator: Sync {
    fn shape(&self) -> (usize, usize);

    fn evaluate(&self, s: c64) -> Result<Mat<c64>>;

    /// `K(conj s) = conj K(s)`, i.e. the time-domain kernel is real.
    fn conjugate_symmetric(&self) -> bool {
        false
    }
}

/// `s -> V_h(s)`.
pub struct EfieOperator<'a> {
    space: &'a RwgSpace,
    c: f64,
    quad: QuadratureConfig,
}

impl<'a> EfieOperator<'a> {
    pub fn new(space: &'a RwgSpace, c: f64, quad: QuadratureConfig) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("wave speed must be positive (got {c})")));
        }
        quad.validate()?;
        Ok(Self { space, c, quad })
    }

    pub fn space(&self) -> &RwgSpace {
        self.space
    }
}

impl TransferOperator for EfieOperator<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.space.dim(), self.space.dim())
    }

    fn evaluate(&self, s: c64) -> Result<Mat<c64>> {
        assemble_efie_matrix(self.space, s, self.c, &self.quad)
    }

    fn conjugate_symmetric(&self) -> bool {
        true
    }
}

/// `s -> S_h(s)` at a fixed set of exterior points.
pub struct PotentialOperator<'a> {
    space: &'a RwgSpace,
    points: Vec<Point3>,
    c: f64,
    quad: QuadratureConfig,
}

impl<'a> PotentialOperator<'a> {
    pub fn new(space: &'a RwgSpace, points: Vec<Point3>, c: f64, quad: QuadratureConfig) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("wave speed must be positive (got {c})")));
        }
        quad.validate()?;
        check_probes(space.mesh(), &points, quad.near_threshold)?;
        Ok(Self { space, points, c, quad })
    }
}

impl TransferOperator for PotentialOperator<'_> {
    fn shape(&self) -> (usize, usize) {
        (3 * self.points.len(), self.space.dim())
    }

    fn evaluate(&self, s: c64) -> Result<Mat<c64>> {
        check_laplace_parameter(s)?;
        Ok(potential_matrix_unchecked(
            &self.points,
            self.space,
            s,
            self.c,
            &self.quad,
        ))
    }

    fn conjugate_symmetric(&self) -> bool {
        true
    }
}

/// Transfer operator given by a closure.
pub struct FnOperator<F> {
    rows: usize,
    cols: usize,
    f: F,
    conjugate_symmetric: bool,
}

impl<F> FnOperator<F>
where
    F: Fn(c64) -> Mat<c64> + Sync,
{
    pub fn new(rows: usize, cols: usize, conjugate_symmetric: bool, f: F) -> Self {
        Self {
            rows,
            cols,
            f,
            conjugate_symmetric,
        }
    }
}

/// `s -> k(s) I_n` for a scalar symbol `k` with real time-domain kernel.
pub fn scaled_identity(n: usize, k: impl Fn(c64) -> c64 + Sync) -> FnOperator<impl Fn(c64) -> Mat<c64> + Sync> {
    FnOperator::new(n, n, true, move |s| {
        let v = k(s);
        Mat::<c64>::from_fn(n, n, |i, j| if i == j { v } else { c64::new(0.0, 0.0) })
    })
}

impl<F> TransferOperator for FnOperator<F>
where
    F: Fn(c64) -> Mat<c64> + Sync,
{
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn evaluate(&self, s: c64) -> Result<Mat<c64>> {
        check_laplace_parameter(s)?;
        let m = (self.f)(s);
        if (m.nrows(), m.ncols()) != (self.rows, self.cols) {
            return Err(Error::Dimension(format!(
                "operator returned {}x{}, declared {}x{}",
                m.nrows(),
                m.ncols(),
                self.rows,
                self.cols
            )));
        }
        Ok(m)
    }

    fn conjugate_symmetric(&self) -> bool {
        self.conjugate_symmetric
    }
}
