//! Thin helpers over `faer` dense factorizations.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::c64;
use crate::error::{Error, Result};

/// Smallest `|U_ii| / max |U_ii|` accepted as non-singular.
const PIVOT_RATIO: f64 = 1e-13;

/// Partial-pivoting LU with a singularity check on the pivots.
pub struct Lu<T: faer::traits::ComplexField> {
    inner: faer::linalg::solvers::PartialPivLu<T>,
}

macro_rules! lu_impl {
    ($t:ty, $abs:expr) => {
        impl Lu<$t> {
            pub fn new(a: &Mat<$t>, what: &str) -> Result<Self> {
                if a.nrows() != a.ncols() {
                    return Err(Error::Dimension(format!(
                        "{what}: {}x{} is not square",
                        a.nrows(),
                        a.ncols()
                    )));
                }
                let inner = a.partial_piv_lu();
                let u = inner.U();
                let abs: fn(&$t) -> f64 = $abs;
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for i in 0..u.nrows() {
                    let v = abs(&u[(i, i)]);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::NonFinite(format!(
                        "{what}: factorization produced non-finite pivots"
                    )));
                }
                if u.nrows() > 0 && !(lo > PIVOT_RATIO * hi) {
                    return Err(Error::Singular(format!("{what}: pivot ratio {:.3e}", lo / hi)));
                }
                Ok(Self { inner })
            }

            pub fn solve(&self, b: &[$t]) -> Vec<$t> {
                let mut x = Mat::<$t>::from_fn(b.len(), 1, |i, _| b[i]);
                self.inner.solve_in_place(x.as_mut());
                (0..b.len()).map(|i| x[(i, 0)]).collect()
            }
        }
    };
}

lu_impl!(f64, |v| v.abs());
lu_impl!(c64, |v| v.norm());

/// Eigenvalues of the Hermitian part `(A + A^H) / 2`, ascending.
pub fn hermitian_part_eigenvalues(a: &Mat<c64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    let h = Mat::<c64>::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("Hermitian eigenvalue solve failed: {e:?}")))
}

pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("symmetric eigenvalue solve failed: {e:?}")))
}

/// Solves `G x = b` for symmetric positive definite `G` by Cholesky.
pub fn spd_solve(g: &Mat<f64>, b: &[f64]) -> Result<Vec<f64>> {
    let llt = g
        .llt(Side::Lower)
        .map_err(|e| Error::Singular(format!("Gram matrix is not positive definite: {e:?}")))?;
    let mut x = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    llt.solve_in_place(x.as_mut());
    Ok((0..b.len()).map(|i| x[(i, 0)]).collect())
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(g: &Mat<f64>) -> Result<Mat<f64>> {
    let n = g.nrows();
    let llt = g
        .llt(Side::Lower)
        .map_err(|e| Error::Singular(format!("Gram matrix is not positive definite: {e:?}")))?;
    let mut x = Mat::<f64>::identity(n, n);
    llt.solve_in_place(x.as_mut());
    Ok(x)
}

pub fn matvec(a: &Mat<f64>, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.ncols(), x.len());
    debug_assert_eq!(a.nrows(), out.len());
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * xj;
        }
    }
}

/// `sqrt(x^T G x)`, or the Euclidean norm when `g` is `None`.
pub fn quadratic_norm(g: Option<&Mat<f64>>, x: &[f64]) -> f64 {
    match g {
        None => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Some(g) => {
            let mut gx = vec![0.0; x.len()];
            matvec(g, x, &mut gx);
            x.iter().zip(&gx).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
        }
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &Mat<c64>, b: &Mat<c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}
