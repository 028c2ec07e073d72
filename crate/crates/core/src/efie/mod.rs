//! Laplace-domain Galerkin operators of the electric field integral equation.
//!
//! `V_h(s)` tests the tangential trace of the single layer potential with RWG
//! functions; `S_h(s)` evaluates the potential at exterior points. Both are
//! dense and assembled from pair moments of the kernel
//! `G_s(x, y) = exp(-(s/c)|x - y|) / (4 pi |x - y|)`.

mod assembly;
mod export;
mod kernel;
mod operator;
mod potential;

pub use assembly::{assemble_efie_matrix, assemble_efie_matrix_unsymmetrized, efie_field_moments, energy_gram};
pub use export::{matrix_to_csv, parse_matrix_csv, write_matrix_csv};
pub use kernel::helmholtz_kernel;
pub use operator::{scaled_identity, EfieOperator, FnOperator, PotentialOperator, TransferOperator};
pub use potential::{assemble_potential_matrix, check_probes};

use faer::Mat;

use crate::c64;
use crate::error::Result;
use crate::linalg;
use crate::quadrature::QuadratureConfig;
use crate::rwg::RwgSpace;

/// Smallest eigenvalue of the Hermitian part of `conj(s) V_h(s)`, and whether it is positive.
pub fn passivity_check(space: &RwgSpace, s: c64, c: f64, quad: &QuadratureConfig) -> Result<(f64, bool)> {
    let v = assemble_efie_matrix(space, s, c, quad)?;
    passivity_of_matrix(&v, s)
}

/// Same as [`passivity_check`] for an already assembled matrix.
pub fn passivity_of_matrix(v: &Mat<c64>, s: c64) -> Result<(f64, bool)> {
    let sv = Mat::<c64>::from_fn(v.nrows(), v.ncols(), |i, j| s.conj() * v[(i, j)]);
    min_hermitian_eigenvalue(&sv)
}

/// Smallest eigenvalue of the Hermitian part of `V_h(s)` itself.
///
/// With `E = S(s) j`, `Re(j^H V_h(s) j) = (c / |s|^2) Re(conj(s) a_s(E, E))`
/// where `a_s(E, E) = |curl E|^2 + (s/c)^2 |E|^2` over `R^3 \ Gamma`, so
/// this is the margin that stays positive for every `Re s > 0`.
pub fn coercivity_margin(space: &RwgSpace, s: c64, c: f64, quad: &QuadratureConfig) -> Result<(f64, bool)> {
    let v = assemble_efie_matrix(space, s, c, quad)?;
    min_hermitian_eigenvalue(&v)
}

fn min_hermitian_eigenvalue(a: &Mat<c64>) -> Result<(f64, bool)> {
    let ev = linalg::hermitian_part_eigenvalues(a)?;
    let min = ev.first().copied().unwrap_or(f64::INFINITY);
    Ok((min, min > 0.0))
}
