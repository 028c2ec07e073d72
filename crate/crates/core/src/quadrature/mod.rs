//! Quadrature on triangles and triangle pairs.
//!
//! All rules are normalized so their weights sum to one: an integral over a
//! physical triangle of area `A` is `A * sum(w * f)`, and over a pair of
//! triangles `A_x * A_y * sum(w * f)`.

mod gauss;
mod sauter_schwab;
mod triangle;

pub use gauss::gauss_legendre_unit;
pub use sauter_schwab::{PairKind, SingularRule};
pub use triangle::TriangleRule;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature parameters for boundary-element assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Polynomial degree of the regular triangle rule.
    pub regular: usize,
    /// Gauss points per dimension of the four-dimensional singular rules.
    pub singular: usize,
    /// Pairs (and probes) closer than this multiple of the triangle diameter
    /// are treated as near-singular.
    pub near_threshold: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            regular: 4,
            singular: 4,
            near_threshold: 1.5,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.regular < 1 || self.singular < 1 {
            return Err(Error::Quadrature(format!(
                "orders must be at least 1 (regular {}, singular {})",
                self.regular, self.singular
            )));
        }
        if !(self.near_threshold >= 0.0) || !self.near_threshold.is_finite() {
            return Err(Error::Quadrature(format!(
                "near threshold must be finite and non-negative (got {})",
                self.near_threshold
            )));
        }
        Ok(())
    }
}
