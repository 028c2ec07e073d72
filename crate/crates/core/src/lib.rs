//! Time-domain electric field integral equation solver on closed triangulated
//! surfaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: surface meshes, edge topology, parsers and generators;
//! * [`quadrature`]: triangle and singular triangle-pair rules;
//! * [`rwg`]: the lowest-order div-conforming boundary element space;
//! * [`efie`]: Laplace-domain Galerkin operators `V_h(s)` and `S_h(s)`;
//! * [`cq`]: multistep convolution quadrature and time marching;
//! * [`scattering`]: incident fields, right-hand sides, solves, diagnostics;
//! * [`harness`]: verification campaigns and run configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cq;
pub mod efie;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mesh;
pub mod quadrature;
pub mod rwg;
pub mod scattering;

pub use error::{Error, Result};
pub use faer::c64;
