//! Scattering of transient incident fields by a perfect conductor.
//!
//! The pipeline is: incident field on the surface, tested right-hand side
//! `b_n`, convolution quadrature solve for the RWG density `J^h`, and the
//! scattered field `E^h = S_h * J^h` at exterior probes.

mod incident;
mod seminorm;
mod solve;
mod waveform;

pub use incident::{dipole_field, plane_wave, IncidentField, Source};
pub use seminorm::hk_seminorm;
pub use solve::{
    assemble_rhs, assemble_rhs_with_degree, evaluate_scattered_field, solve_rhs, solve_scattering,
    solve_scattering_with, FieldHistory, ObservationSet, PROBE_CLEARANCE, RHS_DEGREE,
};
pub use waveform::Waveform;
