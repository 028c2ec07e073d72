//! Verification campaigns and their configuration and reports.

mod campaigns;
mod config;
mod report;
mod selftest;

pub use campaigns::{
    convergence_study, run_manufactured, scattering_run, speed_factor, speed_sweep, stability_study, ScatteringRun,
    NESTED_RATIO,
};
pub use config::{
    CqSection, GateConfig, IncidentConfig, MeshConfig, OutputConfig, RunConfig, SourceConfig, StabilityConfig,
    WaveformConfig,
};
pub use report::{
    Gate, LevelResult, MeshSummary, ProbeResult, Relation, RunReport, StabilityResult, SuiteResult, TimeGrid,
};
pub use selftest::selftest;
