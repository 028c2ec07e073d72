use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cq::{CqConfig, SolveMethod};
use crate::error::{Error, Result};
use crate::mesh::{icosphere, load_mesh, MeshFormat, Point3, SurfaceMesh};
use crate::quadrature::QuadratureConfig;
use crate::scattering::{dipole_field, plane_wave, IncidentField, Waveform};

/// A run configuration as read from JSON. Every key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub speed_c: f64,
    pub incident: IncidentConfig,
    pub cq: CqSection,
    pub quad: QuadratureConfig,
    pub probes: Vec<[f64; 3]>,
    pub outputs: OutputConfig,
    pub gates: GateConfig,
    /// Mesh ladder of a convergence study, coarsest first.
    pub ladder: Vec<MeshConfig>,
    /// Wave speeds of a speed sweep.
    pub speeds: Vec<f64>,
    pub stability: StabilityConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let r = 3.0 / 2f64.sqrt();
        Self {
            mesh: MeshConfig::default(),
            speed_c: 1.0,
            incident: IncidentConfig::default(),
            cq: CqSection::default(),
            quad: QuadratureConfig::default(),
            probes: vec![[3.0, 0.0, 0.0], [0.0, r, r], [-1.0, 2.0, 2.0]],
            outputs: OutputConfig::default(),
            gates: GateConfig::default(),
            ladder: (1..=3).map(MeshConfig::icosphere).collect(),
            speeds: vec![0.5, 1.0, 2.0],
            stability: StabilityConfig::default(),
        }
    }
}

/// Mesh source: a file when `path` is set, else the icosphere of `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub path: Option<PathBuf>,
    /// Inferred from the extension when absent.
    pub format: Option<MeshFormat>,
    pub level: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self::icosphere(1)
    }
}

impl MeshConfig {
    pub fn icosphere(level: usize) -> Self {
        Self {
            path: None,
            format: None,
            level,
        }
    }

    pub fn load(&self) -> Result<SurfaceMesh> {
        match &self.path {
            None => icosphere(self.level),
            Some(path) => {
                let format = match self.format {
                    Some(f) => f,
                    None => match path.extension().and_then(|e| e.to_str()) {
                        Some(ext) => ext.parse()?,
                        None => return Err(Error::Config(format!("cannot infer the format of {}", path.display()))),
                    },
                };
                load_mesh(path, format)
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.path {
            Some(p) => p.display().to_string(),
            None => format!("icosphere level {}", self.level),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum SourceConfig {
    Dipole {
        position: [f64; 3],
        moment: [f64; 3],
    },
    PlaneWave {
        direction: [f64; 3],
        polarization: [f64; 3],
        /// Placed just upstream of the mesh when absent.
        #[serde(default)]
        reference: Option<[f64; 3]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidentConfig {
    #[serde(flatten)]
    pub source: SourceConfig,
    #[serde(default)]
    pub waveform: WaveformConfig,
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self {
            source: SourceConfig::Dipole {
                position: [0.0; 3],
                moment: [0.0, 0.0, 1.0],
            },
            waveform: WaveformConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformConfig {
    pub omega: f64,
    /// Ramp length; one period when absent.
    pub ramp: Option<f64>,
    /// Support end `T_p`; the waveform is not ramped down when absent.
    pub support: Option<f64>,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            omega: 2.0,
            ramp: None,
            support: None,
        }
    }
}

impl WaveformConfig {
    pub fn build(&self) -> Result<Waveform> {
        let ramp = match self.ramp {
            Some(r) => r,
            None if self.omega > 0.0 => 2.0 * std::f64::consts::PI / self.omega,
            None => 1.0,
        };
        if self.omega == 0.0 && self.support.is_none() {
            return Ok(Waveform::zero());
        }
        Waveform::new(self.omega, ramp, self.support)
    }

    pub fn period(&self) -> Option<f64> {
        (self.omega > 0.0).then(|| 2.0 * std::f64::consts::PI / self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CqSection {
    pub order: usize,
    /// Time step; `dt_factor * h / c` when absent.
    pub dt: Option<f64>,
    pub dt_factor: f64,
    /// Number of steps; `ceil(horizon / dt)` when absent.
    pub steps: Option<usize>,
    pub horizon: Option<f64>,
    pub lambda: Option<f64>,
    pub method: SolveMethod,
}

impl Default for CqSection {
    fn default() -> Self {
        Self {
            order: 2,
            dt: None,
            dt_factor: 0.5,
            steps: None,
            horizon: None,
            lambda: None,
            method: SolveMethod::Auto,
        }
    }
}

impl CqSection {
    /// Resolves the time grid for mesh size `h`, wave speed `c` and a
    /// default horizon.
    pub fn resolve(&self, h: f64, c: f64, default_horizon: f64) -> Result<CqConfig> {
        let dt = match self.dt {
            Some(dt) => dt,
            None => {
                if !(self.dt_factor > 0.0 && self.dt_factor.is_finite()) {
                    return Err(Error::Config(format!(
                        "dt_factor must be positive (got {})",
                        self.dt_factor
                    )));
                }
                self.dt_factor * h / c
            }
        };
        let steps = match self.steps {
            Some(n) => n,
            None => {
                let horizon = self.horizon.unwrap_or(default_horizon);
                if !(horizon > 0.0 && horizon.is_finite()) {
                    return Err(Error::Config(format!("horizon must be positive (got {horizon})")));
                }
                (horizon / dt).ceil() as usize
            }
        };
        let cfg = CqConfig::new(self.order, dt, steps)?;
        match self.lambda {
            Some(l) => cfg.with_lambda(l),
            None => Ok(cfg),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub density_csv: Option<PathBuf>,
    pub field_csv: Option<PathBuf>,
    pub report_json: Option<PathBuf>,
}

/// Acceptance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    /// Largest relative field error at any probe.
    pub field_error: f64,
    /// Largest field magnitude before the geometric arrival, relative to the peak.
    pub precursor: f64,
    /// Steps of CQ smearing allowed before the arrival time.
    pub precursor_steps: f64,
    pub stability_ratio: f64,
    pub sweep_spread: f64,
    pub convergence_order: f64,
    /// Relative slack on the running maximum of the stability quotient.
    pub quotient_slack: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            field_error: 0.05,
            precursor: 1e-8,
            precursor_steps: 2.0,
            stability_ratio: 1.2,
            sweep_spread: 10.0,
            convergence_order: 0.8,
            quotient_slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    /// Horizon in units of the pulse length `T_p`.
    pub horizon_pulses: f64,
    /// End of the early window in units of `T_p`.
    pub early_pulses: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            horizon_pulses: 20.0,
            early_pulses: 5.0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a configuration file; relative paths inside it are taken
    /// relative to the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.mesh.path);
        for level in &mut self.ladder {
            fix(&mut level.path);
        }
        fix(&mut self.outputs.density_csv);
        fix(&mut self.outputs.field_csv);
        fix(&mut self.outputs.report_json);
    }

    pub fn validate(&self) -> Result<()> {
        check_speed(self.speed_c)?;
        for &c in &self.speeds {
            check_speed(c)?;
        }
        self.quad.validate()?;
        for (i, p) in self.probes.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::Config(format!("probe {i} has non-finite coordinates")));
            }
        }
        let finite = |v: &[f64; 3]| v.iter().all(|x| x.is_finite());
        match &self.incident.source {
            SourceConfig::Dipole { position, moment } if !(finite(position) && finite(moment)) => {
                return Err(Error::Config("dipole parameters must be finite".into()))
            }
            SourceConfig::PlaneWave {
                direction,
                polarization,
                reference,
            } if !(finite(direction) && finite(polarization) && reference.as_ref().map_or(true, finite)) => {
                return Err(Error::Config("plane wave parameters must be finite".into()))
            }
            _ => {}
        }
        self.incident.waveform.build()?;
        Ok(())
    }

    pub fn probe_points(&self) -> Vec<Point3> {
        self.probes.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect()
    }

    /// Incident field for a given mesh and speed.
    pub fn incident_field(&self, mesh: &SurfaceMesh, c: f64) -> Result<IncidentField> {
        let g = self.incident.waveform.build()?;
        match &self.incident.source {
            SourceConfig::Dipole { position, moment } => dipole_field(v3(position), v3(moment), g, c),
            SourceConfig::PlaneWave {
                direction,
                polarization,
                reference,
            } => {
                let d = v3(direction);
                let reference = match reference {
                    Some(r) => v3(r),
                    None => upstream_reference(mesh, &d)?,
                };
                plane_wave(d, v3(polarization), g, c, reference)
            }
        }
    }
}

fn v3(a: &[f64; 3]) -> Point3 {
    Point3::new(a[0], a[1], a[2])
}

pub(crate) fn check_speed(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("wave speed must be positive (got {c})")));
    }
    Ok(())
}

/// A reference point a twentieth of the mesh extent before the first
/// vertex the wave reaches.
fn upstream_reference(mesh: &SurfaceMesh, d: &Point3) -> Result<Point3> {
    let n = d.norm();
    if !(n > 0.0) {
        return Err(Error::Config("propagation direction must be non-zero".into()));
    }
    let d = d / n;
    let lead = mesh.vertices().iter().map(|x| d.dot(x)).fold(f64::INFINITY, f64::min);
    let margin = 0.05 * mesh.bounding_box_diagonal();
    Ok(d * (lead - margin))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.mesh.level, 1);
        assert_eq!(cfg.cq.order, 2);
        assert_eq!(cfg.gates.field_error, 0.05);
    }

    #[test]
    fn full_document_round_trips() {
        let text = r#"{
            "mesh": {"path": "sphere.off", "format": "off"},
            "speed_c": 2.0,
            "incident": {"type": "plane_wave",
                         "params": {"direction": [0, 0, 1], "polarization": [1, 0, 0]},
                         "waveform": {"omega": 2.0, "ramp": 3.14159, "support": 6.5}},
            "cq": {"order": 1, "dt": 0.1, "steps": 40, "lambda": 0.9},
            "quad": {"regular": 6, "singular": 5, "near_threshold": 2.0},
            "probes": [[0, 0, 4]],
            "outputs": {"density_csv": "out/j.csv", "field_csv": null, "report_json": "/tmp/r.json"}
        }"#;
        let mut cfg = RunConfig::from_json(text).unwrap();
        assert!(matches!(
            cfg.incident.source,
            SourceConfig::PlaneWave { reference: None, .. }
        ));
        assert_eq!(cfg.incident.waveform.support, Some(6.5));
        cfg.resolve_paths(Path::new("/data/runs"));
        assert_eq!(cfg.mesh.path.as_deref(), Some(Path::new("/data/runs/sphere.off")));
        assert_eq!(
            cfg.outputs.density_csv.as_deref(),
            Some(Path::new("/data/runs/out/j.csv"))
        );
        assert_eq!(cfg.outputs.report_json.as_deref(), Some(Path::new("/tmp/r.json")));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        let cq = cfg.cq.resolve(0.3, 2.0, 10.0).unwrap();
        assert_eq!((cq.order, cq.steps, cq.dt, cq.lambda), (1, 40, 0.1, 0.9));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(RunConfig::from_json(r#"{"speed_c": -1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"speeds": [1, 0]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"unknown": 1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"incident": {"type": "laser", "params": {}}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"cq": {"order": 3}}"#).is_ok());
        assert!(RunConfig::default().cq.resolve(0.3, 1.0, 5.0).is_ok());
        let bad = CqSection {
            order: 3,
            ..CqSection::default()
        };
        assert!(bad.resolve(0.3, 1.0, 5.0).is_err());
        assert!(RunConfig::from_json("[").is_err());
    }

    #[test]
    fn derived_time_grid_and_upstream_reference() {
        let cq = CqSection::default().resolve(0.4, 2.0, 10.0).unwrap();
        assert!((cq.dt - 0.1).abs() < 1e-15 && cq.steps == 100);
        let mut cfg = RunConfig::default();
        cfg.incident.source = SourceConfig::PlaneWave {
            direction: [1.0, 0.0, 0.0],
            polarization: [0.0, 1.0, 0.0],
            reference: None,
        };
        let mesh = icosphere(0).unwrap();
        let f = cfg.incident_field(&mesh, 1.0).unwrap();
        assert!(f.check_against(&mesh).is_ok());
    }
}
