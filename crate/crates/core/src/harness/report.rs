use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value <= threshold`
    AtMost,
    /// `value >= threshold`
    AtLeast,
    /// `value > threshold`
    Above,
    /// A boolean check: `value` is 1 when it holds.
    Holds,
}

/// One explicit threshold comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Gate {
    /// Non-finite values never pass.
    pub fn new(name: impl Into<String>, value: f64, threshold: f64, relation: Relation) -> Self {
        let pass = value.is_finite()
            && match relation {
                Relation::AtMost => value <= threshold,
                Relation::AtLeast => value >= threshold,
                Relation::Above => value > threshold,
                Relation::Holds => value == threshold,
            };
        Self {
            name: name.into(),
            value,
            threshold,
            relation,
            pass,
        }
    }

    /// A boolean check reported as `value = 1` for true against `threshold = 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, 1.0, Relation::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSummary {
    pub source: String,
    pub vertices: usize,
    pub triangles: usize,
    pub dofs: usize,
    /// Longest edge.
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    pub order: usize,
    pub dt: f64,
    pub steps: usize,
    pub lambda: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub position: [f64; 3],
    /// Relative l2-in-time error against the exact field, when one is known.
    pub error: Option<f64>,
    pub peak: f64,
    /// `dist(probe, Gamma) / c`, the earliest time any density radiating
    /// from `t = 0` can reach the probe.
    pub arrival: f64,
    /// Largest field magnitude before `arrival - precursor_steps * dt`, relative to the peak.
    pub precursor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelResult {
    pub mesh: MeshSummary,
    pub grid: TimeGrid,
    /// Largest probe error of this level.
    pub error: f64,
    pub probe_errors: Vec<f64>,
    /// Largest probe precursor of this level.
    pub precursor: f64,
    /// Whether the density is exactly zero before the rhs onset.
    pub density_causal: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityResult {
    pub c: f64,
    pub pulse_length: f64,
    pub pulse_end: f64,
    pub s_early: f64,
    pub s_late: f64,
    pub ratio: f64,
    /// `sup_n ||j_n||_energy`.
    pub sup_energy: f64,
    pub h2_final: f64,
    /// `sup_n ||j_n||_energy / (max{c, c^-2} H_2(beta, T))`.
    pub normalized: f64,
    pub quotient_max_before_end: f64,
    pub quotient_max_after_end: f64,
    /// `(t_n, ||j_n||_energy, H_2(beta, t_n), quotient)` with the quotient 0 while `H_2 = 0`.
    pub series: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of one campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub campaign: String,
    pub config: RunConfig,
    pub mesh: Option<MeshSummary>,
    pub grid: Option<TimeGrid>,
    pub probes: Vec<ProbeResult>,
    pub levels: Vec<LevelResult>,
    /// `log2(e_k / e_{k+1})` between consecutive levels.
    pub orders: Vec<f64>,
    pub stability: Vec<StabilityResult>,
    pub suites: Vec<SuiteResult>,
    pub gates: Vec<Gate>,
    pub notes: Vec<String>,
    pub seconds: f64,
}

impl RunReport {
    pub fn new(campaign: &str, config: &RunConfig) -> Self {
        Self {
            campaign: campaign.to_string(),
            config: config.clone(),
            mesh: None,
            grid: None,
            probes: Vec::new(),
            levels: Vec::new(),
            orders: Vec::new(),
            stability: Vec::new(),
            suites: Vec::new(),
            gates: Vec::new(),
            notes: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn gate(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// True iff every gate passes.
    pub fn pass(&self) -> bool {
        self.gates.iter().all(|g| g.pass)
    }

    pub fn failed_gates(&self) -> Vec<&Gate> {
        self.gates.iter().filter(|g| !g.pass).collect()
    }

    /// Serializes the report; non-finite numbers appear as `null`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    /// One line per gate.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let status = if g.pass { "PASS" } else { "FAIL" };
            let op = match g.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
                Relation::Above => ">",
                Relation::Holds => {
                    out.push_str(&format!("[{status}] {}\n", g.name));
                    continue;
                }
            };
            out.push_str(&format!(
                "[{status}] {}: {:.4e} {op} {:.4e}\n",
                g.name, g.value, g.threshold
            ));
        }
        for s in &self.suites {
            out.push_str(&format!(
                "  suite {}: {} ({})\n",
                s.name,
                if s.pass { "ok" } else { "failed" },
                s.detail
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_compare_explicitly() {
        assert!(Gate::new("a", 0.05, 0.05, Relation::AtMost).pass);
        assert!(!Gate::new("a", 0.06, 0.05, Relation::AtMost).pass);
        assert!(Gate::new("b", 0.8, 0.8, Relation::AtLeast).pass);
        assert!(!Gate::new("c", 0.0, 0.0, Relation::Above).pass);
        assert!(!Gate::new("d", f64::NAN, 1.0, Relation::AtMost).pass);
        assert!(!Gate::new("e", f64::INFINITY, 1.0, Relation::AtLeast).pass);
        assert!(Gate::flag("f", true).pass && !Gate::flag("f", false).pass);
    }

    #[test]
    fn report_passes_iff_all_gates_pass() {
        let mut r = RunReport::new("test", &RunConfig::default());
        assert!(r.pass());
        r.gate(Gate::flag("ok", true));
        assert!(r.pass());
        r.gate(Gate::new("bad", 2.0, 1.0, Relation::AtMost));
        assert!(!r.pass());
        assert_eq!(r.failed_gates().len(), 1);
        let json = r.to_json().unwrap();
        assert!(json.contains("\"bad\"") && json.contains("at_most"));
        assert!(r.summary().contains("[FAIL] bad"));
    }
}
