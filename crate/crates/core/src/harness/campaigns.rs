use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{check_speed, MeshConfig, RunConfig};
use super::report::{Gate, LevelResult, MeshSummary, ProbeResult, Relation, RunReport, StabilityResult, TimeGrid};
use crate::cq::{CqConfig, DensityHistory, SolveMethod};
use crate::efie::energy_gram;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{Point3, SurfaceMesh};
use crate::rwg::RwgSpace;
use crate::scattering::{
    assemble_rhs, evaluate_scattered_field, hk_seminorm, solve_rhs, FieldHistory, IncidentField, ObservationSet, Source,
};

/// Mesh-size ratios accepted between consecutive ladder levels.
pub const NESTED_RATIO: (f64, f64) = (1.5, 2.5);

/// Periods of the carrier simulated after the last arrival in a manufactured run.
const TRAILING_PERIODS: f64 = 4.0;

fn summarize(source: &MeshConfig, mesh: &SurfaceMesh, dofs: usize) -> MeshSummary {
    MeshSummary {
        source: source.describe(),
        vertices: mesh.num_vertices(),
        triangles: mesh.num_triangles(),
        dofs,
        h: mesh.mesh_size(),
    }
}

fn grid(cq: &CqConfig, method: SolveMethod, dim: usize) -> TimeGrid {
    TimeGrid {
        order: cq.order,
        dt: cq.dt,
        steps: cq.steps,
        lambda: cq.lambda,
        method: format!("{:?}", method.resolve(dim, cq)),
    }
}

/// Lower bound on the time at which the field scattered by `mesh` can
/// reach `x`.
fn arrival_time(field: &IncidentField, mesh: &SurfaceMesh, x: &Point3) -> f64 {
    let c = field.c();
    match *field.source() {
        Source::Dipole { position, .. } => (x - position).norm() / c,
        Source::PlaneWave {
            direction, reference, ..
        } => {
            let lead = mesh
                .vertices()
                .iter()
                .map(|v| direction.dot(&(v - reference)))
                .fold(f64::INFINITY, f64::min);
            let (gap, _) = mesh.distance_to(x);
            (direction.dot(&(x - reference))).max(lead + gap).max(0.0) / c
        }
    }
}

/// Last time the incident field of a pulse of length `pulse` is non-zero on `mesh`.
fn passage_end(field: &IncidentField, mesh: &SurfaceMesh, pulse: f64) -> f64 {
    let c = field.c();
    let travel = match *field.source() {
        Source::Dipole { position, .. } => mesh
            .vertices()
            .iter()
            .map(|v| (v - position).norm())
            .fold(0.0, f64::max),
        Source::PlaneWave {
            direction, reference, ..
        } => mesh
            .vertices()
            .iter()
            .map(|v| direction.dot(&(v - reference)))
            .fold(0.0, f64::max),
    };
    pulse + travel / c
}

fn first_nonzero(history: &[Vec<f64>]) -> usize {
    history
        .iter()
        .position(|v| v.iter().any(|&x| x != 0.0))
        .unwrap_or(history.len())
}

/// Relative l2-in-time error; 0 when both fields vanish.
fn relative_error(computed: &[Point3], exact: &[Point3]) -> f64 {
    let num: f64 = computed.iter().zip(exact).map(|(a, b)| (a - b).norm_squared()).sum();
    let den: f64 = exact.iter().map(|e| e.norm_squared()).sum();
    if den == 0.0 {
        return if num == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (num / den).sqrt()
}

/// Output of one manufactured or plain scattering run.
pub struct ScatteringRun {
    pub mesh: MeshSummary,
    pub grid: TimeGrid,
    pub rhs_onset: usize,
    pub density: DensityHistory,
    pub field: FieldHistory,
    pub probes: Vec<ProbeResult>,
    pub seconds: f64,
}

fn default_horizon(config: &RunConfig, field: &IncidentField, mesh: &SurfaceMesh, probes: &[Point3]) -> f64 {
    let last_arrival = probes.iter().map(|x| arrival_time(field, mesh, x)).fold(0.0, f64::max);
    let w = &config.incident.waveform;
    let body = match w.support {
        Some(t) => t,
        None => {
            let period = w.period().unwrap_or(1.0);
            w.ramp.unwrap_or(period) + TRAILING_PERIODS * period
        }
    };
    let transit = match field.source() {
        Source::PlaneWave { .. } => mesh.diameter_of_surface() / field.c(),
        Source::Dipole { .. } => 0.0,
    };
    last_arrival + body + transit
}

/// Solves one scattering problem on `mesh_cfg` and evaluates the field at
/// the configured probes. A dipole source is treated as the manufactured
/// problem `E_inc = -dipole` whose exact scattered field is the dipole.
pub fn scattering_run(config: &RunConfig, mesh_cfg: &MeshConfig) -> Result<ScatteringRun> {
    let start = Instant::now();
    let c = config.speed_c;
    check_speed(c)?;
    let mesh = mesh_cfg.load()?;
    let source_field = config.incident_field(&mesh, c)?;
    let manufactured = matches!(source_field.source(), Source::Dipole { .. });
    let incident = if manufactured {
        source_field.negated()
    } else {
        source_field
    };
    incident.check_against(&mesh)?;
    let points = config.probe_points();
    let probes = ObservationSet::new(&mesh, points.clone())?;
    let horizon = default_horizon(config, &source_field, &mesh, &points);
    let cq = config.cq.resolve(mesh.mesh_size(), c, horizon)?;
    let space = RwgSpace::new(mesh);
    let mesh_summary = summarize(mesh_cfg, space.mesh(), space.dim());
    let grid = grid(&cq, config.cq.method, space.dim());
    log::info!(
        "{}: {} dofs, dt {:.4e}, {} steps, {}",
        mesh_summary.source,
        space.dim(),
        cq.dt,
        cq.steps,
        grid.method
    );

    let rhs = assemble_rhs(&space, &incident, &cq)?;
    let rhs_onset = first_nonzero(&rhs);
    let density = solve_rhs(&space, &rhs, c, &cq, &config.quad, config.cq.method)?;
    let field = evaluate_scattered_field(&space, &density, &probes, c, &cq, &config.quad)?;

    let mut results = Vec::with_capacity(points.len());
    for (p, x) in points.iter().enumerate() {
        let series = field.probe_series(p);
        let error = if manufactured {
            let exact = (0..=cq.steps)
                .map(|n| source_field.value(x, cq.time(n)))
                .collect::<Result<Vec<_>>>()?;
            Some(relative_error(&series, &exact))
        } else {
            None
        };
        let peak = field.peak(p);
        let arrival = probes.distances()[p] / c;
        let cutoff = arrival - config.gates.precursor_steps * cq.dt;
        let early = series
            .iter()
            .enumerate()
            .filter(|(n, _)| cq.time(*n) < cutoff)
            .map(|(_, e)| e.norm())
            .fold(0.0, f64::max);
        results.push(ProbeResult {
            position: [x.x, x.y, x.z],
            error,
            peak,
            arrival,
            precursor: if peak > 0.0 { early / peak } else { 0.0 },
        });
    }
    Ok(ScatteringRun {
        mesh: mesh_summary,
        grid,
        rhs_onset,
        density,
        field,
        probes: results,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn max_error(probes: &[ProbeResult]) -> Option<f64> {
    probes
        .iter()
        .map(|p| p.error)
        .collect::<Option<Vec<_>>>()
        .map(|e| e.into_iter().fold(0.0, f64::max))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}

/// Writes the configured outputs, creating missing directories.
pub(crate) fn write_outputs(config: &RunConfig, report: &RunReport, run: Option<&ScatteringRun>) -> Result<()> {
    let o = &config.outputs;
    for path in [&o.density_csv, &o.field_csv, &o.report_json].into_iter().flatten() {
        ensure_parent(path)?;
    }
    if let Some(run) = run {
        if let Some(path) = &config.outputs.density_csv {
            run.density.write_csv(path)?;
        }
        if let Some(path) = &config.outputs.field_csv {
            run.field.write_csv(path)?;
        }
    }
    if let Some(path) = &config.outputs.report_json {
        report.write_json(path)?;
    }
    Ok(())
}

/// Scattering run with field errors against the dipole oracle and causality gates.
pub fn run_manufactured(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("run", config);
    let run = scattering_run(config, &config.mesh)?;
    let gates = &config.gates;
    report.gate(Gate::flag(
        "density zero before rhs onset",
        run.density.onset() >= run.rhs_onset,
    ));
    let precursor = run.probes.iter().map(|p| p.precursor).fold(0.0, f64::max);
    report.gate(Gate::new(
        "field precursor / peak",
        precursor,
        gates.precursor,
        Relation::AtMost,
    ));
    match max_error(&run.probes) {
        Some(err) => report.gate(Gate::new(
            "relative field error",
            err,
            gates.field_error,
            Relation::AtMost,
        )),
        None => report.note("no closed-form field for this source; errors not computed"),
    }
    report.mesh = Some(run.mesh.clone());
    report.grid = Some(run.grid.clone());
    report.probes = run.probes.clone();
    report.seconds = start.elapsed().as_secs_f64();
    write_outputs(config, &report, Some(&run))?;
    Ok(report)
}

/// Manufactured runs on a ladder of meshes with `dt` tied to `h`.
pub fn convergence_study(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("converge", config);
    if !matches!(config.incident.source, super::config::SourceConfig::Dipole { .. }) {
        return Err(Error::Config("a convergence study needs a dipole source".into()));
    }
    if config.cq.dt.is_some() || config.cq.steps.is_some() {
        return Err(Error::Config(
            "a convergence study derives dt from dt_factor; remove cq.dt and cq.steps".into(),
        ));
    }
    if config.ladder.len() < 3 {
        report.note(format!("insufficient levels: {} given, 3 needed", config.ladder.len()));
        report.gate(Gate::new(
            "ladder levels",
            config.ladder.len() as f64,
            3.0,
            Relation::AtLeast,
        ));
        report.seconds = start.elapsed().as_secs_f64();
        write_outputs(config, &report, None)?;
        return Ok(report);
    }
    let sizes = config
        .ladder
        .iter()
        .map(|m| m.load().map(|mesh| mesh.mesh_size()))
        .collect::<Result<Vec<_>>>()?;
    for (k, pair) in sizes.windows(2).enumerate() {
        let ratio = pair[0] / pair[1];
        if !(NESTED_RATIO.0..=NESTED_RATIO.1).contains(&ratio) {
            return Err(Error::Config(format!(
                "non-nested ladder: h ratio {ratio:.3} between levels {k} and {} is outside [{}, {}]",
                k + 1,
                NESTED_RATIO.0,
                NESTED_RATIO.1
            )));
        }
    }
    let runs = config
        .ladder
        .par_iter()
        .map(|m| scattering_run(config, m))
        .collect::<Result<Vec<_>>>()?;
    for run in &runs {
        let errors: Vec<f64> = run.probes.iter().map(|p| p.error.unwrap_or(f64::NAN)).collect();
        report.levels.push(LevelResult {
            mesh: run.mesh.clone(),
            grid: run.grid.clone(),
            error: errors.iter().cloned().fold(0.0, f64::max),
            probe_errors: errors,
            precursor: run.probes.iter().map(|p| p.precursor).fold(0.0, f64::max),
            density_causal: run.density.onset() >= run.rhs_onset,
            seconds: run.seconds,
        });
    }
    let errs: Vec<f64> = report.levels.iter().map(|l| l.error).collect();
    report.orders = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    report.gate(Gate::flag(
        "errors strictly decreasing",
        errs.windows(2).all(|w| w[1] < w[0]),
    ));
    let finest = *report.orders.last().unwrap_or(&f64::NAN);
    report.gate(Gate::new(
        "observed order (finest pair)",
        finest,
        config.gates.convergence_order,
        Relation::AtLeast,
    ));
    let finest_run = runs.last();
    if let Some(run) = finest_run {
        report.mesh = Some(run.mesh.clone());
        report.grid = Some(run.grid.clone());
        report.probes = run.probes.clone();
    }
    report.seconds = start.elapsed().as_secs_f64();
    write_outputs(config, &report, finest_run)?;
    Ok(report)
}

/// `max{c, c^-2}`.
pub fn speed_factor(c: f64) -> f64 {
    c.max(c.powi(-2))
}

/// Long-time run with a compactly supported pulse; `norm_c` is the speed
/// used for the energy norm.
fn stability_run(config: &RunConfig, c: f64, norm_c: f64) -> Result<StabilityResult> {
    check_speed(c)?;
    let w = &config.incident.waveform;
    let waveform = w.build()?;
    let pulse = match (waveform.support(), waveform.is_zero()) {
        (Some(t), _) => t,
        (None, true) => w.period().unwrap_or(1.0),
        (None, false) => {
            return Err(Error::Config(
                "stability study needs a compactly supported waveform (set incident.waveform.support)".into(),
            ))
        }
    };
    let st = &config.stability;
    if !(st.early_pulses > 0.0 && st.horizon_pulses > st.early_pulses) {
        return Err(Error::Config(format!(
            "stability windows need 0 < early_pulses < horizon_pulses (got {} and {})",
            st.early_pulses, st.horizon_pulses
        )));
    }
    let mesh = config.mesh.load()?;
    let field = config.incident_field(&mesh, c)?;
    field.check_against(&mesh)?;
    let horizon = st.horizon_pulses * pulse;
    let cq = config.cq.resolve(mesh.mesh_size(), c, horizon)?;
    let pulse_end = passage_end(&field, &mesh, pulse);
    let space = RwgSpace::new(mesh);
    log::info!(
        "stability c = {c}: {} dofs, dt {:.4e}, {} steps",
        space.dim(),
        cq.dt,
        cq.steps
    );

    let derivatives = (0..3)
        .into_par_iter()
        .map(|l| assemble_rhs(&space, &field.time_derivative(l), &cq))
        .collect::<Result<Vec<_>>>()?;
    let density = solve_rhs(&space, &derivatives[0], c, &cq, &config.quad, config.cq.method)?;
    let gram = energy_gram(&space, norm_c, &config.quad)?;
    let dual = linalg::spd_inverse(&gram)?;

    let energy: Vec<f64> = density
        .steps()
        .iter()
        .map(|j| linalg::quadratic_norm(Some(&gram), j))
        .collect();
    let beta_norm: Vec<f64> = (0..=cq.steps)
        .map(|n| {
            derivatives
                .iter()
                .map(|d| linalg::quadratic_norm(Some(&dual), &d[n]))
                .sum()
        })
        .collect();
    let mut h2 = vec![0.0; cq.steps + 1];
    for n in 1..=cq.steps {
        h2[n] = h2[n - 1] + 0.5 * cq.dt * (beta_norm[n - 1] + beta_norm[n]);
    }
    let h2_final = hk_seminorm(&derivatives, cq.dt, 2, cq.time(cq.steps), Some(&dual))?;
    let factor = speed_factor(c);

    let early_end = st.early_pulses * pulse;
    let mut s_early: f64 = 0.0;
    let mut s_late: f64 = 0.0;
    let mut q_before: f64 = 0.0;
    let mut q_after: f64 = 0.0;
    let mut series = Vec::with_capacity(cq.steps + 1);
    for n in 0..=cq.steps {
        let t = cq.time(n);
        if t <= early_end {
            s_early = s_early.max(energy[n]);
        }
        if t >= early_end && t <= horizon {
            s_late = s_late.max(energy[n]);
        }
        let q = if h2[n] > 0.0 { energy[n] / (factor * h2[n]) } else { 0.0 };
        if t <= pulse_end {
            q_before = q_before.max(q);
        } else {
            q_after = q_after.max(q);
        }
        series.push([t, energy[n], h2[n], q]);
    }
    let ratio = if s_early > 0.0 {
        s_late / s_early
    } else if s_late == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let sup_energy = energy.iter().cloned().fold(0.0, f64::max);
    let normalized = if h2_final > 0.0 {
        sup_energy / (factor * h2_final)
    } else {
        0.0
    };
    Ok(StabilityResult {
        c,
        pulse_length: pulse,
        pulse_end,
        s_early,
        s_late,
        ratio,
        sup_energy,
        h2_final,
        normalized,
        quotient_max_before_end: q_before,
        quotient_max_after_end: q_after,
        series,
    })
}

/// Energy-norm windows and the bounded-quotient trend over a long horizon.
pub fn stability_study(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("stability", config);
    let result = stability_run(config, config.speed_c, config.speed_c)?;
    report.gate(Gate::new(
        "S_late / S_early",
        result.ratio,
        config.gates.stability_ratio,
        Relation::AtMost,
    ));
    let allowed = result.quotient_max_before_end * (1.0 + config.gates.quotient_slack);
    report.gate(Gate::new(
        "quotient running max after pulse end",
        result.quotient_max_after_end,
        allowed,
        Relation::AtMost,
    ));
    report.stability.push(result);
    report.seconds = start.elapsed().as_secs_f64();
    write_outputs(config, &report, None)?;
    Ok(report)
}

/// Normalized stability ratios across wave speeds, in a fixed `c = 1` energy norm.
pub fn speed_sweep(config: &RunConfig) -> Result<RunReport> {
    let start = Instant::now();
    let mut report = RunReport::new("sweep", config);
    if config.speeds.is_empty() {
        return Err(Error::Config("speed sweep needs at least one wave speed".into()));
    }
    for &c in &config.speeds {
        check_speed(c)?;
    }
    let results = config
        .speeds
        .par_iter()
        .map(|&c| stability_run(config, c, 1.0))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = results.iter().map(|r| r.normalized).collect();
    let finite = ratios.iter().all(|r| r.is_finite());
    report.gate(Gate::flag("normalized ratios finite", finite));
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = if min > 0.0 {
        max / min
    } else if max == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    report.gate(Gate::new(
        "max/min normalized ratio",
        spread,
        config.gates.sweep_spread,
        Relation::AtMost,
    ));
    report.stability = results;
    report.seconds = start.elapsed().as_secs_f64();
    write_outputs(config, &report, None)?;
    Ok(report)
}
