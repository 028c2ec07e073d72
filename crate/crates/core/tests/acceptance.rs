//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not asserted, so the binary exits 0 unless
//! a run errors. Set `ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdefie::c64;
use tdefie::cq::{cq_march, cq_weights, CqConfig};
use tdefie::efie::{assemble_efie_matrix, coercivity_margin, passivity_check, scaled_identity, EfieOperator};
use tdefie::harness::{
    convergence_study, speed_sweep, stability_study, MeshConfig, RunConfig, SourceConfig, WaveformConfig,
};
use tdefie::linalg::{max_abs_diff, Lu};
use tdefie::mesh::{load_mesh, MeshFormat, Point3};
use tdefie::quadrature::QuadratureConfig;
use tdefie::rwg::RwgSpace;
use tdefie::scattering::{assemble_rhs, dipole_field, Waveform};

mod tol {
    pub const INTEGRAL_WEIGHTS: f64 = 1e-8;
    pub const DERIVATIVE_WEIGHTS: f64 = 1e-10;
    pub const COMPOSITION: f64 = 1e-8;
    pub const TRANSPOSE: f64 = 1e-12;
    pub const CONJUGATION: f64 = 1e-13;
    pub const PRECURSOR: f64 = 1e-8;
    pub const FIELD_ERROR: f64 = 0.05;
    pub const ORDER: f64 = 0.8;
    pub const STABILITY_RATIO: f64 = 1.2;
    pub const SWEEP_SPREAD: f64 = 10.0;
    pub const BRUTE_FORCE: f64 = 1e-9;
}

mod budget {
    use std::time::Duration;
    pub const WEIGHTS: Duration = Duration::from_secs(1);
    pub const SYMMETRY: Duration = Duration::from_secs(30);
    pub const PASSIVITY: Duration = Duration::from_secs(60);
    pub const BRUTE_FORCE: Duration = Duration::from_secs(60);
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures/meshes")
        .join(name)
}

fn fixture_space(name: &str) -> RwgSpace {
    RwgSpace::new(load_mesh(fixture(name), MeshFormat::Off).expect("fixture mesh"))
}

fn within(t: Duration, limit: Duration) -> bool {
    t <= limit
}

fn series(w: &[Mat<f64>]) -> Vec<f64> {
    w.iter().map(|m| m[(0, 0)]).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = CqConfig::new(1, 0.1, 64).unwrap();
    let integral = series(&cq_weights(&scaled_identity(1, |s| 1.0 / s), &cfg).unwrap());
    let derivative = series(&cq_weights(&scaled_identity(1, |s| s), &cfg).unwrap());
    let e_int = integral.iter().map(|w| (w - cfg.dt).abs()).fold(0.0, f64::max);
    let e_der = derivative
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let exact = [1.0 / cfg.dt, -1.0 / cfg.dt].get(n).copied().unwrap_or(0.0);
            (w - exact).abs()
        })
        .fold(0.0, f64::max);
    let t = start.elapsed();
    Outcome {
        pass: e_int <= tol::INTEGRAL_WEIGHTS && e_der <= tol::DERIVATIVE_WEIGHTS && within(t, budget::WEIGHTS),
        detail: format!(
            "1/s err {e_int:.2e} (<= {:.0e}), s err {e_der:.2e} (<= {:.0e}), {:.3} s",
            tol::INTEGRAL_WEIGHTS,
            tol::DERIVATIVE_WEIGHTS,
            t.as_secs_f64()
        ),
    }
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for order in [1, 2] {
        let cfg = CqConfig::new(order, 0.1, 64).unwrap();
        for (a, b) in [(0.5, 2.0), (1.0, 1.0), (3.0, 0.25)] {
            let k1 = series(&cq_weights(&scaled_identity(1, move |s| 1.0 / (s + a)), &cfg).unwrap());
            let k2 = series(&cq_weights(&scaled_identity(1, move |s| s / (s + b)), &cfg).unwrap());
            let k12 = series(&cq_weights(&scaled_identity(1, move |s| s / ((s + a) * (s + b))), &cfg).unwrap());
            for n in 0..k12.len() {
                let conv: f64 = (0..=n).map(|m| k1[m] * k2[n - m]).sum();
                worst = worst.max((conv - k12[n]).abs());
            }
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: worst <= tol::COMPOSITION && within(t, budget::WEIGHTS),
        detail: format!(
            "max err {worst:.2e} (<= {:.0e}), {:.3} s",
            tol::COMPOSITION,
            t.as_secs_f64()
        ),
    }
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let space = fixture_space("icosphere_1.off");
    let quad = QuadratureConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut sym: f64 = 0.0;
    let mut conj: f64 = 0.0;
    for _ in 0..5 {
        let s = c64::new(rng.random_range(0.05..4.0), rng.random_range(-8.0..8.0));
        let v = assemble_efie_matrix(&space, s, 1.0, &quad).unwrap();
        sym = sym.max(max_abs_diff(&v, &v.transpose().to_owned()));
        let vc = assemble_efie_matrix(&space, s.conj(), 1.0, &quad).unwrap();
        let cv = Mat::<c64>::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)].conj());
        conj = conj.max(max_abs_diff(&vc, &cv));
    }
    let t = start.elapsed();
    Outcome {
        pass: sym <= tol::TRANSPOSE && conj <= tol::CONJUGATION && within(t, budget::SYMMETRY),
        detail: format!(
            "{} dofs, |V - V^T| {sym:.2e}, |V(conj s) - conj V(s)| {conj:.2e}, {:.1} s",
            space.dim(),
            t.as_secs_f64()
        ),
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let space = fixture_space("icosphere_1.off");
    let quad = QuadratureConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [c64::new(1.0, 0.0), c64::new(1.0, 5.0), c64::new(0.3, 2.0)] {
        let (min, ok) = passivity_check(&space, s, 1.0, &quad).unwrap();
        let (margin, _) = coercivity_margin(&space, s, 1.0, &quad).unwrap();
        pass &= ok;
        parts.push(format!("s={s}: {min:.3e} [Herm V_h {margin:.3e}]"));
    }
    let t = start.elapsed();
    Outcome {
        pass: pass && within(t, budget::PASSIVITY),
        detail: format!(
            "min eig Herm(conj(s) V_h(s)): {}, {:.1} s",
            parts.join(", "),
            t.as_secs_f64()
        ),
    }
}

fn dipole_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.incident.source = SourceConfig::Dipole {
        position: [0.0; 3],
        moment: [0.0, 0.0, 1.0],
    };
    cfg.incident.waveform = WaveformConfig {
        omega: 2.0,
        ramp: Some(std::f64::consts::PI),
        support: None,
    };
    cfg.cq.dt_factor = 0.5;
    cfg.cq.horizon = Some(16.0);
    cfg.ladder = (1..=3)
        .map(|k| MeshConfig {
            path: Some(fixture(&format!("icosphere_{k}.off"))),
            format: None,
            level: k,
        })
        .collect();
    cfg
}

fn criteria_5_and_6() -> (Outcome, Outcome) {
    let report = convergence_study(&dipole_config()).unwrap();
    let levels = &report.levels;
    let causal = levels.iter().all(|l| l.density_causal);
    let precursor = levels.iter().map(|l| l.precursor).fold(0.0, f64::max);
    let per_level: Vec<String> = levels
        .iter()
        .map(|l| format!("{} dofs {:.2e}", l.mesh.dofs, l.precursor))
        .collect();
    let c5 = Outcome {
        pass: causal && precursor <= tol::PRECURSOR,
        detail: format!(
            "density bit-exact zero before onset: {causal}; field precursor/peak ({}) <= {:.0e}",
            per_level.join(", "),
            tol::PRECURSOR
        ),
    };
    let errors: Vec<f64> = levels.iter().map(|l| l.error).collect();
    let (e2, e3) = (errors[1], errors[2]);
    let order = (e2 / e3).log2();
    let c6 = Outcome {
        pass: e2 <= tol::FIELD_ERROR && e3 < e2 && order >= tol::ORDER,
        detail: format!(
            "errors {} (level 2 <= {}), order 2->3 {order:.2} (>= {}), {:.0} s",
            levels
                .iter()
                .map(|l| format!("{} dofs dt {:.3}: {:.4}", l.mesh.dofs, l.grid.dt, l.error))
                .collect::<Vec<_>>()
                .join("; "),
            tol::FIELD_ERROR,
            tol::ORDER,
            report.seconds
        ),
    };
    (c5, c6)
}

fn pulse_config() -> RunConfig {
    let mut cfg = RunConfig {
        mesh: MeshConfig {
            path: Some(fixture("icosphere_1.off")),
            format: None,
            level: 1,
        },
        ..RunConfig::default()
    };
    cfg.incident.source = SourceConfig::PlaneWave {
        direction: [0.0, 0.0, 1.0],
        polarization: [1.0, 0.0, 0.0],
        reference: None,
    };
    cfg.incident.waveform = WaveformConfig {
        omega: 2.0,
        ramp: Some(std::f64::consts::PI),
        support: Some(2.0 * std::f64::consts::PI),
    };
    cfg
}

fn criterion_7() -> Outcome {
    let report = stability_study(&pulse_config()).unwrap();
    let s = &report.stability[0];
    let monotone = s.quotient_max_after_end <= s.quotient_max_before_end;
    Outcome {
        pass: s.ratio <= tol::STABILITY_RATIO && monotone,
        detail: format!(
            "S_late/S_early {:.3e} (<= {}), quotient max before/after pulse end {:.3e}/{:.3e}, {:.0} s",
            s.ratio,
            tol::STABILITY_RATIO,
            s.quotient_max_before_end,
            s.quotient_max_after_end,
            report.seconds
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut cfg = pulse_config();
    cfg.speeds = vec![0.5, 1.0, 2.0];
    let report = speed_sweep(&cfg).unwrap();
    let ratios: Vec<f64> = report.stability.iter().map(|s| s.normalized).collect();
    let finite = ratios.iter().all(|r| r.is_finite() && *r > 0.0);
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: finite && spread <= tol::SWEEP_SPREAD,
        detail: format!(
            "normalized ratios {} at c = 0.5, 1, 2; spread {spread:.2} (<= {}), {:.0} s",
            ratios.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", "),
            tol::SWEEP_SPREAD,
            report.seconds
        ),
    }
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let space = fixture_space("octahedron.off");
    let quad = QuadratureConfig::default();
    let cfg = CqConfig::new(2, 0.25, 16).unwrap();
    let g = Waveform::new(2.0, 1.0, None).unwrap();
    let field = dipole_field(Point3::zeros(), Point3::z(), g, 1.0).unwrap();
    let rhs = assemble_rhs(&space, &field, &cfg).unwrap();
    let v = EfieOperator::new(&space, 1.0, quad).unwrap();
    let marched = cq_march(&v, &rhs, &cfg).unwrap();

    let w = cq_weights(&v, &cfg).unwrap();
    let lu = Lu::<f64>::new(&w[0], "W_0").unwrap();
    let dim = space.dim();
    let mut brute: Vec<Vec<f64>> = Vec::with_capacity(cfg.steps + 1);
    for n in 0..=cfg.steps {
        let mut r = rhs[n].clone();
        for m in 0..n {
            for i in 0..dim {
                for k in 0..dim {
                    r[i] -= w[n - m][(i, k)] * brute[m][k];
                }
            }
        }
        brute.push(lu.solve(&r));
    }
    let scale = brute.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let diff = marched
        .steps()
        .iter()
        .flatten()
        .zip(brute.iter().flatten())
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let rel = diff / scale;
    let t = start.elapsed();
    Outcome {
        pass: rel <= tol::BRUTE_FORCE && within(t, budget::BRUTE_FORCE),
        detail: format!(
            "{dim} dofs, N = {}: max |march - loop| / max |j| = {rel:.2e} (<= {:.0e}), {:.2} s",
            cfg.steps,
            tol::BRUTE_FORCE,
            t.as_secs_f64()
        ),
    }
}

fn main() {
    let filter: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let wanted = |k: usize| filter.as_ref().map_or(true, |f| f.contains(&k));
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |k: usize, name: &'static str, o: Outcome| {
        println!(
            "criterion {k} [{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((k, name, o));
    };
    if wanted(1) {
        record(1, "CQ weight oracles", criterion_1());
    }
    if wanted(2) {
        record(2, "weight composition", criterion_2());
    }
    if wanted(3) {
        record(3, "operator symmetries", criterion_3());
    }
    if wanted(4) {
        record(4, "passivity", criterion_4());
    }
    if wanted(5) || wanted(6) {
        let (c5, c6) = criteria_5_and_6();
        if wanted(5) {
            record(5, "causality", c5);
        }
        if wanted(6) {
            record(6, "manufactured dipole accuracy", c6);
        }
    }
    if wanted(7) {
        record(7, "long-time stability", criterion_7());
    }
    if wanted(8) {
        record(8, "speed sweep", criterion_8());
    }
    if wanted(9) {
        record(9, "brute-force equivalence", criterion_9());
    }
    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
