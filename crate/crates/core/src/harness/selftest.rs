use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use super::config::RunConfig;
use super::report::{Gate, RunReport, SuiteResult};
use crate::c64;
use crate::cq::{cq_solve, cq_weights, CqConfig, SolveMethod};
use crate::efie::{assemble_efie_matrix, coercivity_margin, passivity_check, scaled_identity, EfieOperator};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{icosphere, octahedron, Point3};
use crate::rwg::{gram_matrices, RwgSpace};

type Suite = fn(&RunConfig) -> Result<String>;

const SUITES: [(&str, Suite); 6] = [
    ("cq_oracles", cq_oracles),
    ("matrix_symmetries", matrix_symmetries),
    ("passivity", passivity),
    ("causality", causality),
    ("basis", basis),
    ("mesh", mesh),
];

/// Runs every invariant suite in isolation; a failing or panicking suite
/// becomes a report entry and does not affect the others.
pub fn selftest(config: &RunConfig) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new("selftest", config);
    for (name, suite) in SUITES {
        let outcome = catch_unwind(AssertUnwindSafe(|| suite(config)));
        let (pass, detail) = match outcome {
            Ok(Ok(detail)) => (true, detail),
            Ok(Err(e)) => (false, e.to_string()),
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (false, format!("panicked: {msg}"))
            }
        };
        log::info!("suite {name}: {}", if pass { "ok" } else { "failed" });
        report.gate(Gate::flag(format!("suite {name}"), pass));
        report.suites.push(SuiteResult {
            name: name.into(),
            pass,
            detail,
        });
    }
    report.seconds = start.elapsed().as_secs_f64();
    report
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Check(msg()))
    }
}

fn cq_oracles(_: &RunConfig) -> Result<String> {
    let cfg = CqConfig::new(1, 0.1, 64)?;
    let integral = cq_weights(&scaled_identity(1, |s| 1.0 / s), &cfg)?;
    let e1 = integral.iter().map(|w| (w[(0, 0)] - cfg.dt).abs()).fold(0.0, f64::max);
    check(e1 <= 1e-8, || format!("BDF1 1/s weights off by {e1:e}"))?;
    let derivative = cq_weights(&scaled_identity(1, |s| s), &cfg)?;
    let e2 = derivative
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let exact = match n {
                0 => 1.0 / cfg.dt,
                1 => -1.0 / cfg.dt,
                _ => 0.0,
            };
            (w[(0, 0)] - exact).abs()
        })
        .fold(0.0, f64::max);
    check(e2 <= 1e-10, || format!("BDF1 s weights off by {e2:e}"))?;

    let cfg2 = CqConfig::new(2, 0.1, 48)?;
    let (a, b) = (0.7, 1.9);
    let wa = scalar_series(&cq_weights(&scaled_identity(1, move |s| 1.0 / (s + a)), &cfg2)?);
    let wb = scalar_series(&cq_weights(&scaled_identity(1, move |s| 1.0 / (s + b)), &cfg2)?);
    let wab = scalar_series(&cq_weights(
        &scaled_identity(1, move |s| 1.0 / ((s + a) * (s + b))),
        &cfg2,
    )?);
    let e3 = (0..wab.len())
        .map(|n| {
            let conv: f64 = (0..=n).map(|m| wa[m] * wb[n - m]).sum();
            (conv - wab[n]).abs()
        })
        .fold(0.0, f64::max);
    check(e3 <= 1e-8, || format!("composition off by {e3:e}"))?;
    Ok(format!("1/s {e1:.1e}, s {e2:.1e}, composition {e3:.1e}"))
}

fn scalar_series(w: &[faer::Mat<f64>]) -> Vec<f64> {
    w.iter().map(|m| m[(0, 0)]).collect()
}

fn fixture_space() -> Result<RwgSpace> {
    Ok(RwgSpace::new(icosphere(1)?))
}

fn matrix_symmetries(config: &RunConfig) -> Result<String> {
    let space = fixture_space()?;
    let quad = &config.quad;
    let mut worst_sym: f64 = 0.0;
    let mut worst_conj: f64 = 0.0;
    for s in [c64::new(1.0, 0.0), c64::new(0.4, 2.5), c64::new(2.0, -1.3)] {
        let v = assemble_efie_matrix(&space, s, 1.0, quad)?;
        let vt = v.transpose().to_owned();
        worst_sym = worst_sym.max(linalg::max_abs_diff(&v, &vt));
        let vc = assemble_efie_matrix(&space, s.conj(), 1.0, quad)?;
        let conj = faer::Mat::<c64>::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)].conj());
        worst_conj = worst_conj.max(linalg::max_abs_diff(&vc, &conj));
    }
    check(worst_sym <= 1e-12, || format!("V_h - V_h^T = {worst_sym:e}"))?;
    check(worst_conj <= 1e-13, || {
        format!("V_h(conj s) - conj V_h(s) = {worst_conj:e}")
    })?;
    Ok(format!("symmetry {worst_sym:.1e}, conjugation {worst_conj:.1e}"))
}

fn passivity(config: &RunConfig) -> Result<String> {
    let space = fixture_space()?;
    let (real_min, ok) = passivity_check(&space, c64::new(1.0, 0.0), 1.0, &config.quad)?;
    check(ok, || {
        format!("Herm(conj(s) V_h(s)) at s = 1 has min eigenvalue {real_min:e}")
    })?;
    let mut margins = Vec::new();
    for s in [c64::new(1.0, 5.0), c64::new(0.3, 2.0)] {
        let (m, ok) = coercivity_margin(&space, s, 1.0, &config.quad)?;
        check(ok, || format!("Herm(V_h(s)) at s = {s} has min eigenvalue {m:e}"))?;
        margins.push(m);
    }
    Ok(format!(
        "s = 1: {real_min:.3e}; Herm V_h at 1+5i, 0.3+2i: {:.3e}, {:.3e}",
        margins[0], margins[1]
    ))
}

fn causality(config: &RunConfig) -> Result<String> {
    let space = RwgSpace::new(octahedron());
    let cfg = CqConfig::new(2, 0.2, 24)?;
    let dim = space.dim();
    let onset = 7;
    let rhs: Vec<Vec<f64>> = (0..=cfg.steps)
        .map(|n| {
            (0..dim)
                .map(|i| if n >= onset { ((n + i) as f64).sin() } else { 0.0 })
                .collect()
        })
        .collect();
    let v = EfieOperator::new(&space, 1.0, config.quad)?;
    for method in [SolveMethod::March, SolveMethod::AllAtOnce] {
        let j = cq_solve(&v, &rhs, &cfg, method)?;
        let early_zero = j.steps()[..onset].iter().all(|x| x.iter().all(|&v| v == 0.0));
        check(early_zero, || {
            format!("{method:?}: density non-zero before the rhs onset")
        })?;
        check(j.onset() == onset, || {
            format!("{method:?}: density onset {} != {onset}", j.onset())
        })?;
    }
    Ok(format!("density bit-exact zero before step {onset}"))
}

fn basis(_: &RunConfig) -> Result<String> {
    let space = fixture_space()?;
    let mesh = space.mesh();
    let mut worst_flux: f64 = 0.0;
    for (i, dof) in space.dofs().iter().enumerate() {
        let edge = &mesh.topology().edges()[dof.edge];
        let [a, b] = edge.vertices;
        let mid = 0.5 * (mesh.vertices()[a] + mesh.vertices()[b]);
        let along = (mesh.vertices()[b] - mesh.vertices()[a]).normalize();
        let flux = |t: usize| -> Result<f64> {
            let (v, _) = space.evaluate_basis(i, t, &mid)?;
            Ok(v.dot(&mesh.normal(t).cross(&along)))
        };
        let plus = flux(dof.plus.triangle)?;
        let minus = flux(dof.minus.triangle)?;
        // both co-normals point to the same side of the edge
        worst_flux = worst_flux.max((plus - minus).abs() / plus.abs().max(minus.abs()));
        let div_total = dof.plus.area * space.evaluate_basis(i, dof.plus.triangle, &mid)?.1
            + dof.minus.area * space.evaluate_basis(i, dof.minus.triangle, &mid)?.1;
        check(div_total.abs() <= 1e-12 * dof.length, || {
            format!("dof {i}: divergence does not integrate to zero ({div_total:e})")
        })?;
    }
    check(worst_flux <= 1e-12, || format!("normal flux jump {worst_flux:e}"))?;
    let (mass, _) = gram_matrices(&space, 2);
    let ev = linalg::symmetric_eigenvalues(&mass)?;
    check(ev[0] > 0.0, || {
        format!("mass matrix is not positive definite ({:e})", ev[0])
    })?;
    Ok(format!(
        "{} dofs, flux jump {worst_flux:.1e}, mass min eigenvalue {:.3e}",
        space.dim(),
        ev[0]
    ))
}

fn mesh(config: &RunConfig) -> Result<String> {
    let m = config.mesh.load()?;
    check(m.is_closed(), || "mesh is not closed".into())?;
    m.check_genus(0)?;
    let volume = m.signed_volume();
    check(volume > 0.0, || format!("normals point inward (volume {volume:e})"))?;
    let centroid = m.vertices().iter().fold(Point3::zeros(), |a, v| a + v) / m.num_vertices() as f64;
    let inside = m.contains(&centroid);
    Ok(format!(
        "{}: {} vertices, {} triangles, volume {volume:.4}, centroid inside {inside}",
        config.mesh.describe(),
        m.num_vertices(),
        m.num_triangles()
    ))
}
