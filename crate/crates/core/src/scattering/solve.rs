use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::incident::IncidentField;
use crate::cq::{cq_convolve, cq_solve, CqConfig, DensityHistory, SolveMethod, VectorHistory};
use crate::efie::{EfieOperator, PotentialOperator};
use crate::error::{Error, Result};
use crate::mesh::{Point3, SurfaceMesh};
use crate::quadrature::QuadratureConfig;
use crate::rwg::{tested_moments, RwgSpace};

/// Default polynomial degree of the right-hand side quadrature.
pub const RHS_DEGREE: usize = 4;

/// Probes must be farther from the surface than this multiple of the local mesh size.
pub const PROBE_CLEARANCE: f64 = 0.1;

/// Exterior observation points with their distances to the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    points: Vec<Point3>,
    distances: Vec<f64>,
}

impl ObservationSet {
    pub fn new(mesh: &SurfaceMesh, points: Vec<Point3>) -> Result<Self> {
        let mut distances = Vec::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("probe {index} has non-finite coordinates")));
            }
            let (distance, t) = mesh.distance_to(p);
            let minimum = PROBE_CLEARANCE * mesh.diameter(t);
            if distance <= minimum {
                return Err(Error::ProbeTooClose {
                    index,
                    distance,
                    minimum,
                });
            }
            if mesh.contains(p) {
                return Err(Error::Config(format!("probe {index} lies inside the scatterer")));
            }
            distances.push(distance);
        }
        Ok(Self { points, distances })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Electric field at the probes, indexed `[step][probe]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldHistory {
    dt: f64,
    values: Vec<Vec<Point3>>,
}

impl FieldHistory {
    pub fn new(dt: f64, values: Vec<Vec<Point3>>) -> Self {
        Self { dt, values }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn num_probes(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn value(&self, step: usize, probe: usize) -> Point3 {
        self.values[step][probe]
    }

    pub fn values(&self) -> &[Vec<Point3>] {
        &self.values
    }

    pub fn probe_series(&self, probe: usize) -> Vec<Point3> {
        self.values.iter().map(|v| v[probe]).collect()
    }

    /// Largest field magnitude at one probe over all steps.
    pub fn peak(&self, probe: usize) -> f64 {
        self.values.iter().map(|v| v[probe].norm()).fold(0.0, f64::max)
    }

    /// CSV with header `t,p0_x,p0_y,p0_z,...`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for p in 0..self.num_probes() {
            write!(out, ",p{p}_x,p{p}_y,p{p}_z").unwrap();
        }
        out.push('\n');
        for (n, row) in self.values.iter().enumerate() {
            write!(out, "{:e}", n as f64 * self.dt).unwrap();
            for e in row {
                write!(out, ",{:e},{:e},{:e}", e.x, e.y, e.z).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Moments `b_n[i] = int_Gamma beta(., n dt) . phi_i` of
/// `beta = -nu x (E_inc x nu)`, the negated tangential trace.
pub fn assemble_rhs(space: &RwgSpace, field: &IncidentField, cfg: &CqConfig) -> Result<VectorHistory> {
    assemble_rhs_with_degree(space, field, cfg, RHS_DEGREE)
}

pub fn assemble_rhs_with_degree(
    space: &RwgSpace,
    field: &IncidentField,
    cfg: &CqConfig,
    degree: usize,
) -> Result<VectorHistory> {
    cfg.validate()?;
    (0..=cfg.steps)
        .into_par_iter()
        .map(|n| {
            let t = cfg.time(n);
            let failure = std::sync::Mutex::new(None);
            let e = |_: usize, x: &Point3| match field.value(x, t) {
                Ok(v) => v,
                Err(err) => {
                    *failure.lock().unwrap() = Some(err);
                    Point3::zeros()
                }
            };
            let b: Vec<f64> = tested_moments(space, &e, degree).iter().map(|v| -v).collect();
            match failure.into_inner().unwrap() {
                Some(err) => Err(err),
                None => Ok(b),
            }
        })
        .collect()
}

/// Solves the semidiscrete equations for the density `J^h` driven by `field`.
pub fn solve_scattering(
    space: &RwgSpace,
    field: &IncidentField,
    c: f64,
    cq: &CqConfig,
    quad: &QuadratureConfig,
) -> Result<DensityHistory> {
    solve_scattering_with(space, field, c, cq, quad, SolveMethod::Auto)
}

pub fn solve_scattering_with(
    space: &RwgSpace,
    field: &IncidentField,
    c: f64,
    cq: &CqConfig,
    quad: &QuadratureConfig,
    method: SolveMethod,
) -> Result<DensityHistory> {
    if (field.c() - c).abs() > 1e-14 * c.abs() {
        return Err(Error::Config(format!(
            "incident field speed {} differs from the medium speed {c}",
            field.c()
        )));
    }
    field.check_against(space.mesh())?;
    let rhs = assemble_rhs(space, field, cq)?;
    solve_rhs(space, &rhs, c, cq, quad, method)
}

/// Solves `V_h * j = -b` for a given right-hand side history.
///
/// The tested tangential trace of the single layer potential is `-V_h`, so
/// `pi_tau (S * j) = beta` becomes `V_h * j = -b`.
pub fn solve_rhs(
    space: &RwgSpace,
    rhs: &[Vec<f64>],
    c: f64,
    cq: &CqConfig,
    quad: &QuadratureConfig,
    method: SolveMethod,
) -> Result<DensityHistory> {
    let v = EfieOperator::new(space, c, *quad)?;
    let negated: VectorHistory = rhs.iter().map(|b| b.iter().map(|x| -x).collect()).collect();
    cq_solve(&v, &negated, cq, method)
}

/// `E^h = S_h * j` at the probes.
pub fn evaluate_scattered_field(
    space: &RwgSpace,
    j: &DensityHistory,
    probes: &ObservationSet,
    c: f64,
    cq: &CqConfig,
    quad: &QuadratureConfig,
) -> Result<FieldHistory> {
    if j.dim() != space.dim() {
        return Err(Error::Dimension(format!(
            "density has {} coefficients, space has {}",
            j.dim(),
            space.dim()
        )));
    }
    if (j.dt() - cq.dt).abs() > 1e-12 * cq.dt {
        return Err(Error::Config(format!(
            "density time step {} differs from {}",
            j.dt(),
            cq.dt
        )));
    }
    let s = PotentialOperator::new(space, probes.points().to_vec(), c, *quad)?;
    let out = cq_convolve(&s, j.steps(), cq)?;
    let values = out
        .iter()
        .map(|row| row.chunks(3).map(|e| Point3::new(e[0], e[1], e[2])).collect())
        .collect();
    Ok(FieldHistory::new(cq.dt, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::{cq_weights, CqConfig};
    use crate::linalg::{self, Lu};
    use crate::mesh::{octahedron, unit_right_pair};
    use crate::scattering::{dipole_field, plane_wave, Waveform};

    fn pulse() -> Waveform {
        Waveform::new(2.0, 0.5, Some(3.0)).unwrap()
    }

    #[test]
    fn rhs_of_zero_normal_and_flat_fields() {
        let space = RwgSpace::new(unit_right_pair());
        let cfg = CqConfig::new(2, 0.2, 10).unwrap();
        let g = pulse();
        let zero = dipole_field(Point3::new(0.3, 0.3, -1.0), Point3::zeros(), g, 1.0).unwrap();
        assert!(assemble_rhs(&space, &zero, &cfg)
            .unwrap()
            .iter()
            .flatten()
            .all(|v| *v == 0.0));
        // z-polarized, hence normal to the patch
        let normal = plane_wave(Point3::x(), Point3::z(), g, 1.0, Point3::new(-1.0, 0.0, 0.0)).unwrap();
        for b in assemble_rhs(&space, &normal, &cfg).unwrap() {
            assert!(b.iter().all(|v| v.abs() < 1e-14));
        }
        let flat = plane_wave(Point3::z(), Point3::x(), g, 1.0, Point3::new(0.0, 0.0, 0.0)).unwrap();
        let b = assemble_rhs(&space, &flat, &cfg).unwrap();
        let ex = tested_moments(&space, &|_: usize, _: &Point3| Point3::x(), 4);
        for (n, bn) in b.iter().enumerate() {
            let expected = -g.value(cfg.time(n)) * ex[0];
            assert!((bn[0] - expected).abs() < 1e-14, "{n}");
        }
    }

    #[test]
    fn zero_field_gives_zero_density_and_field() {
        let space = RwgSpace::new(octahedron());
        let cfg = CqConfig::new(2, 0.2, 12).unwrap();
        let f = dipole_field(Point3::zeros(), Point3::z(), Waveform::zero(), 1.0).unwrap();
        let j = solve_scattering(&space, &f, 1.0, &cfg, &QuadratureConfig::default()).unwrap();
        assert!(j.steps().iter().flatten().all(|v| *v == 0.0));
        let probes = ObservationSet::new(space.mesh(), vec![Point3::new(4.0, 0.0, 0.0)]).unwrap();
        let e = evaluate_scattered_field(&space, &j, &probes, 1.0, &cfg, &QuadratureConfig::default()).unwrap();
        assert!(e.values().iter().flatten().all(|v| *v == Point3::zeros()));
    }

    #[test]
    fn probes_must_be_exterior_and_clear() {
        let mesh = octahedron();
        assert!(ObservationSet::new(&mesh, vec![Point3::new(0.1, 0.0, 0.0)]).is_err());
        let near = mesh.centroid(0) * 1.0001;
        assert!(matches!(
            ObservationSet::new(&mesh, vec![near]),
            Err(Error::ProbeTooClose { .. })
        ));
        let ok = ObservationSet::new(&mesh, vec![Point3::new(0.0, 0.0, 3.0)]).unwrap();
        assert!((ok.distances()[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn march_matches_plain_triangular_solve_on_octahedron() {
        let space = RwgSpace::new(octahedron());
        let cfg = CqConfig::new(2, 0.25, 16).unwrap();
        let quad = QuadratureConfig::default();
        let f = plane_wave(Point3::z(), Point3::x(), pulse(), 1.0, Point3::new(0.0, 0.0, -1.5)).unwrap();
        let j = solve_scattering_with(&space, &f, 1.0, &cfg, &quad, SolveMethod::March).unwrap();
        let rhs = assemble_rhs(&space, &f, &cfg).unwrap();
        let w = cq_weights(&EfieOperator::new(&space, 1.0, quad).unwrap(), &cfg).unwrap();
        let lu = Lu::<f64>::new(&w[0], "W_0").unwrap();
        let mut brute: Vec<Vec<f64>> = Vec::new();
        for n in 0..=16 {
            let mut r: Vec<f64> = rhs[n].iter().map(|v| -v).collect();
            for m in 0..n {
                for i in 0..space.dim() {
                    for k in 0..space.dim() {
                        r[i] -= w[n - m][(i, k)] * brute[m][k];
                    }
                }
            }
            brute.push(lu.solve(&r));
        }
        let scale = brute.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in j.steps().iter().flatten().zip(brute.iter().flatten()) {
            assert!((a - b).abs() <= 1e-9 * scale);
        }
        let all = solve_scattering_with(&space, &f, 1.0, &cfg, &quad, SolveMethod::AllAtOnce).unwrap();
        for (a, b) in j.steps().iter().flatten().zip(all.steps().iter().flatten()) {
            assert!((a - b).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn single_dof_field_matches_weight_convolution() {
        let space = RwgSpace::new(unit_right_pair());
        let cfg = CqConfig::new(2, 0.2, 24).unwrap();
        let quad = QuadratureConfig::default();
        let steps: Vec<Vec<f64>> = (0..=24).map(|n| vec![pulse().value(cfg.time(n))]).collect();
        let j = DensityHistory::new(steps.clone(), cfg.dt).unwrap();
        let pts = vec![Point3::new(0.2, 0.3, 2.5), Point3::new(-2.5, 0.5, 0.5)];
        let probes = ObservationSet::new(space.mesh(), pts.clone()).unwrap();
        let e = evaluate_scattered_field(&space, &j, &probes, 1.0, &cfg, &quad).unwrap();
        let op = PotentialOperator::new(&space, pts, 1.0, quad).unwrap();
        let w = cq_weights(&op, &cfg).unwrap();
        for n in 0..=24 {
            for p in 0..2 {
                for k in 0..3 {
                    let direct: f64 = (0..=n).map(|m| w[n - m][(3 * p + k, 0)] * steps[m][0]).sum();
                    assert!((e.value(n, p)[k] - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
                }
            }
        }
    }

    #[test]
    fn galerkin_residual_and_superposition() {
        let space = RwgSpace::new(octahedron());
        let cfg = CqConfig::new(2, 0.2, 20).unwrap();
        let quad = QuadratureConfig::default();
        let f1 = plane_wave(Point3::z(), Point3::x(), pulse(), 1.0, Point3::new(0.0, 0.0, -1.5)).unwrap();
        let f2 = dipole_field(Point3::new(0.1, 0.0, 0.2), Point3::new(0.0, 1.0, 1.0), pulse(), 1.0).unwrap();
        let b1 = assemble_rhs(&space, &f1, &cfg).unwrap();
        let b2 = assemble_rhs(&space, &f2, &cfg).unwrap();
        let sum: Vec<Vec<f64>> = b1
            .iter()
            .zip(&b2)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        let j1 = solve_rhs(&space, &b1, 1.0, &cfg, &quad, SolveMethod::March).unwrap();
        let j2 = solve_rhs(&space, &b2, 1.0, &cfg, &quad, SolveMethod::March).unwrap();
        let js = solve_rhs(&space, &sum, 1.0, &cfg, &quad, SolveMethod::March).unwrap();
        let scale = js.steps().iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for n in 0..=20 {
            for i in 0..space.dim() {
                assert!((js.step(n)[i] - j1.step(n)[i] - j2.step(n)[i]).abs() <= 1e-12 * scale);
            }
        }
        let w = cq_weights(&EfieOperator::new(&space, 1.0, quad).unwrap(), &cfg).unwrap();
        let bnorm = sum.iter().map(|b| linalg::norm2(b)).fold(0.0, f64::max);
        for n in 0..=20 {
            let mut r: Vec<f64> = sum[n].iter().map(|v| -v).collect();
            let mut acc = vec![0.0; space.dim()];
            for m in 0..=n {
                linalg::matvec(&w[n - m], js.step(m), &mut acc);
            }
            for (ri, ai) in r.iter_mut().zip(&acc) {
                *ri -= ai;
            }
            assert!(linalg::norm2(&r) <= 1e-10 * bnorm);
        }
    }
}
