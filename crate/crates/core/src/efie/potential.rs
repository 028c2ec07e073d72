use faer::Mat;
use rayon::prelude::*;

use super::assembly::TrianglePoints;
use super::kernel::{check_laplace_parameter, green, green_gradient};
use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::{Point3, SurfaceMesh};
use crate::quadrature::{QuadratureConfig, TriangleRule};
use crate::rwg::RwgSpace;

/// Probes closer to a triangle centroid than this multiple of
/// `near_threshold * diameter` use the doubled-degree rule.
const PROBE_NEAR_FACTOR: f64 = 2.0;

/// Distances of probes to the surface, rejecting any closer than
/// `threshold` times the diameter of the nearest triangle.
pub fn check_probes(mesh: &SurfaceMesh, points: &[Point3], threshold: f64) -> Result<Vec<f64>> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::NonFinite(format!("probe {index} has non-finite coordinates")));
            }
            let (distance, t) = mesh.distance_to(p);
            let minimum = threshold * mesh.diameter(t);
            if distance <= minimum || distance == 0.0 {
                return Err(Error::ProbeTooClose {
                    index,
                    distance,
                    minimum,
                });
            }
            Ok(distance)
        })
        .collect()
}

/// Potential evaluation matrix `S_h(s)` of shape `3 P x dim`: row `3 p + k` is
/// component `k` of
/// `E(x_p) = -(s/c) int G_s(x_p, y) j(y) dy + (c/s) grad_x int G_s(x_p, y) div j(y) dy`.
pub fn assemble_potential_matrix(
    points: &[Point3],
    space: &RwgSpace,
    s: c64,
    c: f64,
    quad: &QuadratureConfig,
) -> Result<Mat<c64>> {
    check_laplace_parameter(s)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("wave speed must be positive (got {c})")));
    }
    quad.validate()?;
    let mesh = space.mesh();
    check_probes(mesh, points, quad.near_threshold)?;
    Ok(potential_matrix_unchecked(points, space, s, c, quad))
}

pub(crate) fn potential_matrix_unchecked(
    points: &[Point3],
    space: &RwgSpace,
    s: c64,
    c: f64,
    quad: &QuadratureConfig,
) -> Mat<c64> {
    let mesh = space.mesh();
    let regular_rule = TriangleRule::of_degree(quad.regular);
    let near_rule = TriangleRule::of_degree(2 * quad.regular);
    let regular: Vec<TrianglePoints> = (0..mesh.num_triangles())
        .map(|t| TrianglePoints::new(mesh, t, &regular_rule))
        .collect();
    let near: Vec<TrianglePoints> = (0..mesh.num_triangles())
        .map(|t| TrianglePoints::new(mesh, t, &near_rule))
        .collect();
    let kappa = s / c;
    let (pa, pb) = (s / c, c / s);
    let n = space.dim();
    let rows: Vec<Vec<[c64; 3]>> = points
        .par_iter()
        .map(|x| {
            let mut row = vec![[c64::new(0.0, 0.0); 3]; n];
            for t in 0..mesh.num_triangles() {
                let lb = space.local_basis(t);
                if lb.iter().all(Option::is_none) {
                    continue;
                }
                let oy = mesh.centroid(t);
                let diam = mesh.diameter(t);
                let pts = if (x - oy).norm() < PROBE_NEAR_FACTOR * quad.near_threshold * diam {
                    &near[t]
                } else {
                    &regular[t]
                };
                let mut g0 = c64::new(0.0, 0.0);
                let mut j0 = [c64::new(0.0, 0.0); 3];
                let mut grad = [c64::new(0.0, 0.0); 3];
                for (y, w) in pts.points.iter().zip(&pts.weights) {
                    let d = x - y;
                    let r = d.norm();
                    let g = green(kappa, r) * *w;
                    let dy = y - oy;
                    g0 += g;
                    let gg = green_gradient(kappa, &d, r);
                    for k in 0..3 {
                        j0[k] += g * dy[k];
                        grad[k] += gg[k] * *w;
                    }
                }
                let corners = mesh.corners(t);
                for (b, l) in lb.iter().enumerate() {
                    let Some(l) = l else { continue };
                    let wb = corners[b] - oy;
                    let entry = &mut row[l.dof];
                    for k in 0..3 {
                        entry[k] += -pa * l.scale * (j0[k] - g0 * wb[k]) + pb * l.divergence * grad[k];
                    }
                }
            }
            row
        })
        .collect();
    Mat::<c64>::from_fn(3 * points.len(), n, |i, j| rows[i / 3][j][i % 3])
}
