use faer::Mat;
use rayon::prelude::*;

use super::kernel::{check_laplace_parameter, green};
use crate::c64;
use crate::error::{Error, Result};
use crate::mesh::{Point3, SurfaceMesh};
use crate::quadrature::{PairKind, QuadratureConfig, SingularRule, TriangleRule};
use crate::rwg::{RwgSpace, TangentialField};

/// Number of source triangles whose pair blocks are computed before they are
/// scattered into the matrix.
const CHUNK: usize = 32;

/// Quadrature points of one triangle in physical coordinates; weights include the area.
pub(crate) struct TrianglePoints {
    pub points: Vec<Point3>,
    pub weights: Vec<f64>,
}

impl TrianglePoints {
    pub fn new(mesh: &SurfaceMesh, t: usize, rule: &TriangleRule) -> Self {
        let [a, b, c] = mesh.corners(t);
        let area = mesh.area(t);
        let (points, weights) = rule
            .iter()
            .map(|(xi, w)| (a + xi[0] * (b - a) + xi[1] * (c - a), w * area))
            .unzip();
        Self { points, weights }
    }
}

/// Iterates quadrature point pairs `(x, y, w)` over products of triangles.
pub(crate) struct PairIntegrator<'a> {
    mesh: &'a SurfaceMesh,
    regular: Vec<TrianglePoints>,
    near: Vec<TrianglePoints>,
    coincident: SingularRule,
    edge: SingularRule,
    vertex: SingularRule,
    threshold: f64,
}

impl<'a> PairIntegrator<'a> {
    pub fn new(mesh: &'a SurfaceMesh, quad: &QuadratureConfig) -> Self {
        let regular_rule = TriangleRule::of_degree(quad.regular);
        let near_rule = TriangleRule::of_degree(2 * quad.regular);
        let regular = (0..mesh.num_triangles())
            .map(|t| TrianglePoints::new(mesh, t, &regular_rule))
            .collect();
        let near = (0..mesh.num_triangles())
            .map(|t| TrianglePoints::new(mesh, t, &near_rule))
            .collect();
        Self {
            mesh,
            regular,
            near,
            coincident: SingularRule::new(PairKind::Coincident, quad.singular),
            edge: SingularRule::new(PairKind::Edge, quad.singular),
            vertex: SingularRule::new(PairKind::Vertex, quad.singular),
            threshold: quad.near_threshold,
        }
    }

    pub fn classify(&self, tau: usize, t: usize) -> PairKind {
        if tau == t {
            return PairKind::Coincident;
        }
        let a = self.mesh.triangles()[tau];
        let b = self.mesh.triangles()[t];
        PairKind::from_shared(a.iter().filter(|v| b.contains(v)).count())
    }

    pub fn is_near(&self, tau: usize, t: usize) -> bool {
        let d = (self.mesh.centroid(tau) - self.mesh.centroid(t)).norm();
        d < self.threshold * self.mesh.diameter(tau).max(self.mesh.diameter(t))
    }

    /// Calls `f(x, y, w)` for every quadrature pair; `sum w f` approximates
    /// the double integral over `tau x t`.
    #[inline]
    pub fn for_each(&self, tau: usize, t: usize, mut f: impl FnMut(&Point3, &Point3, f64)) {
        let kind = self.classify(tau, t);
        if kind == PairKind::Regular {
            let (p, q) = if self.is_near(tau, t) {
                (&self.near[tau], &self.near[t])
            } else {
                (&self.regular[tau], &self.regular[t])
            };
            for (x, wx) in p.points.iter().zip(&p.weights) {
                for (y, wy) in q.points.iter().zip(&q.weights) {
                    f(x, y, wx * wy);
                }
            }
            return;
        }
        let (cx, cy, rule) = match kind {
            PairKind::Coincident => {
                let c = self.mesh.corners(tau);
                (c, c, &self.coincident)
            }
            PairKind::Edge => {
                let (cx, cy) = self.edge_order(tau, t);
                (cx, cy, &self.edge)
            }
            _ => {
                let (cx, cy) = self.vertex_order(tau, t);
                (cx, cy, &self.vertex)
            }
        };
        let scale = self.mesh.area(tau) * self.mesh.area(t);
        for (xh, yh, w) in rule.iter() {
            let x = cx[0] + xh[0] * (cx[1] - cx[0]) + xh[1] * (cx[2] - cx[0]);
            let y = cy[0] + yh[0] * (cy[1] - cy[0]) + yh[1] * (cy[2] - cy[0]);
            f(&x, &y, w * scale);
        }
    }

    /// Corners ordered `(p, q, r)` with the shared edge `p < q` first.
    fn edge_order(&self, tau: usize, t: usize) -> ([Point3; 3], [Point3; 3]) {
        let a = self.mesh.triangles()[tau];
        let b = self.mesh.triangles()[t];
        let mut shared: Vec<usize> = a.iter().copied().filter(|v| b.contains(v)).collect();
        shared.sort_unstable();
        let ra = *a.iter().find(|v| !shared.contains(v)).expect("third vertex");
        let rb = *b.iter().find(|v| !shared.contains(v)).expect("third vertex");
        let v = self.mesh.vertices();
        ([v[shared[0]], v[shared[1]], v[ra]], [v[shared[0]], v[shared[1]], v[rb]])
    }

    /// Corners rotated so the shared vertex comes first.
    fn vertex_order(&self, tau: usize, t: usize) -> ([Point3; 3], [Point3; 3]) {
        let a = self.mesh.triangles()[tau];
        let b = self.mesh.triangles()[t];
        let p = *a.iter().find(|v| b.contains(v)).expect("shared vertex");
        let v = self.mesh.vertices();
        let rotate = |tri: [usize; 3]| {
            let k = tri.iter().position(|&x| x == p).expect("vertex in triangle");
            [v[tri[k]], v[tri[(k + 1) % 3]], v[tri[(k + 2) % 3]]]
        };
        (rotate(a), rotate(b))
    }

    /// Kernel moments of a pair, with `x` and `y` taken relative to the triangle centroids.
    pub fn moments(&self, kappa: c64, tau: usize, t: usize) -> PairMoments {
        let ox = self.mesh.centroid(tau);
        let oy = self.mesh.centroid(t);
        let mut m = PairMoments::default();
        self.for_each(tau, t, |x, y, w| {
            let r = (x - y).norm();
            let g = green(kappa, r) * w;
            let dx = x - ox;
            let dy = y - oy;
            m.i0 += g;
            for k in 0..3 {
                m.ix[k] += g * dx[k];
                m.iy[k] += g * dy[k];
            }
            m.ixy += g * dx.dot(&dy);
        });
        m
    }
}

/// `int int G`, `int int G x`, `int int G y`, `int int G x.y` over a triangle pair.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct PairMoments {
    pub i0: c64,
    pub ix: [c64; 3],
    pub iy: [c64; 3],
    pub ixy: c64,
}

/// Local 3x3 block `(s/c) A + (c/s) B` of a triangle pair.
fn local_block(
    space: &RwgSpace,
    integ: &PairIntegrator,
    kappa: c64,
    pa: c64,
    pb: c64,
    tau: usize,
    t: usize,
) -> [[c64; 3]; 3] {
    let mesh = space.mesh();
    let la = space.local_basis(tau);
    let lb = space.local_basis(t);
    let mut block = [[c64::new(0.0, 0.0); 3]; 3];
    if la.iter().all(Option::is_none) || lb.iter().all(Option::is_none) {
        return block;
    }
    let m = integ.moments(kappa, tau, t);
    let ox = mesh.centroid(tau);
    let oy = mesh.centroid(t);
    let cx = mesh.corners(tau);
    let cy = mesh.corners(t);
    for a in 0..3 {
        let Some(ba) = la[a] else { continue };
        let va = cx[a] - ox;
        let va_iy = va[0] * m.iy[0] + va[1] * m.iy[1] + va[2] * m.iy[2];
        for b in 0..3 {
            let Some(bb) = lb[b] else { continue };
            let wb = cy[b] - oy;
            let ix_wb = m.ix[0] * wb[0] + m.ix[1] * wb[1] + m.ix[2] * wb[2];
            let vector = m.ixy - ix_wb - va_iy + m.i0 * va.dot(&wb);
            let scalar = m.i0;
            block[a][b] = pa * (ba.scale * bb.scale) * vector + pb * (ba.divergence * bb.divergence) * scalar;
        }
    }
    block
}

fn check_inputs(s: c64, c: f64, quad: &QuadratureConfig) -> Result<()> {
    check_laplace_parameter(s)?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("wave speed must be positive (got {c})")));
    }
    quad.validate()
}

/// Galerkin matrix `V_h(s)_ij = (s/c) int int G_s phi_j . phi_i + (c/s) int int G_s div phi_j div phi_i`.
///
/// Pairs `tau <= t` are integrated once and mirrored. Pair blocks are computed
/// in parallel and added to the matrix in a fixed order, so the result does not
/// depend on the thread count.
pub fn assemble_efie_matrix(space: &RwgSpace, s: c64, c: f64, quad: &QuadratureConfig) -> Result<Mat<c64>> {
    check_inputs(s, c, quad)?;
    let mesh = space.mesh();
    let integ = PairIntegrator::new(mesh, quad);
    let kappa = s / c;
    let (pa, pb) = (s / c, c / s);
    let n = space.dim();
    let nt = mesh.num_triangles();
    let mut v = Mat::<c64>::zeros(n, n);
    for lo in (0..nt).step_by(CHUNK) {
        let hi = (lo + CHUNK).min(nt);
        let blocks: Vec<Vec<[[c64; 3]; 3]>> = (lo..hi)
            .into_par_iter()
            .map(|tau| {
                (tau..nt)
                    .map(|t| local_block(space, &integ, kappa, pa, pb, tau, t))
                    .collect()
            })
            .collect();
        for (tau, row) in (lo..hi).zip(&blocks) {
            let la = space.local_basis(tau);
            for (t, block) in (tau..nt).zip(row) {
                let lb = space.local_basis(t);
                for a in 0..3 {
                    let Some(ba) = la[a] else { continue };
                    for b in 0..3 {
                        let Some(bb) = lb[b] else { continue };
                        v[(ba.dof, bb.dof)] += block[a][b];
                        if tau != t {
                            v[(bb.dof, ba.dof)] += block[a][b];
                        }
                    }
                }
            }
        }
    }
    Ok(v)
}

/// Same matrix as [`assemble_efie_matrix`], integrating every ordered pair
/// separately instead of mirroring. Used to check the symmetry of the
/// discretization itself.
pub fn assemble_efie_matrix_unsymmetrized(
    space: &RwgSpace,
    s: c64,
    c: f64,
    quad: &QuadratureConfig,
) -> Result<Mat<c64>> {
    check_inputs(s, c, quad)?;
    let mesh = space.mesh();
    let integ = PairIntegrator::new(mesh, quad);
    let kappa = s / c;
    let (pa, pb) = (s / c, c / s);
    let n = space.dim();
    let nt = mesh.num_triangles();
    let rows: Vec<Vec<[[c64; 3]; 3]>> = (0..nt)
        .into_par_iter()
        .map(|tau| {
            (0..nt)
                .map(|t| local_block(space, &integ, kappa, pa, pb, tau, t))
                .collect()
        })
        .collect();
    let mut v = Mat::<c64>::zeros(n, n);
    for (tau, row) in rows.iter().enumerate() {
        let la = space.local_basis(tau);
        for (t, block) in row.iter().enumerate() {
            let lb = space.local_basis(t);
            for a in 0..3 {
                let Some(ba) = la[a] else { continue };
                for b in 0..3 {
                    let Some(bb) = lb[b] else { continue };
                    v[(ba.dof, bb.dof)] += block[a][b];
                }
            }
        }
    }
    Ok(v)
}

/// `b_i = (s/c) int int G_s phi_i(x) . f(y) + (c/s) int int G_s div phi_i(x) div f(y)`,
/// the EFIE bilinear form between the basis and a field with known divergence.
pub fn efie_field_moments(
    space: &RwgSpace,
    field: &dyn TangentialField,
    s: c64,
    c: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<c64>> {
    check_inputs(s, c, quad)?;
    let mesh = space.mesh();
    let nt = mesh.num_triangles();
    let probe = mesh.centroid(0);
    if field.surface_divergence(0, &probe).is_none() {
        return Err(Error::Unsupported(
            "energy moments need the surface divergence of the field".into(),
        ));
    }
    let integ = PairIntegrator::new(mesh, quad);
    let kappa = s / c;
    let (pa, pb) = (s / c, c / s);
    let parts: Vec<[c64; 3]> = (0..nt)
        .into_par_iter()
        .map(|tau| {
            let la = space.local_basis(tau);
            let ox = mesh.centroid(tau);
            let cx = mesh.corners(tau);
            let mut acc = [c64::new(0.0, 0.0); 3];
            if la.iter().all(Option::is_none) {
                return acc;
            }
            for t in 0..nt {
                let nu = mesh.normal(t);
                let mut p = c64::new(0.0, 0.0);
                let mut q = [c64::new(0.0, 0.0); 3];
                let mut d = c64::new(0.0, 0.0);
                integ.for_each(tau, t, |x, y, w| {
                    let g = green(kappa, (x - y).norm()) * w;
                    let f = field.value(t, y);
                    let f = f - f.dot(&nu) * nu;
                    p += g * (x - ox).dot(&f);
                    for k in 0..3 {
                        q[k] += g * f[k];
                    }
                    d += g * field.surface_divergence(t, y).unwrap_or(0.0);
                });
                for a in 0..3 {
                    let Some(ba) = la[a] else { continue };
                    let va = cx[a] - ox;
                    let vq = q[0] * va[0] + q[1] * va[1] + q[2] * va[2];
                    acc[a] += pa * ba.scale * (p - vq) + pb * ba.divergence * d;
                }
            }
            acc
        })
        .collect();
    let mut b = vec![c64::new(0.0, 0.0); space.dim()];
    for (tau, acc) in parts.iter().enumerate() {
        for (a, lb) in space.local_basis(tau).iter().enumerate() {
            if let Some(lb) = lb {
                b[lb.dof] += acc[a];
            }
        }
    }
    Ok(b)
}

/// Energy Gram matrix: the Hermitian part of `conj(s0) V_h(s0)` at `s0 = 1`,
/// which is real symmetric positive definite.
pub fn energy_gram(space: &RwgSpace, c: f64, quad: &QuadratureConfig) -> Result<Mat<f64>> {
    let v = assemble_efie_matrix(space, c64::new(1.0, 0.0), c, quad)?;
    let n = space.dim();
    Ok(Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (v[(i, j)].re + v[(j, i)].re)))
}
