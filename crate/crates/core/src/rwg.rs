//! Lowest-order Raviart–Thomas (RWG) space on a triangulated surface.
//!
//! One degree of freedom per interior edge. On the triangle `T+` whose
//! boundary runs `v0 -> v1` (with `v0 < v1`) the basis function is
//! `L / (2 A+) (x - p+)`, on the other neighbour `-L / (2 A-) (x - p-)`,
//! where `p±` are the vertices opposite the edge.

use faer::Mat;
use rayon::prelude::*;

use crate::c64;
use crate::error::{Error, Result};
use crate::linalg;
use crate::mesh::{barycentric, Point3, SurfaceMesh};
use crate::quadrature::{QuadratureConfig, TriangleRule};

/// Tolerance on barycentric coordinates when checking that a point lies in a triangle.
pub const INSIDE_TOLERANCE: f64 = 1e-10;

/// One side of the support of a basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub triangle: usize,
    /// Local index (0..3) of the free vertex, which is also the local index of the edge.
    pub local: usize,
    pub free_vertex: usize,
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwgDof {
    pub edge: usize,
    pub length: f64,
    pub plus: Support,
    pub minus: Support,
}

/// Basis data of one local edge of a triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBasis {
    pub dof: usize,
    /// `±1`.
    pub sign: f64,
    /// `sign * L / (2 A)`: the function is `scale * (x - free_vertex)`.
    pub scale: f64,
    /// `sign * L / A`.
    pub divergence: f64,
}

#[derive(Debug, Clone)]
pub struct RwgSpace {
    mesh: SurfaceMesh,
    dofs: Vec<RwgDof>,
    local: Vec<[Option<LocalBasis>; 3]>,
}

impl RwgSpace {
    pub fn new(mesh: SurfaceMesh) -> Self {
        let topo = mesh.topology();
        let mut dofs = Vec::new();
        let mut local = vec![[None; 3]; mesh.num_triangles()];
        for (e, edge) in topo.edges().iter().enumerate() {
            let Some(minus) = edge.minus else { continue };
            let support = |t: usize| {
                let k = topo
                    .triangle_edges(t)
                    .iter()
                    .position(|&x| x == e)
                    .expect("edge in triangle");
                Support {
                    triangle: t,
                    local: k,
                    free_vertex: mesh.triangles()[t][k],
                    area: mesh.area(t),
                }
            };
            let dof = dofs.len();
            let plus = support(edge.plus);
            let minus = support(minus);
            for (s, sign) in [(plus, 1.0), (minus, -1.0)] {
                local[s.triangle][s.local] = Some(LocalBasis {
                    dof,
                    sign,
                    scale: sign * edge.length / (2.0 * s.area),
                    divergence: sign * edge.length / s.area,
                });
            }
            dofs.push(RwgDof {
                edge: e,
                length: edge.length,
                plus,
                minus,
            });
        }
        Self { mesh, dofs, local }
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.dofs.len()
    }

    pub fn dofs(&self) -> &[RwgDof] {
        &self.dofs
    }

    pub fn dof(&self, i: usize) -> &RwgDof {
        &self.dofs[i]
    }

    /// Basis data of the three local edges of `triangle` (`None` for boundary edges).
    pub fn local_basis(&self, triangle: usize) -> &[Option<LocalBasis>; 3] {
        &self.local[triangle]
    }

    /// Value and surface divergence of basis `dof` at `point` on `triangle`.
    ///
    /// Returns zeros when `triangle` is not in the support of `dof`.
    pub fn evaluate_basis(&self, dof: usize, triangle: usize, point: &Point3) -> Result<(Point3, f64)> {
        if dof >= self.dim() {
            return Err(Error::Index(format!("dof {dof} >= dimension {}", self.dim())));
        }
        if triangle >= self.mesh.num_triangles() {
            return Err(Error::Index(format!(
                "triangle {triangle} >= {}",
                self.mesh.num_triangles()
            )));
        }
        let [a, b, c] = self.mesh.corners(triangle);
        let bary = barycentric(point, &a, &b, &c);
        let off_plane = (point - a).dot(&self.mesh.normal(triangle)).abs();
        let inside = bary
            .iter()
            .all(|&l| (-INSIDE_TOLERANCE..=1.0 + INSIDE_TOLERANCE).contains(&l));
        if !inside || off_plane > INSIDE_TOLERANCE * self.mesh.diameter(triangle) {
            return Err(Error::PointOutsideTriangle { triangle, bary });
        }
        for (k, lb) in self.local[triangle].iter().enumerate() {
            if let Some(lb) = lb.filter(|lb| lb.dof == dof) {
                let p = self.mesh.vertices()[self.mesh.triangles()[triangle][k]];
                return Ok((lb.scale * (point - p), lb.divergence));
            }
        }
        Ok((Point3::zeros(), 0.0))
    }

    /// Tangential field `sum_i c_i phi_i` at a point of `triangle`.
    pub fn expand(&self, coefficients: &[f64], triangle: usize, point: &Point3) -> (Point3, f64) {
        let mut v = Point3::zeros();
        let mut div = 0.0;
        for (k, lb) in self.local[triangle].iter().enumerate() {
            if let Some(lb) = lb {
                let p = self.mesh.vertices()[self.mesh.triangles()[triangle][k]];
                let c = coefficients[lb.dof];
                v += c * lb.scale * (point - p);
                div += c * lb.divergence;
            }
        }
        (v, div)
    }

    /// Maps standard reference coordinates to a point on `triangle`.
    pub fn map_point(&self, triangle: usize, xi: [f64; 2]) -> Point3 {
        let [a, b, c] = self.mesh.corners(triangle);
        a + xi[0] * (b - a) + xi[1] * (c - a)
    }
}

/// Mass matrix `M_ij = int phi_i . phi_j` and divergence matrix
/// `D_ij = int div phi_i div phi_j`, using a triangle rule of the given degree.
pub fn gram_matrices(space: &RwgSpace, degree: usize) -> (Mat<f64>, Mat<f64>) {
    let n = space.dim();
    let rule = TriangleRule::of_degree(degree.max(1));
    let mesh = space.mesh();
    let blocks: Vec<[[(f64, f64); 3]; 3]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let verts = mesh.corners(t);
            let area = mesh.area(t);
            let lb = space.local_basis(t);
            let mut block = [[(0.0, 0.0); 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    let (Some(la), Some(lbb)) = (lb[a], lb[b]) else {
                        continue;
                    };
                    let mut m = 0.0;
                    for (xi, w) in rule.iter() {
                        let x = space.map_point(t, xi);
                        m += w * (x - verts[a]).dot(&(x - verts[b]));
                    }
                    block[a][b] = (la.scale * lbb.scale * area * m, la.divergence * lbb.divergence * area);
                }
            }
            block
        })
        .collect();
    let mut mass = Mat::<f64>::zeros(n, n);
    let mut div = Mat::<f64>::zeros(n, n);
    for (t, block) in blocks.iter().enumerate() {
        let lb = space.local_basis(t);
        for a in 0..3 {
            for b in 0..3 {
                if let (Some(la), Some(lbb)) = (lb[a], lb[b]) {
                    mass[(la.dof, lbb.dof)] += block[a][b].0;
                    div[(la.dof, lbb.dof)] += block[a][b].1;
                }
            }
        }
    }
    (mass, div)
}

/// A tangential surface field evaluated triangle by triangle.
pub trait TangentialField: Sync {
    fn value(&self, triangle: usize, x: &Point3) -> Point3;

    /// Surface divergence, when known. Needed by the energy projection.
    fn surface_divergence(&self, _triangle: usize, _x: &Point3) -> Option<f64> {
        None
    }
}

impl<F> TangentialField for F
where
    F: Fn(usize, &Point3) -> Point3 + Sync,
{
    fn value(&self, triangle: usize, x: &Point3) -> Point3 {
        self(triangle, x)
    }
}

/// A field together with its surface divergence.
pub struct WithDivergence<F, D> {
    pub field: F,
    pub divergence: D,
}

impl<F, D> TangentialField for WithDivergence<F, D>
where
    F: Fn(usize, &Point3) -> Point3 + Sync,
    D: Fn(usize, &Point3) -> f64 + Sync,
{
    fn value(&self, triangle: usize, x: &Point3) -> Point3 {
        (self.field)(triangle, x)
    }

    fn surface_divergence(&self, triangle: usize, x: &Point3) -> Option<f64> {
        Some((self.divergence)(triangle, x))
    }
}

/// The RWG expansion `sum_i c_i phi_i` as a field.
pub struct RwgExpansion<'a> {
    pub space: &'a RwgSpace,
    pub coefficients: &'a [f64],
}

impl TangentialField for RwgExpansion<'_> {
    fn value(&self, triangle: usize, x: &Point3) -> Point3 {
        self.space.expand(self.coefficients, triangle, x).0
    }

    fn surface_divergence(&self, triangle: usize, x: &Point3) -> Option<f64> {
        Some(self.space.expand(self.coefficients, triangle, x).1)
    }
}

/// Inner product used by [`project_tangential`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectionNorm {
    L2,
    /// Hermitian part of `conj(s0) V_h(s0)` for real `s0 > 0`.
    Energy {
        s0: f64,
        c: f64,
        quad: QuadratureConfig,
    },
}

/// Orthogonal projection of a tangential field onto the RWG space.
///
/// The normal component of the field is removed on each triangle before testing.
pub fn project_tangential(
    space: &RwgSpace,
    field: &dyn TangentialField,
    norm: ProjectionNorm,
    degree: usize,
) -> Result<Vec<f64>> {
    match norm {
        ProjectionNorm::L2 => {
            let (mass, _) = gram_matrices(space, degree);
            let b = tested_moments(space, field, degree);
            linalg::spd_solve(&mass, &b)
        }
        ProjectionNorm::Energy { s0, c, quad } => {
            if !(s0 > 0.0 && s0.is_finite()) {
                return Err(Error::Unsupported(format!(
                    "energy projection needs a real positive s0 (got {s0})"
                )));
            }
            let s = c64::new(s0, 0.0);
            let v = crate::efie::assemble_efie_matrix(space, s, c, &quad)?;
            let g = Mat::<f64>::from_fn(space.dim(), space.dim(), |i, j| s0 * v[(i, j)].re);
            let b: Vec<f64> = crate::efie::efie_field_moments(space, field, s, c, &quad)?
                .iter()
                .map(|m| s0 * m.re)
                .collect();
            linalg::spd_solve(&g, &b)
        }
    }
}

/// `b_i = int_Gamma pi_tau(f) . phi_i`.
pub fn tested_moments(space: &RwgSpace, field: &dyn TangentialField, degree: usize) -> Vec<f64> {
    let rule = TriangleRule::of_degree(degree.max(1));
    let mesh = space.mesh();
    let parts: Vec<[f64; 3]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let verts = mesh.corners(t);
            let nu = mesh.normal(t);
            let lb = space.local_basis(t);
            let mut acc = [0.0; 3];
            for (xi, w) in rule.iter() {
                let x = space.map_point(t, xi);
                let f = field.value(t, &x);
                let ft = f - f.dot(&nu) * nu;
                for k in 0..3 {
                    if let Some(l) = lb[k] {
                        acc[k] += w * l.scale * ft.dot(&(x - verts[k]));
                    }
                }
            }
            acc.map(|v| v * mesh.area(t))
        })
        .collect();
    let mut b = vec![0.0; space.dim()];
    for (t, acc) in parts.iter().enumerate() {
        for (k, l) in space.local_basis(t).iter().enumerate() {
            if let Some(l) = l {
                b[l.dof] += acc[k];
            }
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{icosphere, octahedron, unit_right_pair};

    #[test]
    fn dimensions() {
        assert_eq!(RwgSpace::new(octahedron()).dim(), 12);
        assert_eq!(RwgSpace::new(octahedron().refine().unwrap()).dim(), 48);
        assert_eq!(RwgSpace::new(unit_right_pair()).dim(), 1);
    }

    #[test]
    fn right_pair_divergence_and_free_vertex() {
        let s = RwgSpace::new(unit_right_pair());
        let d = s.dof(0);
        assert_eq!(d.length, 1.0);
        let p = s.mesh().vertices()[d.plus.free_vertex];
        let (v, div) = s.evaluate_basis(0, d.plus.triangle, &p).unwrap();
        assert_eq!(v.norm(), 0.0);
        assert!((div - 2.0).abs() < 1e-15);
        let q = s.mesh().vertices()[d.minus.free_vertex];
        let (v, div) = s.evaluate_basis(0, d.minus.triangle, &q).unwrap();
        assert_eq!(v.norm(), 0.0);
        assert!((div + 2.0).abs() < 1e-15);
    }

    #[test]
    fn normal_flux_is_continuous_at_edge_midpoint() {
        let s = RwgSpace::new(unit_right_pair());
        let mid = Point3::new(0.5, 0.0, 0.0);
        let n = Point3::new(0.0, 1.0, 0.0);
        let d = s.dof(0);
        let (a, _) = s.evaluate_basis(0, d.plus.triangle, &mid).unwrap();
        let (b, _) = s.evaluate_basis(0, d.minus.triangle, &mid).unwrap();
        assert!((a.dot(&n) - b.dot(&n)).abs() < 1e-15);
        assert!(a.dot(&n).abs() > 0.5);
    }

    #[test]
    fn outside_point_and_non_adjacent_triangle() {
        let s = RwgSpace::new(octahedron());
        let t = (0..8)
            .find(|&t| t != s.dof(0).plus.triangle && t != s.dof(0).minus.triangle)
            .unwrap();
        let c = s.mesh().centroid(t);
        assert_eq!(s.evaluate_basis(0, t, &c).unwrap(), (Point3::zeros(), 0.0));
        let far = c + 0.5 * s.mesh().normal(t);
        assert!(matches!(
            s.evaluate_basis(0, t, &far),
            Err(Error::PointOutsideTriangle { .. })
        ));
    }

    #[test]
    fn basis_is_tangential_and_mean_free_divergence() {
        let s = RwgSpace::new(icosphere(1).unwrap());
        for (i, d) in s.dofs().iter().enumerate() {
            let flux: f64 = [d.plus, d.minus]
                .iter()
                .map(|sup| s.local_basis(sup.triangle)[sup.local].unwrap().divergence * sup.area)
                .sum();
            assert!(flux.abs() < 1e-14);
            for sup in [d.plus, d.minus] {
                let x = s.map_point(sup.triangle, [0.2, 0.3]);
                let (v, _) = s.evaluate_basis(i, sup.triangle, &x).unwrap();
                assert!(v.dot(&s.mesh().normal(sup.triangle)).abs() < 1e-12);
            }
        }
    }

    /// Exact integral of `(x - p).(x - q)` over a triangle by the edge-midpoint rule,
    /// which is exact for quadratics.
    fn exact_quadratic(v: [Point3; 3], p: Point3, q: Point3, area: f64) -> f64 {
        let mids = [(v[0] + v[1]) / 2.0, (v[1] + v[2]) / 2.0, (v[2] + v[0]) / 2.0];
        mids.iter().map(|m| (m - p).dot(&(m - q))).sum::<f64>() * area / 3.0
    }

    #[test]
    fn pair_gram_matches_exact_integration() {
        let s = RwgSpace::new(unit_right_pair());
        let d = s.dof(0);
        let mut exact = 0.0;
        for (sup, sign) in [(d.plus, 1.0), (d.minus, -1.0)] {
            let v = s.mesh().corners(sup.triangle);
            let p = v[sup.local];
            let scale: f64 = sign * d.length / (2.0 * sup.area);
            exact += scale * scale * exact_quadratic(v, p, p, sup.area);
        }
        let (m, dd) = gram_matrices(&s, 6);
        assert!((m[(0, 0)] - exact).abs() < 1e-12, "{} vs {exact}", m[(0, 0)]);
        assert!((dd[(0, 0)] - 4.0).abs() < 1e-12);
    }

    /// Coefficients of a divergence-free loop around `vertex`, found by trying every
    /// sign pattern of `±1/L` on the incident edges.
    fn brute_force_loop(s: &RwgSpace, vertex: usize) -> Vec<f64> {
        let incident: Vec<usize> = (0..s.dim())
            .filter(|&i| s.mesh().topology().edges()[s.dof(i).edge].vertices.contains(&vertex))
            .collect();
        let tris: Vec<usize> = (0..s.mesh().num_triangles())
            .filter(|&t| s.mesh().triangles()[t].contains(&vertex))
            .collect();
        for mask in 0..(1u32 << incident.len()) {
            let mut c = vec![0.0; s.dim()];
            for (k, &i) in incident.iter().enumerate() {
                c[i] = if mask >> k & 1 == 1 { 1.0 } else { -1.0 } / s.dof(i).length;
            }
            let ok = tris.iter().all(|&t| {
                let x = s.mesh().centroid(t);
                s.expand(&c, t, &x).1.abs() < 1e-12
            });
            if ok {
                return c;
            }
        }
        panic!("no loop found");
    }

    #[test]
    fn divergence_matrix_annihilates_vertex_loops() {
        let s = RwgSpace::new(icosphere(1).unwrap());
        let (m, d) = gram_matrices(&s, 4);
        for vertex in [0, 7, 20] {
            let c = brute_force_loop(&s, vertex);
            let mut dc = vec![0.0; s.dim()];
            linalg::matvec(&d, &c, &mut dc);
            assert!(dc.iter().all(|v| v.abs() < 1e-10));
        }
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                assert!((m[(i, j)] - m[(j, i)]).abs() < 1e-14);
                assert!((d[(i, j)] - d[(j, i)]).abs() < 1e-14);
            }
        }
        let ev = linalg::symmetric_eigenvalues(&m).unwrap();
        assert!(ev[0] > 0.0);
        let ev = linalg::symmetric_eigenvalues(&d).unwrap();
        assert!(ev[0] > -1e-10);
    }

    #[test]
    fn l2_projection_reproduces_basis_functions() {
        let s = RwgSpace::new(octahedron());
        let k = 5;
        let mut e = vec![0.0; s.dim()];
        e[k] = 1.0;
        let field = RwgExpansion {
            space: &s,
            coefficients: &e,
        };
        let c = project_tangential(&s, &field, ProjectionNorm::L2, 4).unwrap();
        for (i, v) in c.iter().enumerate() {
            assert!((v - e[i]).abs() < 1e-12);
        }
        let zero = |_: usize, _: &Point3| Point3::zeros();
        assert!(project_tangential(&s, &zero, ProjectionNorm::L2, 4)
            .unwrap()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn l2_projection_reduces_constant_field_residual() {
        let s = RwgSpace::new(unit_right_pair());
        let f = |_: usize, _: &Point3| Point3::new(0.3, 1.0, 0.0);
        let c = project_tangential(&s, &f, ProjectionNorm::L2, 4).unwrap();
        let rule = TriangleRule::of_degree(10);
        let (mut res, mut norm) = (0.0, 0.0);
        for t in 0..2 {
            for (xi, w) in rule.iter() {
                let x = s.map_point(t, xi);
                let r = f(t, &x) - s.expand(&c, t, &x).0;
                res += w * s.mesh().area(t) * r.norm_squared();
                norm += w * s.mesh().area(t) * f(t, &x).norm_squared();
            }
        }
        assert!(res < norm, "{res} vs {norm}");
    }
}
