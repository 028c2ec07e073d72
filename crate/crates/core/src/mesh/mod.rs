//! Triangulated boundary surfaces and their edge topology.
//!
//! A [`SurfaceMesh`] is immutable once built. Construction validates the
//! triangulation, repairs inconsistent triangle orientation and orients every
//! closed component so that normals point into the exterior domain.

mod generate;
mod geometry;
mod io;
mod orient;

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use generate::{icosahedron, icosphere, octahedron, octasphere, unit_right_pair};
pub use geometry::{barycentric, closest_point_on_triangle, solid_angle};
pub use io::{load_mesh, parse_gmsh22, parse_off, write_off, MeshFormat};

pub type Point3 = Vector3<f64>;

/// Relative area below which a triangle counts as degenerate
/// (scaled by the squared bounding-box diagonal).
pub const DEGENERATE_AREA_RATIO: f64 = 1e-12;

/// One edge of the triangulation.
///
/// `vertices[0] < vertices[1]` always. `plus` is the triangle whose oriented
/// boundary runs `vertices[0] -> vertices[1]`; `minus` is the neighbour that
/// runs the other way (absent on the boundary of an open patch).
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub plus: usize,
    pub minus: Option<usize>,
    pub length: f64,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.minus.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct EdgeTopology {
    edges: Vec<Edge>,
    /// `triangle_edges[t][k]` is the edge opposite local vertex `k` of triangle `t`.
    triangle_edges: Vec<[usize; 3]>,
    lookup: HashMap<(usize, usize), usize>,
}

impl EdgeTopology {
    fn build(vertices: &[Point3], triangles: &[[usize; 3]]) -> Result<Self> {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        // (forward triangle, backward triangle) per edge, forward meaning a -> b with a < b.
        let mut sides: Vec<[Option<usize>; 2]> = Vec::new();
        let mut keys: Vec<(usize, usize)> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let idx = *lookup.entry(key).or_insert_with(|| {
                    sides.push([None, None]);
                    keys.push(key);
                    sides.len() - 1
                });
                let slot = if a < b { 0 } else { 1 };
                if let Some(other) = sides[idx][slot] {
                    let other_side = sides[idx][1 - slot];
                    return Err(if other_side.is_some() {
                        Error::Topology(format!(
                            "non-manifold edge ({}, {}) shared by more than two triangles",
                            key.0, key.1
                        ))
                    } else {
                        Error::Orientation(format!(
                            "triangles {other} and {t} traverse edge ({}, {}) in the same direction",
                            key.0, key.1
                        ))
                    });
                }
                sides[idx][slot] = Some(t);
                local[k] = idx;
            }
            triangle_edges.push(local);
        }
        let edges = keys
            .iter()
            .zip(&sides)
            .map(|(&(a, b), side)| {
                let (plus, minus) = match *side {
                    [Some(p), m] => (p, m),
                    // boundary edge of an open patch traversed backwards only
                    [None, Some(m)] => (m, None),
                    [None, None] => unreachable!("edge without triangles"),
                };
                Edge {
                    vertices: [a, b],
                    plus,
                    minus,
                    length: (vertices[b] - vertices[a]).norm(),
                }
            })
            .collect();
        Ok(Self {
            edges,
            triangle_edges,
            lookup,
        })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn triangle_edges(&self, triangle: usize) -> [usize; 3] {
        self.triangle_edges[triangle]
    }

    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(a.min(b), a.max(b))).copied()
    }
}

/// Oriented triangulated surface.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    vertices: Vec<Point3>,
    triangles: Vec<[usize; 3]>,
    normals: Vec<Point3>,
    areas: Vec<f64>,
    topology: EdgeTopology,
    closed: bool,
}

impl SurfaceMesh {
    /// Builds a closed surface, repairing orientation and pointing normals outward.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, true)
    }

    /// Builds an open patch. Boundary edges are allowed; orientation is made
    /// consistent with the first triangle of each connected component.
    pub fn open_patch(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, false)
    }

    fn build(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>, closed: bool) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Topology("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::Index(format!(
                        "triangle {t} references vertex {v} but only {} vertices exist",
                        vertices.len()
                    )));
                }
            }
        }
        if let Some(bad) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite(format!("vertex {bad} has non-finite coordinates")));
        }
        let (vertices, triangles) = compact_vertices(vertices, triangles);

        let diag = bounding_box_diagonal(&vertices);
        let min_area = DEGENERATE_AREA_RATIO * diag * diag;
        for (t, tri) in triangles.iter().enumerate() {
            let area = triangle_area(&vertices, tri);
            if !(area > min_area) {
                return Err(Error::Degenerate(format!(
                    "triangle {t} has area {area:.3e} (threshold {min_area:.3e})"
                )));
            }
        }

        let triangles = orient::repair(&vertices, triangles, closed)?;
        let topology = EdgeTopology::build(&vertices, &triangles)?;
        if closed {
            if let Some(edge) = topology.edges.iter().find(|e| e.minus.is_none()) {
                return Err(Error::Topology(format!(
                    "open surface: edge ({}, {}) belongs to a single triangle",
                    edge.vertices[0], edge.vertices[1]
                )));
            }
        }
        let normals = triangles
            .iter()
            .map(|tri| {
                let n = (vertices[tri[1]] - vertices[tri[0]]).cross(&(vertices[tri[2]] - vertices[tri[0]]));
                n / n.norm()
            })
            .collect();
        let areas = triangles.iter().map(|tri| triangle_area(&vertices, tri)).collect();
        Ok(Self {
            vertices,
            triangles,
            normals,
            areas,
            topology,
            closed,
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.topology.len()
    }

    pub fn topology(&self) -> &EdgeTopology {
        &self.topology
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn normal(&self, triangle: usize) -> Point3 {
        self.normals[triangle]
    }

    pub fn area(&self, triangle: usize) -> f64 {
        self.areas[triangle]
    }

    pub fn corners(&self, triangle: usize) -> [Point3; 3] {
        let t = self.triangles[triangle];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn centroid(&self, triangle: usize) -> Point3 {
        let [a, b, c] = self.corners(triangle);
        (a + b + c) / 3.0
    }

    /// Longest edge of a triangle.
    pub fn diameter(&self, triangle: usize) -> f64 {
        let [a, b, c] = self.corners(triangle);
        (b - a).norm().max((c - b).norm()).max((a - c).norm())
    }

    /// Mesh size `h`: the longest edge in the mesh.
    pub fn mesh_size(&self) -> f64 {
        self.topology.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.topology.edges();
        edges.iter().map(|e| e.length).sum::<f64>() / edges.len() as f64
    }

    pub fn bounding_box_diagonal(&self) -> f64 {
        bounding_box_diagonal(&self.vertices)
    }

    /// Largest distance between two vertices.
    pub fn diameter_of_surface(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max((a - b).norm());
            }
        }
        best
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_triangles() as i64
    }

    /// Checks the Euler relation `V - E + F = 2 - 2g` for a declared genus.
    pub fn check_genus(&self, genus: u32) -> Result<()> {
        let expected = 2 - 2 * genus as i64;
        let chi = self.euler_characteristic();
        if chi != expected {
            return Err(Error::Topology(format!(
                "Euler characteristic {chi} does not match genus {genus} (expected {expected})"
            )));
        }
        Ok(())
    }

    /// Signed enclosed volume (positive for outward normals).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| self.vertices[t[0]].dot(&self.vertices[t[1]].cross(&self.vertices[t[2]])) / 6.0)
            .sum()
    }

    /// Distance from `p` to the surface and the index of the closest triangle.
    pub fn distance_to(&self, p: &Point3) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for t in 0..self.num_triangles() {
            let [a, b, c] = self.corners(t);
            let q = closest_point_on_triangle(p, &a, &b, &c);
            let d = (p - q).norm();
            if d < best.0 {
                best = (d, t);
            }
        }
        best
    }

    /// Generalized winding number: ~1 inside a closed outward-oriented surface, ~0 outside.
    pub fn winding_number(&self, p: &Point3) -> f64 {
        let total: f64 = (0..self.num_triangles())
            .map(|t| {
                let [a, b, c] = self.corners(t);
                solid_angle(p, &a, &b, &c)
            })
            .sum();
        total / (4.0 * std::f64::consts::PI)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        self.winding_number(p) > 0.5
    }

    /// Uniform 1-to-4 refinement through edge midpoints.
    pub fn refine(&self) -> Result<Self> {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        for e in self.topology.edges() {
            vertices.push((self.vertices[e.vertices[0]] + self.vertices[e.vertices[1]]) * 0.5);
        }
        let mid = |a: usize, b: usize| nv + self.topology.find(a, b).expect("edge of own triangle");
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let (ab, bc, ca) = (mid(a, b), mid(b, c), mid(c, a));
            triangles.push([a, ab, ca]);
            triangles.push([b, bc, ab]);
            triangles.push([c, ca, bc]);
            triangles.push([ab, bc, ca]);
        }
        Self::build(vertices, triangles, self.closed)
    }

    /// Radially projects every vertex onto the sphere of given centre and radius.
    pub fn project_to_sphere(&self, center: Point3, radius: f64) -> Result<Self> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let d = v - center;
                center + d * (radius / d.norm())
            })
            .collect();
        Self::build(vertices, self.triangles.clone(), self.closed)
    }
}

fn triangle_area(vertices: &[Point3], tri: &[usize; 3]) -> f64 {
    0.5 * (vertices[tri[1]] - vertices[tri[0]])
        .cross(&(vertices[tri[2]] - vertices[tri[0]]))
        .norm()
}

fn bounding_box_diagonal(vertices: &[Point3]) -> f64 {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

fn compact_vertices(vertices: Vec<Point3>, triangles: Vec<[usize; 3]>) -> (Vec<Point3>, Vec<[usize; 3]>) {
    let mut used = vec![false; vertices.len()];
    for tri in &triangles {
        for &v in tri {
            used[v] = true;
        }
    }
    let unused = used.iter().filter(|u| !**u).count();
    if unused == 0 {
        return (vertices, triangles);
    }
    log::warn!("dropping {unused} vertices not referenced by any triangle");
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::with_capacity(vertices.len() - unused);
    for (i, v) in vertices.into_iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(v);
        }
    }
    let triangles = triangles
        .into_iter()
        .map(|t| [remap[t[0]], remap[t[1]], remap[t[2]]])
        .collect();
    (kept, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octahedron_counts() {
        let m = octahedron();
        assert_eq!(m.num_vertices(), 6);
        assert_eq!(m.num_edges(), 12);
        assert_eq!(m.num_triangles(), 8);
        assert_eq!(m.euler_characteristic(), 2);
        m.check_genus(0).unwrap();
        assert!(m.check_genus(1).is_err());
    }

    #[test]
    fn icosahedron_edges_shared_twice() {
        let m = icosahedron();
        assert_eq!(m.num_edges(), 30);
        assert!(m.topology().edges().iter().all(|e| e.is_interior()));
        let mut count = vec![0; m.num_edges()];
        for t in 0..m.num_triangles() {
            for e in m.topology().triangle_edges(t) {
                count[e] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }

    #[test]
    fn normals_point_outward() {
        let m = icosphere(1).unwrap();
        assert!(m.signed_volume() > 0.0);
        for t in 0..m.num_triangles() {
            assert!(m.normal(t).dot(&m.centroid(t)) > 0.0);
        }
    }

    #[test]
    fn repairs_flipped_triangles_and_inside_out_meshes() {
        let base = octahedron();
        let mut tris = base.triangles().to_vec();
        tris[3].swap(1, 2);
        tris[6].swap(0, 2);
        let m = SurfaceMesh::new(base.vertices().to_vec(), tris).unwrap();
        assert!(m.signed_volume() > 0.0);

        let inverted: Vec<_> = base.triangles().iter().map(|t| [t[0], t[2], t[1]]).collect();
        let m = SurfaceMesh::new(base.vertices().to_vec(), inverted).unwrap();
        assert!(m.signed_volume() > 0.0);
        for t in 0..m.num_triangles() {
            assert!(m.normal(t).dot(&m.centroid(t)) > 0.0);
        }
    }

    #[test]
    fn open_surface_is_rejected() {
        let base = octahedron();
        let tris = base.triangles()[1..].to_vec();
        match SurfaceMesh::new(base.vertices().to_vec(), tris) {
            Err(Error::Topology(msg)) => assert!(msg.contains("open surface")),
            other => panic!("expected topology error, got {other:?}"),
        }
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let base = octahedron();
        let mut verts = base.vertices().to_vec();
        verts.push(Point3::new(3.0, 3.0, 3.0));
        let mut tris = base.triangles().to_vec();
        let [a, b, _] = tris[0];
        tris.push([a, b, 6]);
        assert!(matches!(SurfaceMesh::new(verts, tris), Err(Error::Topology(_))));
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let verts = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let tris = vec![[0, 1, 2], [0, 1, 3]];
        assert!(matches!(
            SurfaceMesh::open_patch(verts, tris),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn refinement_counts() {
        let m = octahedron();
        let r = m.refine().unwrap();
        assert_eq!(r.num_edges(), 2 * m.num_edges() + 3 * m.num_triangles());
        assert_eq!(r.num_edges(), 48);
        assert_eq!(r.euler_characteristic(), 2);
    }

    #[test]
    fn winding_and_distance() {
        let m = icosphere(1).unwrap();
        assert!(m.contains(&Point3::zeros()));
        assert!(!m.contains(&Point3::new(2.0, 0.0, 0.0)));
        let (d, _) = m.distance_to(&Point3::new(3.0, 0.0, 0.0));
        assert!((d - 2.0).abs() < 0.1);
    }
}
