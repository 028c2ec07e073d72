use super::{Point3, SurfaceMesh};
use crate::error::Result;

/// Regular octahedron with vertices on the unit sphere.
pub fn octahedron() -> SurfaceMesh {
    let v = vec![
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(-1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, -1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(0.0, 0.0, -1.0),
    ];
    let t = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    SurfaceMesh::new(v, t).expect("octahedron is a valid closed surface")
}

/// Regular icosahedron with vertices on the unit sphere.
pub fn icosahedron() -> SurfaceMesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let v = raw.iter().map(|p| Point3::new(p[0], p[1], p[2]).normalize()).collect();
    let t = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    SurfaceMesh::new(v, t).expect("icosahedron is a valid closed surface")
}

fn spherical(mut mesh: SurfaceMesh, level: usize) -> Result<SurfaceMesh> {
    for _ in 0..level {
        mesh = mesh.refine()?.project_to_sphere(Point3::zeros(), 1.0)?;
    }
    Ok(mesh)
}

/// Unit sphere from `level` refine-and-project passes on the icosahedron
/// (level 0: 30 edges, 1: 120, 2: 480, 3: 1920 with 642 vertices).
pub fn icosphere(level: usize) -> Result<SurfaceMesh> {
    spherical(icosahedron(), level)
}

/// Unit sphere from `level` refine-and-project passes on the octahedron.
pub fn octasphere(level: usize) -> Result<SurfaceMesh> {
    spherical(octahedron(), level)
}

/// Two coplanar unit right triangles sharing the unit edge from the origin to `(1,0,0)`,
/// with normal `+z`. The shared edge is the only interior edge.
pub fn unit_right_pair() -> SurfaceMesh {
    let v = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, -1.0, 0.0),
    ];
    let t = vec![[0, 1, 2], [0, 3, 1]];
    SurfaceMesh::open_patch(v, t).expect("valid patch")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_ladder_counts() {
        let expected = [(12, 30, 20), (42, 120, 80), (162, 480, 320)];
        for (level, &(v, e, f)) in expected.iter().enumerate() {
            let m = icosphere(level).unwrap();
            assert_eq!((m.num_vertices(), m.num_edges(), m.num_triangles()), (v, e, f));
            assert!(m.vertices().iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn pair_has_single_interior_edge() {
        let m = unit_right_pair();
        let interior: Vec<_> = m.topology().edges().iter().filter(|e| e.is_interior()).collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].vertices, [0, 1]);
        assert!((m.normal(0).z - 1.0).abs() < 1e-15);
        assert!((m.normal(1).z - 1.0).abs() < 1e-15);
    }
}
