#![no_main]

use libfuzzer_sys::fuzz_target;
use tdefie::mesh::{parse_gmsh22, SurfaceMesh};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((vertices, triangles)) = parse_gmsh22(text) {
            let _ = SurfaceMesh::open_patch(vertices, triangles);
        }
    }
});
