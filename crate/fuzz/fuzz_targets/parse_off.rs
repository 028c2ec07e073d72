#![no_main]

use libfuzzer_sys::fuzz_target;
use tdefie::mesh::{parse_off, write_off, SurfaceMesh};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((vertices, triangles)) = parse_off(text) {
            if let Ok(mesh) = SurfaceMesh::new(vertices, triangles) {
                let again = parse_off(&write_off(&mesh)).unwrap();
                assert_eq!(again.1.len(), mesh.num_triangles());
            }
        }
    }
});
