#![no_main]

use libfuzzer_sys::fuzz_target;
use tdefie::efie::{matrix_to_csv, parse_matrix_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = parse_matrix_csv(text) {
            let again = parse_matrix_csv(&matrix_to_csv(&m)).unwrap();
            assert_eq!((again.nrows(), again.ncols()), (m.nrows(), m.ncols()));
        }
    }
});
