#![no_main]

use libfuzzer_sys::fuzz_target;
use tdefie::cq::parse_history_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(history) = parse_history_csv(text) {
            let again = parse_history_csv(&history.to_csv()).unwrap();
            assert_eq!(again.steps(), history.steps());
        }
    }
});
