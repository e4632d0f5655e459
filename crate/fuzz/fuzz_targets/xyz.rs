#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // the parser must never panic on malformed input
        let _ = mgm::io::parse_xyz(text);
    }
});
