#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // parse only; building a surface would allocate
        let _ = mgm::geom::SurfaceSpec::parse(text);
    }
});
