#![no_main]

use h1geom::config::parse_motion;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = parse_motion(text) {
            assert!(m.is_finite());
            let _ = m.compose(&m.inverse());
        }
    }
});
