#![no_main]

use h1geom::config::parse_ell_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(ells) = parse_ell_list(text) {
            assert!(!ells.is_empty());
            assert!(ells.iter().all(|l| l.is_finite() && *l >= 0.0));
        }
    }
});
