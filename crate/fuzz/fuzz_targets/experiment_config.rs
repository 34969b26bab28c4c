#![no_main]

use h1geom::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::parse(text) {
            assert!(cfg.validate().is_ok());
            let _ = cfg.motion();
        }
    }
});
