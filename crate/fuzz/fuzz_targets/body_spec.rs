#![no_main]

use h1geom::bodies::ConvexBody;
use h1geom::config::BodySpec;
use h1geom::geometry::HorizontalLine;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = text.parse::<BodySpec>() else {
        return;
    };
    // Accepted bodies must answer geometric queries without panicking.
    if let Ok(body) = spec.build() {
        let b = body.bounds();
        let line = HorizontalLine::new(0.5 * b.r_xy, 1.0, 0.5 * (b.z_min + b.z_max));
        let _ = body.chord(&line);
        let _ = body.volume_exact();
    }
});
