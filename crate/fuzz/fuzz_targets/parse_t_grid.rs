#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = inar::data::parse_t_grid(text) {
        assert!(grid.iter().all(|t| t.is_finite() && *t >= 0.0));
        assert!(grid.windows(2).all(|w| w[0] <= w[1]));
    }
});
