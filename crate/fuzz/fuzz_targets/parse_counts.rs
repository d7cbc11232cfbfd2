#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(series) = inar::data::parse_counts(text, "fuzz") {
        assert!(!series.values.is_empty());
    }
});
