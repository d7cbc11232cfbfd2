#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(doc) = inar::SpecDocument::parse(text) else { return };
    // Accepted documents must survive validation and classification without panicking.
    if let Ok(c) = doc.coefficients() {
        let _ = inar::classify(&c);
    }
    if let Ok(spec) = doc.into_model() {
        let _ = inar::moments::mean_exact(&spec, 8);
    }
});
