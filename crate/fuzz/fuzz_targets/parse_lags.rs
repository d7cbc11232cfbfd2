#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(lags) = text.parse::<inar::estimate::Lags>() {
        // Display must round-trip.
        let again: inar::estimate::Lags = lags.to_string().parse().unwrap();
        assert_eq!(lags, again);
    }
});
