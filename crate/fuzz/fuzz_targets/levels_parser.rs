#![no_main]

use libfuzzer_sys::fuzz_target;
use mbp_core::experiment::sweep::parse_levels;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(levels) = parse_levels(text) {
            assert!(levels.len() >= 2);
            assert!(levels.windows(2).all(|w| w[0] < w[1]));
        }
    }
});
