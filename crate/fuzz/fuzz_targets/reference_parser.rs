#![no_main]

use libfuzzer_sys::fuzz_target;
use mbp_core::experiment::ReferenceSolution;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(reference) = ReferenceSolution::parse(text) {
        let again =
            ReferenceSolution::parse(&reference.to_csv()).expect("written reference must re-parse");
        assert_eq!(again.field.values(), reference.field.values());
    }
});
