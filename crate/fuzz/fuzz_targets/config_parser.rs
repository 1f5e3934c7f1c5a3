#![no_main]

use libfuzzer_sys::fuzz_target;
use mbp_core::experiment::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = text.parse::<RunConfig>() else {
        return;
    };
    if cfg.validate().is_err() {
        return;
    }
    // metadata lines are themselves valid config once the comment marker is dropped
    let echoed: String = cfg
        .metadata()
        .lines()
        .map(|l| format!("{}\n", l.trim_start_matches("# ")))
        .collect();
    let mut back: RunConfig = echoed.parse().expect("metadata must re-parse");
    back.out = cfg.out.clone();
    back.reference = cfg.reference.clone();
    back.seed = cfg.seed;
    assert_eq!(back, cfg);
});
