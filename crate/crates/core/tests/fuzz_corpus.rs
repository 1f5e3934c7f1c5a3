//! Replays the checked-in fuzz corpus through the same checks the fuzz
//! targets make, so the seeds stay meaningful on stable toolchains.

use std::path::PathBuf;

use mbp_core::experiment::sweep::parse_levels;
use mbp_core::experiment::{ReferenceSolution, RunConfig};

fn corpus(target: &str) -> Vec<(PathBuf, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "empty corpus for {target}");
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect()
}

#[test]
fn config_seeds() {
    let mut accepted = 0;
    for (path, text) in corpus("config_parser") {
        let Ok(cfg) = text.parse::<RunConfig>() else {
            continue;
        };
        if cfg.validate().is_err() {
            continue;
        }
        accepted += 1;
        let echoed: String = cfg
            .metadata()
            .lines()
            .map(|l| format!("{}\n", l.trim_start_matches("# ")))
            .collect();
        let mut back: RunConfig = echoed.parse().unwrap();
        back.out = cfg.out.clone();
        back.reference = cfg.reference.clone();
        back.seed = cfg.seed;
        assert_eq!(back, cfg, "{}", path.display());
    }
    assert!(accepted >= 2);
}

#[test]
fn reference_seeds() {
    for (path, text) in corpus("reference_parser") {
        let reference =
            ReferenceSolution::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(reference.to_csv(), text, "{}", path.display());
        let cut: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(ReferenceSolution::parse(&cut).is_err());
    }
}

#[test]
fn levels_seeds() {
    for (path, text) in corpus("levels_parser") {
        if let Ok(levels) = parse_levels(&text) {
            assert!(levels.len() >= 2, "{}", path.display());
            assert!(levels.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
