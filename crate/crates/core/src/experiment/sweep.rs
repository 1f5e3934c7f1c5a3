//! Spatial and temporal refinement studies against a stored reference.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::diagnostics::{error_table, RateTable};
use crate::error::{Error, Result};

use super::config::RunConfig;
use super::reference::ReferenceSolution;
use super::run::{simulate, RunSummary};

pub const DEFAULT_SPACE_LEVELS: &[usize] = &[10, 20, 40, 80, 160];
pub const DEFAULT_TIME_LEVELS: &[usize] = &[10, 20, 40, 80, 160, 320];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// refine `nx` at fixed `nt`
    Space,
    /// refine `nt` at fixed `nx`
    Time,
}

impl Axis {
    pub fn label(&self) -> &'static str {
        match self {
            Axis::Space => "nx",
            Axis::Time => "nt",
        }
    }

    pub fn default_levels(&self) -> &'static [usize] {
        match self {
            Axis::Space => DEFAULT_SPACE_LEVELS,
            Axis::Time => DEFAULT_TIME_LEVELS,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Space => "space",
            Axis::Time => "time",
        })
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "space" => Ok(Axis::Space),
            "time" => Ok(Axis::Time),
            other => Err(Error::Config(format!(
                "unknown axis `{other}` (expected space or time)"
            ))),
        }
    }
}

/// Parses a comma-separated list of positive resolutions.
pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    let levels = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| {
                    Error::Config(format!("level `{}` is not a positive integer", s.trim()))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    if levels.len() < 2 {
        return Err(Error::Config("a sweep needs at least two levels".into()));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("levels must be strictly increasing".into()));
    }
    Ok(levels)
}

#[derive(Debug, Clone)]
pub struct SweepLevel {
    pub resolution: usize,
    pub error: f64,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: Axis,
    pub base: RunConfig,
    pub levels: Vec<SweepLevel>,
    pub table: RateTable,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# axis={}\n{}", self.axis, self.base.metadata());
        out.push_str(&self.table.to_csv(self.axis.label()));
        out
    }
}

/// Configuration of one sweep level.
pub fn level_config(axis: Axis, base: &RunConfig, level: usize) -> RunConfig {
    let mut cfg = base.clone();
    match axis {
        Axis::Space => cfg.nx = level,
        Axis::Time => cfg.nt = level,
    }
    cfg.out = None;
    cfg
}

/// Runs `base` at every level of `axis` and measures the `L^2` distance at
/// the final time to the reference's piecewise polynomial. Levels run in parallel; results are
/// ordered as given.
pub fn convergence_sweep(
    axis: Axis,
    base: &RunConfig,
    levels: &[usize],
    reference: &ReferenceSolution,
) -> Result<SweepResult> {
    base.validate()?;
    reference.check_matches(base)?;
    let meta = &reference.meta;
    for &level in levels {
        let finer = match axis {
            Axis::Space => 2 * level <= meta.nx && base.r <= meta.r && base.nt <= meta.nt,
            Axis::Time => 2 * level <= meta.nt && base.nx * base.r <= meta.nx * meta.r,
        };
        if !finer {
            return Err(Error::Config(format!(
                "reference (r={}, nx={}, nt={}) is not at least twice as fine as {} level {level}",
                meta.r, meta.nx, meta.nt, axis
            )));
        }
    }
    let runs = levels
        .par_iter()
        .map(|&level| {
            let cfg = level_config(axis, base, level);
            let outcome = simulate(&cfg, |_| {})?;
            let error = outcome.state.l2_distance(&reference.field)?;
            Ok(SweepLevel {
                resolution: level,
                error,
                summary: outcome.summary,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<(usize, f64)> = runs.iter().map(|l| (l.resolution, l.error)).collect();
    let table = error_table(&rows)?;
    Ok(SweepResult {
        axis,
        base: base.clone(),
        levels: runs,
        table,
    })
}
