//! Single simulations and their CSV artifacts.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::NodalField;
use crate::spectral::SpectralOperator;
use crate::stepper::{StepRecord, Stepper};

use super::config::RunConfig;

/// Aggregates over every record of a run, including the initial state and
/// the startup levels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunSummary {
    pub records: usize,
    pub max_abs: f64,
    pub max_rho: f64,
    /// steps at which the cut-off changed some node
    pub clamped_steps: usize,
    /// largest step-to-step increase of the free energy
    pub max_energy_increase: f64,
    /// largest step-to-step increase of the modified energy (sav runs)
    pub max_sav_energy_increase: Option<f64>,
    pub final_energy: f64,
}

impl RunSummary {
    fn absorb(&mut self, rec: &StepRecord, prev: Option<&StepRecord>) {
        self.records += 1;
        self.max_abs = self.max_abs.max(rec.max_abs);
        self.max_rho = self.max_rho.max(rec.rho);
        if rec.rho > 0.0 {
            self.clamped_steps += 1;
        }
        self.final_energy = rec.energy;
        if let Some(p) = prev {
            self.max_energy_increase = self.max_energy_increase.max(rec.energy - p.energy);
            if let (Some(a), Some(b)) = (p.sav_energy, rec.sav_energy) {
                let inc = self.max_sav_energy_increase.unwrap_or(0.0).max(b - a);
                self.max_sav_energy_increase = Some(inc);
            }
        } else if rec.sav_energy.is_some() {
            self.max_sav_energy_increase = Some(0.0);
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: NodalField,
    pub z: Option<f64>,
    pub summary: RunSummary,
}

/// Runs `cfg` to its final time, handing every record (initial state and
/// startup levels included) to `sink`.
pub fn simulate(cfg: &RunConfig, mut sink: impl FnMut(&StepRecord)) -> Result<RunOutcome> {
    cfg.validate()?;
    let problem = cfg.problem();
    let mesh = problem.mesh(cfg.nx, cfg.r)?;
    let op = SpectralOperator::for_mesh(&mesh)?;
    let u0 = problem.initial_field(&mesh)?;
    let mut stepper = Stepper::new(cfg.scheme_config(), op, u0)?;
    let mut summary = RunSummary::default();
    let mut prev: Option<StepRecord> = None;
    let mut feed = |rec: &StepRecord, summary: &mut RunSummary| {
        summary.absorb(rec, prev.as_ref());
        sink(rec);
        prev = Some(rec.clone());
    };
    for rec in stepper.startup_records().to_vec() {
        feed(&rec, &mut summary);
    }
    stepper.run_to(cfg.nt, |rec| feed(rec, &mut summary))?;
    Ok(RunOutcome {
        state: stepper.state().clone(),
        z: stepper.z(),
        summary,
    })
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub steps_csv: PathBuf,
    pub final_csv: PathBuf,
    pub outcome: RunOutcome,
}

/// Metadata preamble shared by run outputs.
pub fn preamble(cfg: &RunConfig) -> String {
    let p = cfg.problem();
    let (left, right) = p.initial.endpoint_slopes(p.a, p.b);
    format!(
        "# version=run-v1\n{}# u0_slope_left={left:.6e}\n# u0_slope_right={right:.6e}\n",
        cfg.metadata()
    )
}

/// Runs `cfg` and writes `steps.csv` and `final.csv` into the directory
/// `cfg.out` (created if needed).
pub fn run(cfg: &RunConfig) -> Result<RunArtifacts> {
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("`out` (output directory) is required for a run".into()))?;
    run_into(cfg, &dir)
}

pub fn run_into(cfg: &RunConfig, dir: &Path) -> Result<RunArtifacts> {
    std::fs::create_dir_all(dir)?;
    let head = preamble(cfg);
    let mut steps = format!("{head}{}\n", StepRecord::CSV_HEADER);
    let outcome = simulate(cfg, |rec| {
        steps.push_str(&rec.csv_row());
        steps.push('\n');
    })?;
    let mut fin = format!("{head}x,u\n");
    for (x, u) in outcome
        .state
        .mesh()
        .nodes()
        .iter()
        .zip(outcome.state.values())
    {
        fin.push_str(&format!("{x:.16e},{u:.16e}\n"));
    }
    let steps_csv = dir.join("steps.csv");
    let final_csv = dir.join("final.csv");
    std::fs::write(&steps_csv, steps)?;
    std::fs::write(&final_csv, fin)?;
    Ok(RunArtifacts {
        steps_csv,
        final_csv,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::SchemeKind;

    fn cfg(kind: SchemeKind) -> RunConfig {
        RunConfig {
            scheme: kind,
            nx: 40,
            nt: 20,
            t_final: 0.02,
            ..RunConfig::default()
        }
    }

    #[test]
    fn records_cover_every_level() {
        let mut seen = Vec::new();
        let out = simulate(&cfg(SchemeKind::RkCutoff), |r| seen.push(r.n)).unwrap();
        assert_eq!(seen, (0..=20).collect::<Vec<_>>());
        assert_eq!(out.summary.records, 21);
        assert!(out.summary.max_abs <= 1.0);
        assert!(out.z.is_none());
    }

    #[test]
    fn sav_run_tracks_modified_energy() {
        let out = simulate(&cfg(SchemeKind::SavRkCutoff), |_| {}).unwrap();
        assert!(out.z.is_some());
        assert!(out.summary.max_sav_energy_increase.unwrap() <= 1e-10);
    }

    #[test]
    fn writes_artifacts_deterministically() {
        let base = std::env::temp_dir().join(format!("mbp-run-{}", std::process::id()));
        let a = run_into(&cfg(SchemeKind::SavRkCutoff), &base.join("a")).unwrap();
        let b = run_into(&cfg(SchemeKind::SavRkCutoff), &base.join("b")).unwrap();
        let read = |p: &Path| std::fs::read_to_string(p).unwrap();
        assert_eq!(read(&a.steps_csv), read(&b.steps_csv));
        assert_eq!(read(&a.final_csv), read(&b.final_csv));
        let steps = read(&a.steps_csv);
        assert!(steps.contains("# scheme=sav"));
        assert_eq!(steps.lines().filter(|l| !l.starts_with('#')).count(), 22);
        std::fs::remove_dir_all(&base).ok();
    }

    #[test]
    fn run_requires_output() {
        assert!(matches!(
            run(&cfg(SchemeKind::RkCutoff)),
            Err(Error::Config(_))
        ));
    }
}
