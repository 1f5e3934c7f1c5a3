//! Experiment harness: configuration, reference solutions, single runs,
//! refinement sweeps and the bundled self-check.

pub mod config;
pub mod reference;
pub mod run;
pub mod selfcheck;
pub mod sweep;

pub use config::RunConfig;
pub use reference::{make_reference, ReferenceSolution, REFERENCE_VERSION};
pub use run::{run, simulate, RunOutcome, RunSummary};
pub use selfcheck::{selfcheck, SelfCheckOptions, SelfCheckReport};
pub use sweep::{convergence_sweep, Axis, SweepResult};
