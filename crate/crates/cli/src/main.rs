use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbp_core::experiment::reference::{REFERENCE_NT, REFERENCE_NX, REFERENCE_R};
use mbp_core::experiment::sweep::parse_levels;
use mbp_core::experiment::{
    convergence_sweep, make_reference, run, selfcheck, Axis, ReferenceSolution, RunConfig,
    SelfCheckOptions,
};
use mbp_core::{Error, ErrorKind};

#[derive(Parser)]
#[command(
    name = "mbp",
    version,
    about = "Bound-preserving Allen-Cahn solver and convergence harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write steps.csv and final.csv into --out
    Run(Common),
    /// Compute a reference solution (gl3, cut-off) and write it to --out
    MakeReference(Common),
    /// Run a refinement sweep against a reference file
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "space")]
        axis: String,
        /// comma separated, strictly increasing
        #[arg(long)]
        levels: Option<String>,
    },
    /// Run the bundled property suites
    Selfcheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, hide = true)]
        perturb_tableau: bool,
    },
}

#[derive(Args)]
struct Common {
    /// flat key=value file, applied before the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    tableau: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    nt: Option<String>,
    #[arg(long = "T")]
    t_final: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    c0: Option<String>,
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long = "ref")]
    reference: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        [
            ("scheme", &self.scheme),
            ("tableau", &self.tableau),
            ("r", &self.r),
            ("nx", &self.nx),
            ("nt", &self.nt),
            ("T", &self.t_final),
            ("eps", &self.eps),
            ("alpha", &self.alpha),
            ("c0", &self.c0),
            ("init", &self.init),
            ("out", &self.out),
            ("ref", &self.reference),
            ("seed", &self.seed),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect()
    }

    fn resolve(&self, mut cfg: RunConfig) -> Result<RunConfig, Error> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            cfg.apply_text(&text)?;
        }
        for (key, value) in self.overrides() {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e.kind() {
                ErrorKind::Configuration => ExitCode::from(2),
                ErrorKind::Numerical | ErrorKind::Io => ExitCode::from(1),
            }
        }
    }
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run(common) => {
            let cfg = common.resolve(RunConfig::default())?;
            let art = run(&cfg)?;
            let s = &art.outcome.summary;
            println!(
                "steps={} max|u|={} max_rho={:.3e} clamped_steps={} final_energy={:.6e}",
                s.records, s.max_abs, s.max_rho, s.clamped_steps, s.final_energy
            );
            println!(
                "wrote {} and {}",
                art.steps_csv.display(),
                art.final_csv.display()
            );
        }
        Command::MakeReference(common) => {
            let base = RunConfig {
                r: REFERENCE_R,
                nx: REFERENCE_NX,
                nt: REFERENCE_NT,
                ..RunConfig::default()
            };
            let cfg = common.resolve(base)?;
            let out = cfg
                .out
                .clone()
                .ok_or_else(|| Error::Config("`out` (reference file path) is required".into()))?;
            let reference = make_reference(&cfg, cfg.r, cfg.nx, cfg.nt)?;
            reference.write(&out)?;
            println!("wrote {}", out.display());
        }
        Command::Sweep {
            common,
            axis,
            levels,
        } => {
            let axis: Axis = axis.parse()?;
            let cfg = common.resolve(RunConfig::default())?;
            let levels = match levels {
                Some(text) => parse_levels(&text)?,
                None => axis.default_levels().to_vec(),
            };
            let reference = load_reference(cfg.reference.as_deref())?;
            let result = convergence_sweep(axis, &cfg, &levels, &reference)?;
            let csv = result.to_csv();
            match &cfg.out {
                Some(path) => {
                    std::fs::write(path, &csv)?;
                    println!("wrote {}", path.display());
                }
                None => print!("{csv}"),
            }
        }
        Command::Selfcheck {
            seed,
            perturb_tableau,
        } => {
            let report = selfcheck(SelfCheckOptions {
                seed,
                perturb_tableau,
            });
            print!("{report}");
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_reference(path: Option<&Path>) -> Result<ReferenceSolution, Error> {
    let path = path.ok_or_else(|| {
        Error::Config(
            "a sweep needs --ref; generate one with `mbp make-reference --T <T> --out <file>`"
                .into(),
        )
    })?;
    if !path.exists() {
        return Err(Error::Config(format!(
            "reference {} does not exist; generate it with `mbp make-reference`",
            path.display()
        )));
    }
    ReferenceSolution::read(path)
}
