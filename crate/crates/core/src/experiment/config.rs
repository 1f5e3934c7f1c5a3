//! Run configuration and its flat `key = value` text format.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem::{AllenCahnProblem, InitialCondition};
use crate::stepper::{SchemeConfig, SchemeKind};
use crate::tableau::ButcherTableau;

/// Keys accepted in config files; command-line flags use the same names.
pub const KEYS: &[&str] = &[
    "scheme", "tableau", "r", "nx", "nt", "T", "eps", "alpha", "c0", "init", "out", "ref", "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub tableau: ButcherTableau,
    pub r: usize,
    /// element count; `h = (b - a) / nx`
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub eps: f64,
    pub alpha: f64,
    pub c0: f64,
    pub initial: InitialCondition,
    pub out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = AllenCahnProblem::default();
        Self {
            scheme: SchemeKind::RkCutoff,
            tableau: ButcherTableau::by_name("gl1").expect("cataloged"),
            r: 1,
            nx: 400,
            nt: 1000,
            t_final: 0.01,
            eps: p.eps,
            alpha: p.alpha,
            c0: p.c0,
            initial: p.initial,
            out: None,
            reference: None,
            seed: 1,
        }
    }
}

/// Splits config text into `(line, key, value)` triples. `#` starts a
/// comment; blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {line_no}: expected `key = value`, got `{line}`"
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {line_no}: empty key")));
        }
        if value.is_empty() {
            return Err(Error::Config(format!(
                "line {line_no}: empty value for `{key}`"
            )));
        }
        if out
            .iter()
            .any(|(_, k, _): &(usize, String, String)| k == key)
        {
            return Err(Error::Config(format!(
                "line {line_no}: duplicate key `{key}`"
            )));
        }
        out.push((line_no, key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "scheme" => self.scheme = value.parse()?,
            "tableau" => self.tableau = value.parse()?,
            "r" => self.r = parse_num(key, value)?,
            "nx" => self.nx = parse_num(key, value)?,
            "nt" => self.nt = parse_num(key, value)?,
            "T" => self.t_final = parse_num(key, value)?,
            "eps" => self.eps = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "c0" => self.c0 = parse_num(key, value)?,
            "init" => self.initial = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "ref" => self.reference = Some(PathBuf::from(value)),
            "seed" => self.seed = parse_num(key, value)?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Applies a config file's contents on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (line, key, value) in parse_pairs(text)? {
            self.set(&key, &value)
                .map_err(|e| Error::Config(format!("line {line}: {}", strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "`{name}` must be positive and finite, got {v}"
                )))
            }
        };
        positive("T", self.t_final)?;
        positive("eps", self.eps)?;
        positive("alpha", self.alpha)?;
        positive("c0", self.c0)?;
        if self.r == 0 || self.nx == 0 || self.nt == 0 {
            return Err(Error::Config(
                "`r`, `nx` and `nt` must be at least 1".into(),
            ));
        }
        if self.scheme == SchemeKind::SavRkCutoff && self.r != 1 {
            return Err(Error::Config(format!(
                "the sav scheme requires r = 1, got r = {}",
                self.r
            )));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.nt as f64
    }

    pub fn problem(&self) -> AllenCahnProblem {
        AllenCahnProblem {
            eps: self.eps,
            alpha: self.alpha,
            c0: self.c0,
            initial: self.initial,
            ..AllenCahnProblem::default()
        }
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(
            self.scheme,
            self.tableau.clone(),
            self.r,
            self.tau(),
            self.problem().reaction(),
        );
        cfg.alpha = self.alpha;
        cfg.c0 = self.c0;
        cfg
    }

    /// `# key=value` metadata lines describing the run.
    pub fn metadata(&self) -> String {
        format!(
            "# scheme={}\n# tableau={}\n# r={}\n# nx={}\n# nt={}\n# T={}\n# eps={}\n# alpha={}\n# c0={}\n# init={}\n",
            self.scheme, self.tableau, self.r, self.nx, self.nt, self.t_final, self.eps, self.alpha, self.c0, self.initial
        )
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }
}
