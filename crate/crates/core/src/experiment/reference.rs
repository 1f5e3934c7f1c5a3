//! Reference solutions and their `ref-v1` CSV format.
//!
//! ```text
//! # version=ref-v1
//! # scheme=rk
//! # tableau=gl3
//! # r=3
//! # nx=400
//! # nt=1000
//! # T=0.01
//! # eps=0.1
//! # alpha=1
//! # init=smooth
//! # a=0
//! # b=2
//! x,u
//! 0.0000000000000000e0,1.0000000000000000e0
//! ...
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, NodalField};
use crate::problem::InitialCondition;
use crate::stepper::SchemeKind;
use crate::tableau::ButcherTableau;

use super::config::RunConfig;
use super::run::simulate;

pub const REFERENCE_VERSION: &str = "ref-v1";

/// Resolution used for references unless overridden.
pub const REFERENCE_R: usize = 3;
pub const REFERENCE_NX: usize = 400;
pub const REFERENCE_NT: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMeta {
    pub scheme: SchemeKind,
    pub tableau: ButcherTableau,
    pub r: usize,
    pub nx: usize,
    pub nt: usize,
    pub t_final: f64,
    pub eps: f64,
    pub alpha: f64,
    pub initial: InitialCondition,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub meta: ReferenceMeta,
    pub field: NodalField,
}

impl ReferenceSolution {
    pub fn to_csv(&self) -> String {
        let m = &self.meta;
        let mut out = format!(
            "# version={REFERENCE_VERSION}\n# scheme={}\n# tableau={}\n# r={}\n# nx={}\n# nt={}\n# T={}\n# eps={}\n# alpha={}\n# init={}\n# a={}\n# b={}\nx,u\n",
            m.scheme, m.tableau, m.r, m.nx, m.nt, m.t_final, m.eps, m.alpha, m.initial, m.a, m.b
        );
        for (x, u) in self.field.mesh().nodes().iter().zip(self.field.values()) {
            out.push_str(&format!("{x:.16e},{u:.16e}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Reference(msg);
        let mut meta: BTreeMap<&str, &str> = BTreeMap::new();
        let mut lines = text.lines().enumerate();
        let mut header_seen = false;
        for (idx, line) in lines.by_ref() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.trim().split_once('=').ok_or_else(|| {
                    bad(format!("line {}: metadata must be `# key=value`", idx + 1))
                })?;
                if meta.insert(k.trim(), v.trim()).is_some() {
                    return Err(bad(format!(
                        "line {}: duplicate metadata key `{}`",
                        idx + 1,
                        k.trim()
                    )));
                }
            } else if line.trim() == "x,u" {
                header_seen = true;
                break;
            } else {
                return Err(bad(format!(
                    "line {}: expected metadata or the `x,u` header",
                    idx + 1
                )));
            }
        }
        if !header_seen {
            return Err(bad("missing `x,u` header".into()));
        }
        let get = |k: &str| {
            meta.get(k)
                .copied()
                .ok_or_else(|| bad(format!("missing metadata `{k}`")))
        };
        let num = |k: &str| -> Result<f64> {
            let v = get(k)?;
            v.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("metadata `{k}`: `{v}` is not a finite number")))
        };
        let count = |k: &str| -> Result<usize> {
            let v = get(k)?;
            v.parse::<usize>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| bad(format!("metadata `{k}`: `{v}` is not a positive integer")))
        };
        let version = get("version")?;
        if version != REFERENCE_VERSION {
            return Err(bad(format!(
                "unsupported version `{version}` (expected {REFERENCE_VERSION})"
            )));
        }
        let wrap = |e: Error| bad(e.to_string());
        let meta = ReferenceMeta {
            scheme: get("scheme")?.parse().map_err(wrap)?,
            tableau: get("tableau")?.parse().map_err(wrap)?,
            r: count("r")?,
            nx: count("nx")?,
            nt: count("nt")?,
            t_final: num("T")?,
            eps: num("eps")?,
            alpha: num("alpha")?,
            initial: get("init")?.parse().map_err(wrap)?,
            a: num("a")?,
            b: num("b")?,
        };
        // bound the allocation before building the mesh
        let expected = meta
            .nx
            .checked_mul(meta.r)
            .and_then(|n| n.checked_add(1))
            .filter(|&n| n <= 1 << 22)
            .ok_or_else(|| bad(format!("nx = {} with r = {} is too large", meta.nx, meta.r)))?;
        let rows: Vec<(usize, &str)> = lines
            .map(|(idx, line)| (idx + 1, line.trim()))
            .filter(|(_, line)| !line.is_empty())
            .collect();
        if rows.len() != expected {
            return Err(bad(format!(
                "expected {expected} data rows, found {}",
                rows.len()
            )));
        }
        let mesh = Mesh1D::new(meta.a, meta.b, meta.nx, meta.r).map_err(wrap)?;
        let mut values = Vec::with_capacity(expected);
        for ((line_no, line), &node) in rows.into_iter().zip(mesh.nodes()) {
            let (x, u) = line
                .split_once(',')
                .ok_or_else(|| bad(format!("line {line_no}: expected `x,u`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        bad(format!(
                            "line {line_no}: `{}` is not a finite number",
                            s.trim()
                        ))
                    })
            };
            let (x, u) = (parse(x)?, parse(u)?);
            if (x - node).abs() > 1e-12 * (meta.b - meta.a) {
                return Err(bad(format!(
                    "line {line_no}: node {x} does not match mesh node {node}"
                )));
            }
            values.push(u);
        }
        let field = NodalField::new(mesh, values).map_err(wrap)?;
        Ok(Self { meta, field })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Errors unless this reference was computed for the same final time,
    /// interface width and initial data as `cfg`.
    pub fn check_matches(&self, cfg: &RunConfig) -> Result<()> {
        let m = &self.meta;
        if m.t_final != cfg.t_final
            || m.eps != cfg.eps
            || m.initial != cfg.initial
            || m.alpha != cfg.alpha
        {
            return Err(Error::Config(format!(
                "reference is for T={}, eps={}, alpha={}, init={} but the run has T={}, eps={}, alpha={}, init={}",
                m.t_final, m.eps, m.alpha, m.initial, cfg.t_final, cfg.eps, cfg.alpha, cfg.initial
            )));
        }
        Ok(())
    }

    /// The reference's piecewise polynomial sampled at the nodes of `mesh`.
    pub fn on_mesh(&self, mesh: &Arc<Mesh1D>) -> Result<NodalField> {
        self.field.transfer_to(mesh.clone())
    }
}

/// Reference run settings for a given final time and problem.
pub fn reference_config(base: &RunConfig, r: usize, nx: usize, nt: usize) -> RunConfig {
    RunConfig {
        scheme: SchemeKind::RkCutoff,
        tableau: ButcherTableau::by_name("gl3").expect("cataloged"),
        r,
        nx,
        nt,
        out: None,
        reference: None,
        ..base.clone()
    }
}

/// Computes a reference with cut-off RK, three-stage Gauss-Legendre.
pub fn make_reference(
    base: &RunConfig,
    r: usize,
    nx: usize,
    nt: usize,
) -> Result<ReferenceSolution> {
    let cfg = reference_config(base, r, nx, nt);
    cfg.validate()?;
    let outcome = simulate(&cfg, |_| {})?;
    let p = cfg.problem();
    Ok(ReferenceSolution {
        meta: ReferenceMeta {
            scheme: cfg.scheme,
            tableau: cfg.tableau.clone(),
            r,
            nx,
            nt,
            t_final: cfg.t_final,
            eps: cfg.eps,
            alpha: cfg.alpha,
            initial: cfg.initial,
            a: p.a,
            b: p.b,
        },
        field: outcome.state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ReferenceSolution {
        let base = RunConfig {
            t_final: 0.001,
            ..RunConfig::default()
        };
        make_reference(&base, 2, 8, 10).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let r = small();
        let text = r.to_csv();
        let back = ReferenceSolution::parse(&text).unwrap();
        assert_eq!(back.meta, r.meta);
        assert_eq!(back.field.values(), r.field.values());
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn deterministic() {
        assert_eq!(small().to_csv(), small().to_csv());
    }

    #[test]
    fn nested_nodes_agree() {
        let r = small();
        let coarse = Mesh1D::new(0.0, 2.0, 4, 2).unwrap();
        let f = r.on_mesh(&coarse).unwrap();
        for (x, v) in coarse.nodes().iter().zip(f.values()) {
            let j = r
                .field
                .mesh()
                .nodes()
                .iter()
                .position(|y| (y - x).abs() < 1e-14)
                .unwrap();
            assert!((v - r.field.values()[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_malformed() {
        let good = small().to_csv();
        let cases = [
            good.replace("ref-v1", "ref-v2"),
            good.replace("# nx=8\n", ""),
            good.replace("x,u\n", ""),
            good.replace("# T=0.001", "# T=abc"),
            good.lines().take(20).collect::<Vec<_>>().join("\n"),
            format!("{good}1,2\n"),
            good.replacen("\n0.0000000000000000e0,", "\n0.0000000000000000e0;", 1),
            good.replace("# r=2", "# r=0"),
            good.replace("# tableau=gl3", "# tableau=euler"),
            "garbage".to_string(),
            String::new(),
        ];
        for c in cases {
            assert!(
                matches!(ReferenceSolution::parse(&c), Err(Error::Reference(_))),
                "{c}"
            );
        }
    }

    #[test]
    fn metadata_must_match() {
        let r = small();
        let cfg = RunConfig {
            t_final: 0.001,
            ..RunConfig::default()
        };
        r.check_matches(&cfg).unwrap();
        let other = RunConfig {
            t_final: 0.002,
            ..cfg
        };
        assert!(r.check_matches(&other).is_err());
    }
}
