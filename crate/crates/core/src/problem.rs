//! Allen-Cahn problem data: reaction term, double-well potential, initial
//! data and the scalar auxiliary variable.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, NodalField};
use std::sync::Arc;

/// `f(u) = eps^{-2} (u - u^3)`.
pub fn nonlinearity(u: f64, eps: f64) -> f64 {
    (u - u * u * u) / (eps * eps)
}

/// `F(u) = (1 - u^2)^2 / (4 eps^2)`, so that `f = -F'`.
pub fn potential(u: f64, eps: f64) -> f64 {
    let s = 1.0 - u * u;
    s * s / (4.0 * eps * eps)
}

/// Reaction term `f` together with a potential `F` satisfying `f = -F'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reaction {
    /// Ginzburg-Landau double well with interface width `eps`.
    GinzburgLandau { eps: f64 },
    /// `f(u) = beta u`, used for linear verification problems.
    Linear { beta: f64 },
}

impl Reaction {
    pub fn f(&self, u: f64) -> f64 {
        match *self {
            Reaction::GinzburgLandau { eps } => nonlinearity(u, eps),
            Reaction::Linear { beta } => beta * u,
        }
    }

    pub fn potential(&self, u: f64) -> f64 {
        match *self {
            Reaction::GinzburgLandau { eps } => potential(u, eps),
            Reaction::Linear { beta } => -0.5 * beta * u * u,
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        u.iter().map(|&v| self.f(v)).collect()
    }
}

/// Initial data on `(0, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `1` on `[0, 1/2)`, `cos(2pi/3 (x + 1/2))` on `[1/2, 2]`. Jumps from 1
    /// to -1/2 at `x = 1/2`.
    Printed,
    /// `1` on `[0, 1/2)`, `cos(2pi/3 (x - 1/2))` on `[1/2, 2]`: continuously
    /// differentiable and flat at both ends.
    Smooth,
    /// `cos(k pi (x - a) / (b - a))`.
    Cosine {
        k: u32,
    },
    Constant(f64),
}

impl InitialCondition {
    pub fn name(&self) -> String {
        match self {
            InitialCondition::Printed => "printed".into(),
            InitialCondition::Smooth => "smooth".into(),
            InitialCondition::Cosine { k } => format!("cosine{k}"),
            InitialCondition::Constant(c) => format!("constant:{c}"),
        }
    }

    /// Value at `x`, on the domain `[a, b]`.
    pub fn eval_on(&self, x: f64, a: f64, b: f64) -> Result<f64> {
        if !(x >= a && x <= b) {
            return Err(Error::OutsideDomain(x));
        }
        Ok(match *self {
            InitialCondition::Printed => {
                if x < 0.5 {
                    1.0
                } else {
                    (2.0 * PI / 3.0 * (x + 0.5)).cos()
                }
            }
            InitialCondition::Smooth => {
                if x < 0.5 {
                    1.0
                } else {
                    (2.0 * PI / 3.0 * (x - 0.5)).cos()
                }
            }
            InitialCondition::Cosine { k } => (k as f64 * PI * (x - a) / (b - a)).cos(),
            InitialCondition::Constant(c) => c,
        })
    }

    /// One-sided derivatives at the two ends of `[a, b]`, by central
    /// differences taken just inside the interval.
    pub fn endpoint_slopes(&self, a: f64, b: f64) -> (f64, f64) {
        let d = 1e-6 * (b - a);
        let slope = |x0: f64, x1: f64| {
            let f0 = self.eval_on(x0, a, b).unwrap_or(f64::NAN);
            let f1 = self.eval_on(x1, a, b).unwrap_or(f64::NAN);
            (f1 - f0) / (x1 - x0)
        };
        (slope(a, a + d), slope(b - d, b))
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "printed" => return Ok(InitialCondition::Printed),
            "smooth" => return Ok(InitialCondition::Smooth),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("cosine") {
            if let Ok(k) = k.parse() {
                return Ok(InitialCondition::Cosine { k });
            }
        }
        if let Some(c) = s.strip_prefix("constant:") {
            if let Ok(c) = c.parse::<f64>() {
                if c.is_finite() {
                    return Ok(InitialCondition::Constant(c));
                }
            }
        }
        Err(Error::Config(format!(
            "unknown initial condition `{s}` (expected printed, smooth, cosine<k>, constant:<c>)"
        )))
    }
}

/// Auxiliary-variable quantities of a state.
#[derive(Debug, Clone)]
pub struct SavQuantities {
    /// `(F(u), 1)_h`
    pub e1: f64,
    /// `sqrt(E1 + C0)`
    pub z: f64,
    /// `f(u) / z` at every node
    pub w: NodalField,
}

pub fn sav_quantities(u: &NodalField, reaction: &Reaction, c0: f64) -> Result<SavQuantities> {
    let mesh = u.mesh();
    let e1: f64 = u
        .values()
        .iter()
        .zip(mesh.lumped_weights())
        .map(|(&v, w)| w * reaction.potential(v))
        .sum();
    let shifted = e1 + c0;
    if shifted <= 0.0 || !shifted.is_finite() {
        return Err(Error::Config(format!(
            "E1 + C0 = {shifted} must be positive; increase c0"
        )));
    }
    let z = shifted.sqrt();
    let w = u.map(|v| reaction.f(v) / z);
    Ok(SavQuantities { e1, z, w })
}

/// Problem parameters with the defaults used throughout the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllenCahnProblem {
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub alpha: f64,
    pub c0: f64,
    pub initial: InitialCondition,
}

impl Default for AllenCahnProblem {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 2.0,
            eps: 0.1,
            alpha: 1.0,
            c0: 1.0,
            initial: InitialCondition::Smooth,
        }
    }
}

impl AllenCahnProblem {
    pub fn reaction(&self) -> Reaction {
        Reaction::GinzburgLandau { eps: self.eps }
    }

    pub fn initial_value(&self, x: f64) -> Result<f64> {
        self.initial.eval_on(x, self.a, self.b)
    }

    pub fn initial_field(&self, mesh: &Arc<Mesh1D>) -> Result<NodalField> {
        let values = mesh
            .nodes()
            .iter()
            .map(|&x| self.initial_value(x))
            .collect::<Result<Vec<_>>>()?;
        NodalField::new(mesh.clone(), values)
    }

    pub fn mesh(&self, elements: usize, r: usize) -> Result<Arc<Mesh1D>> {
        Mesh1D::new(self.a, self.b, elements, r)
    }
}
