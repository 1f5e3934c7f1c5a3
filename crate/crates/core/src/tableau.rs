//! Implicit Runge-Kutta tableaux of collocation type, their order and
//! algebraic-stability checks, and the equivalent rational single-step form
//! `sigma(lambda)`, `p_i(lambda)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableauFamily {
    GaussLegendre,
    RadauIIA,
}

/// Butcher tableau `(A, b, c)` with declared classical order `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub family: TableauFamily,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Extrapolation depth `k = min(p, m + 1)`.
    pub fn extrapolation_order(&self) -> usize {
        self.order.min(self.stages() + 1)
    }

    pub fn name(&self) -> String {
        match self.family {
            TableauFamily::GaussLegendre => format!("gl{}", self.stages()),
            TableauFamily::RadauIIA => format!("radau{}", self.stages()),
        }
    }

    /// Looks up a catalogued tableau by its short name.
    pub fn by_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let unknown = || Error::UnsupportedTableau {
            name: name.to_string(),
            reason: "expected one of gl1, gl2, gl3, radau2, radau3".into(),
        };
        if let Some(m) = lower.strip_prefix("gl") {
            gauss_legendre(m.parse().map_err(|_| unknown())?)
        } else if let Some(m) = lower.strip_prefix("radau") {
            radau_iia(m.parse().map_err(|_| unknown())?)
        } else {
            Err(unknown())
        }
    }

    pub fn a_matrix(&self) -> DMatrix<f64> {
        let m = self.stages();
        DMatrix::from_fn(m, m, |i, j| self.a[i][j])
    }

    /// `m_ij = b_i a_ij + b_j a_ji - b_i b_j`.
    pub fn algebraic_stability_matrix(&self) -> DMatrix<f64> {
        let m = self.stages();
        DMatrix::from_fn(m, m, |i, j| {
            self.b[i] * self.a[i][j] + self.b[j] * self.a[j][i] - self.b[i] * self.b[j]
        })
    }
}

impl FromStr for ButcherTableau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ButcherTableau::by_name(s)
    }
}

impl fmt::Display for ButcherTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Gauss-Legendre collocation, `m = 1, 2, 3`, order `2m`.
pub fn gauss_legendre(m: usize) -> Result<ButcherTableau> {
    let (a, b, c) = match m {
        1 => (vec![vec![0.5]], vec![1.0], vec![0.5]),
        2 => {
            let s3 = 3f64.sqrt();
            (
                vec![vec![0.25, 0.25 - s3 / 6.0], vec![0.25 + s3 / 6.0, 0.25]],
                vec![0.5, 0.5],
                vec![0.5 - s3 / 6.0, 0.5 + s3 / 6.0],
            )
        }
        3 => {
            let s15 = 15f64.sqrt();
            (
                vec![
                    vec![5.0 / 36.0, 2.0 / 9.0 - s15 / 15.0, 5.0 / 36.0 - s15 / 30.0],
                    vec![5.0 / 36.0 + s15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s15 / 24.0],
                    vec![5.0 / 36.0 + s15 / 30.0, 2.0 / 9.0 + s15 / 15.0, 5.0 / 36.0],
                ],
                vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
                vec![0.5 - s15 / 10.0, 0.5, 0.5 + s15 / 10.0],
            )
        }
        _ => {
            return Err(Error::UnsupportedTableau {
                name: format!("gl{m}"),
                reason: "Gauss-Legendre is catalogued for m = 1, 2, 3".into(),
            })
        }
    };
    Ok(ButcherTableau {
        family: TableauFamily::GaussLegendre,
        a,
        b,
        c,
        order: 2 * m,
    })
}

/// Radau IIA collocation, `m = 2, 3`, order `2m - 1`, stiffly accurate.
pub fn radau_iia(m: usize) -> Result<ButcherTableau> {
    let (a, c) = match m {
        2 => (
            vec![vec![5.0 / 12.0, -1.0 / 12.0], vec![0.75, 0.25]],
            vec![1.0 / 3.0, 1.0],
        ),
        3 => {
            let s6 = 6f64.sqrt();
            (
                vec![
                    vec![
                        (88.0 - 7.0 * s6) / 360.0,
                        (296.0 - 169.0 * s6) / 1800.0,
                        (-2.0 + 3.0 * s6) / 225.0,
                    ],
                    vec![
                        (296.0 + 169.0 * s6) / 1800.0,
                        (88.0 + 7.0 * s6) / 360.0,
                        (-2.0 - 3.0 * s6) / 225.0,
                    ],
                    vec![(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0],
                ],
                vec![(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0],
            )
        }
        _ => {
            return Err(Error::UnsupportedTableau {
                name: format!("radau{m}"),
                reason: "Radau IIA is catalogued for m = 2, 3".into(),
            })
        }
    };
    let b = a[m - 1].clone();
    Ok(ButcherTableau {
        family: TableauFamily::RadauIIA,
        a,
        b,
        c,
        order: 2 * m - 1,
    })
}

/// Every catalogued tableau.
pub fn catalog() -> Vec<ButcherTableau> {
    ["gl1", "gl2", "gl3", "radau2", "radau3"]
        .iter()
        .map(|n| ButcherTableau::by_name(n).expect("catalogued"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    /// `|sum_i b_i c_i^{l-1} - 1/l|`, `l = 1..=p`
    pub quadrature: Vec<f64>,
    /// `max_i |sum_j a_ij c_j^{l-1} - c_i^l / l|`, `l = 1..=m`
    pub stage: Vec<f64>,
}

impl OrderReport {
    pub fn max_residual(&self) -> f64 {
        self.quadrature
            .iter()
            .chain(&self.stage)
            .fold(0.0, |m, &r| m.max(r))
    }
}

/// Residual of the quadrature condition at a single `l`.
pub fn quadrature_residual(t: &ButcherTableau, l: usize) -> f64 {
    let s: f64 =
        t.b.iter()
            .zip(&t.c)
            .map(|(b, c)| b * c.powi(l as i32 - 1))
            .sum();
    (s - 1.0 / l as f64).abs()
}

/// Residual of the stage-order condition at a single `l`.
pub fn stage_residual(t: &ButcherTableau, l: usize) -> f64 {
    let lf = l as f64;
    t.a.iter()
        .zip(&t.c)
        .map(|(row, ci)| {
            let s: f64 = row
                .iter()
                .zip(&t.c)
                .map(|(a, c)| a * c.powi(l as i32 - 1))
                .sum();
            (s - ci.powi(l as i32) / lf).abs()
        })
        .fold(0.0, f64::max)
}

pub fn verify_order_conditions(t: &ButcherTableau) -> OrderReport {
    OrderReport {
        quadrature: (1..=t.order).map(|l| quadrature_residual(t, l)).collect(),
        stage: (1..=t.stages()).map(|l| stage_residual(t, l)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraicStability {
    pub a_invertible: bool,
    pub b_positive: bool,
    pub min_eigenvalue: f64,
}

impl AlgebraicStability {
    pub fn holds(&self, tol: f64) -> bool {
        self.a_invertible && self.b_positive && self.min_eigenvalue >= -tol
    }
}

pub fn algebraic_stability(t: &ButcherTableau) -> AlgebraicStability {
    let det = t.a_matrix().determinant();
    let eig = SymmetricEigen::new(t.algebraic_stability_matrix());
    AlgebraicStability {
        a_invertible: det.abs() > 1e-12,
        b_positive: t.b.iter().all(|&b| b > 0.0),
        min_eigenvalue: eig.eigenvalues.min(),
    }
}

/// Stability function and stage weight functions of the equivalent rational
/// single-step scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalForm {
    pub sigma: f64,
    pub p: Vec<f64>,
}

/// `(p_1..p_m) = b^T (I + lambda A)^{-1}` and
/// `sigma = 1 - lambda sum_j p_j`, so that one step of `y' = -lambda y + g_i`
/// reads `y1 = sigma y0 + tau sum_i p_i g_i`.
pub fn sigma_p_eval(t: &ButcherTableau, lambda: f64) -> Result<RationalForm> {
    let m = t.stages();
    let mat = DMatrix::from_fn(m, m, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        // transposed system: (I + lambda A)^T p = b
        id + lambda * t.a[j][i]
    });
    let lu = mat.lu();
    let p = lu
        .solve(&DVector::from_column_slice(&t.b))
        .ok_or(Error::SingularStage(lambda))?;
    let sigma = 1.0 - lambda * p.iter().sum::<f64>();
    Ok(RationalForm {
        sigma,
        p: p.iter().copied().collect(),
    })
}

/// Numerical audit of the rational-form assumptions over sampled `lambda`.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub samples: Vec<f64>,
    /// `|sigma(lambda)| < 1` at every positive sample
    pub contractive: bool,
    pub max_abs_sigma: f64,
    pub max_abs_p: f64,
    /// `|sigma|` at the largest sample
    pub sigma_at_infinity: f64,
    pub l_stable: bool,
    /// least-squares slope of `log|sigma - e^{-lambda}|` against `log lambda`
    pub taylor_slope: f64,
    /// largest violation of the strict-accuracy identities, `j = 0..=m`
    pub strict_accuracy_residual: f64,
}

/// Window over which the Taylor slope is fitted. The residual `C lambda^{p+1}`
/// must dominate binary64 rounding of `sigma ~ 1` throughout the window, which
/// rules out `lambda` much below `1e-2` for the sixth-order method.
pub const TAYLOR_WINDOW: (f64, f64) = (0.04, 0.4);

pub fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Strict-accuracy residual
/// `sum_i c_i^j p_i - j!/(-lambda)^{j+1} (sigma - sum_{l<=j} (-lambda)^l / l!)`.
pub fn strict_accuracy_residual(t: &ButcherTableau, lambda: f64, j: usize) -> Result<f64> {
    let rf = sigma_p_eval(t, lambda)?;
    let lhs: f64 =
        t.c.iter()
            .zip(&rf.p)
            .map(|(c, p)| c.powi(j as i32) * p)
            .sum();
    let mut partial = 0.0;
    let mut term = 1.0;
    for l in 0..=j {
        if l > 0 {
            term *= -lambda / l as f64;
        }
        partial += term;
    }
    let fact: f64 = (1..=j).map(|v| v as f64).product();
    let rhs = fact / (-lambda).powi(j as i32 + 1) * (rf.sigma - partial);
    Ok((lhs - rhs).abs() / lhs.abs().max(1.0))
}

pub fn check_assumptions(t: &ButcherTableau, samples: &[f64]) -> Result<AssumptionReport> {
    let mut contractive = true;
    let mut max_abs_sigma: f64 = 0.0;
    let mut max_abs_p: f64 = 0.0;
    let mut sigma_at_infinity = 0.0;
    let mut largest = 0.0;
    for &lambda in samples {
        let rf = sigma_p_eval(t, lambda)?;
        if lambda > 0.0 && rf.sigma.abs() >= 1.0 {
            contractive = false;
        }
        max_abs_sigma = max_abs_sigma.max(rf.sigma.abs());
        max_abs_p = rf.p.iter().fold(max_abs_p, |m, p| m.max(p.abs()));
        if lambda >= largest {
            largest = lambda;
            sigma_at_infinity = rf.sigma.abs();
        }
    }

    let window = log_samples(TAYLOR_WINDOW.0, TAYLOR_WINDOW.1, 12);
    let mut xs = Vec::with_capacity(window.len());
    let mut ys = Vec::with_capacity(window.len());
    for &lambda in &window {
        let rf = sigma_p_eval(t, lambda)?;
        xs.push(lambda.ln());
        ys.push((rf.sigma - (-lambda).exp()).abs().ln());
    }
    let taylor_slope = fit_slope(&xs, &ys);

    let mut strict = 0.0f64;
    for &lambda in log_samples(0.1, 1e3, 25).iter() {
        for j in 0..=t.stages() {
            strict = strict.max(strict_accuracy_residual(t, lambda, j)?);
        }
    }

    Ok(AssumptionReport {
        samples: samples.to_vec(),
        contractive,
        max_abs_sigma,
        max_abs_p,
        sigma_at_infinity,
        l_stable: sigma_at_infinity < 1e-3,
        taylor_slope,
        strict_accuracy_residual: strict,
    })
}
