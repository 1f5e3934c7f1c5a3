//! Numerical oracles: order studies on problems with known solutions and
//! the structural estimates the schemes rely on.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::diagnostics::consistency_defect;
use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, NodalField};
use crate::problem::Reaction;
use crate::spectral::SpectralOperator;
use crate::stepper::{cutoff, SchemeConfig, SchemeKind, Stepper};
use crate::tableau::ButcherTableau;

/// Global error at `t = 1` of `n` steps of the tableau on `y' = -y`,
/// `y(0) = 1`, with the stage equations solved directly.
pub fn scalar_decay_error(t: &ButcherTableau, n: usize) -> Result<f64> {
    let m = t.stages();
    let tau = 1.0 / n as f64;
    // Y = y 1 - tau A Y  =>  (I + tau A) Y = y 1
    let mat = DMatrix::identity(m, m) + t.a_matrix() * tau;
    let lu = mat.lu();
    let mut y = 1.0;
    for _ in 0..n {
        let stages = lu
            .solve(&DVector::from_element(m, y))
            .ok_or(Error::SingularStage(tau))?;
        y -= tau
            * t.b
                .iter()
                .zip(stages.iter())
                .map(|(b, s)| b * s)
                .sum::<f64>();
    }
    Ok((y - (-1.0f64).exp()).abs())
}

/// `(n, error)` rows of [`scalar_decay_error`].
pub fn scalar_decay_study(t: &ButcherTableau, levels: &[usize]) -> Result<Vec<(usize, f64)>> {
    levels
        .iter()
        .map(|&n| Ok((n, scalar_decay_error(t, n)?)))
        .collect()
}

/// Linear reaction-diffusion problem `u_t = Delta_h u + beta u` on `(0, 2)`
/// with `u0 = cos(pi x / 2)`, whose semidiscrete solution is known modally.
#[derive(Debug, Clone)]
pub struct LinearHeat {
    pub op: Arc<SpectralOperator>,
    pub beta: f64,
    pub t_final: f64,
    u0: NodalField,
}

impl LinearHeat {
    pub fn new(elements: usize, r: usize, beta: f64, t_final: f64) -> Result<Self> {
        let mesh = Mesh1D::new(0.0, 2.0, elements, r)?;
        let op = SpectralOperator::for_mesh(&mesh)?;
        let u0 = NodalField::interpolate(mesh, |x| (PI * x / 2.0).cos())?;
        Ok(Self {
            op,
            beta,
            t_final,
            u0,
        })
    }

    /// `sum_j exp((beta - lambda_j) T) (u0, phi_j)_h phi_j`.
    pub fn exact(&self) -> NodalField {
        let mut c = self.op.to_modal(self.u0.values());
        for (cj, l) in c.iter_mut().zip(self.op.eigenvalues()) {
            *cj *= ((self.beta - l) * self.t_final).exp();
        }
        NodalField::new(self.op.mesh().clone(), self.op.from_modal(&c)).expect("sizes match")
    }

    /// Error at `T` of the extrapolated scheme (no cut-off) with `n` steps.
    pub fn error(&self, t: &ButcherTableau, n: usize) -> Result<f64> {
        let cfg = SchemeConfig::new(
            SchemeKind::RkPlain,
            t.clone(),
            self.op.mesh().degree(),
            self.t_final / n as f64,
            Reaction::Linear { beta: self.beta },
        );
        let mut s = Stepper::new(cfg, self.op.clone(), self.u0.clone())?;
        s.run_to(n, |_| {})?;
        s.state().l2_error(&self.exact())
    }

    pub fn study(&self, t: &ButcherTableau, levels: &[usize]) -> Result<Vec<(usize, f64)>> {
        levels.iter().map(|&n| Ok((n, self.error(t, n)?))).collect()
    }
}

/// Dual-norm size of `Pi_h Delta v - Delta_h Pi_h v` for `v = cos(pi x / 2)`
/// on `(0, 2)`, at each element count in `levels`.
pub fn consistency_study(r: usize, levels: &[usize]) -> Result<Vec<(usize, f64)>> {
    levels
        .iter()
        .map(|&m| {
            let mesh = Mesh1D::new(0.0, 2.0, m, r)?;
            let op = SpectralOperator::for_mesh(&mesh)?;
            let k = PI / 2.0;
            let d = consistency_defect(&op, |x| (k * x).cos(), |x| -k * k * (k * x).cos())?;
            Ok((m, d))
        })
        .collect()
}

/// Extreme ratios `||v||_h / ||v||_{L^2}` over random nodal fields.
pub fn norm_equivalence_bounds(
    mesh: &Arc<Mesh1D>,
    samples: usize,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for _ in 0..samples {
        let v: Vec<f64> = (0..mesh.num_nodes())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let f = NodalField::new(mesh.clone(), v).expect("sizes match");
        let ratio = f.norm_h() / f.l2_norm();
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    (lo, hi)
}

/// Sharp constants `C1, C2` with `C1 ||v||_{L^2} <= ||v||_h <= C2 ||v||_{L^2}`
/// on `mesh`: square roots of the extreme eigenvalues of `D v = mu M v`,
/// with `D` the lumped and `M` the consistent mass matrix.
pub fn norm_equivalence_constants(mesh: &Arc<Mesh1D>) -> Result<(f64, f64)> {
    let m = mesh.mass_matrix();
    let n = m.nrows();
    let chol = m.cholesky().ok_or_else(|| Error::Eigen {
        size: n,
        detail: "consistent mass matrix is not positive definite".into(),
    })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or_else(|| Error::Eigen {
        size: n,
        detail: "singular Cholesky factor".into(),
    })?;
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(mesh.lumped_weights()));
    let s = &linv * d * linv.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let eig = s.symmetric_eigenvalues();
    Ok((eig.min().sqrt(), eig.max().sqrt()))
}

/// Largest `||(clamped v)'|| - ||v'||` over random linear-element fields with
/// excursions beyond `[-1, 1]` (nonpositive when the cut-off never increases
/// the gradient energy).
pub fn clamp_gradient_excess(mesh: &Arc<Mesh1D>, samples: usize, rng: &mut impl Rng) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..samples {
        let v: Vec<f64> = (0..mesh.num_nodes())
            .map(|_| rng.gen_range(-1.6..1.6))
            .collect();
        let f = NodalField::new(mesh.clone(), v).expect("sizes match");
        let (c, _) = cutoff(&f, 1.0);
        worst = worst.max(c.grad_norm() - f.grad_norm());
    }
    worst
}
