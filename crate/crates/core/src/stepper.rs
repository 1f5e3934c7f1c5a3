//! Time integrators: extrapolated implicit Runge-Kutta with cut-off, its
//! auxiliary-variable (SAV) variant, and the nonlinear startup that fills
//! the extrapolation history.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::diagnostics::{free_energy, sav_energy};
use crate::error::{Error, Result};
use crate::mesh::NodalField;
use crate::problem::{sav_quantities, Reaction};
use crate::spectral::{SpectralOperator, StageKernel};
use crate::tableau::{gauss_legendre, ButcherTableau};

/// Stage fixed-point tolerance in `||.||_h` during startup.
pub const STARTUP_TOL: f64 = 1e-12;
pub const STARTUP_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    RkCutoff,
    RkPlain,
    SavRkCutoff,
}

impl SchemeKind {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::RkCutoff => "rk",
            SchemeKind::RkPlain => "rk_plain",
            SchemeKind::SavRkCutoff => "sav",
        }
    }

    pub fn clamps(&self) -> bool {
        !matches!(self, SchemeKind::RkPlain)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rk" => Ok(SchemeKind::RkCutoff),
            "rk_plain" => Ok(SchemeKind::RkPlain),
            "sav" => Ok(SchemeKind::SavRkCutoff),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected rk, rk_plain or sav)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    pub tableau: ButcherTableau,
    /// finite element degree
    pub r: usize,
    /// extrapolation depth
    pub k: usize,
    pub tau: f64,
    pub alpha: f64,
    /// SAV shift
    pub c0: f64,
    pub reaction: Reaction,
}

impl SchemeConfig {
    /// Configuration with `k = min(p, m + 1)`, `alpha = 1`, `C0 = 1`.
    pub fn new(
        kind: SchemeKind,
        tableau: ButcherTableau,
        r: usize,
        tau: f64,
        reaction: Reaction,
    ) -> Self {
        let k = tableau.extrapolation_order();
        Self {
            kind,
            tableau,
            r,
            k,
            tau,
            alpha: 1.0,
            c0: 1.0,
            reaction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config(
                "extrapolation depth must be at least 1".into(),
            ));
        }
        if self.tau <= 0.0 || !self.tau.is_finite() {
            return Err(Error::Config(format!(
                "time step {} must be positive",
                self.tau
            )));
        }
        if self.alpha <= 0.0 || self.alpha.is_nan() {
            return Err(Error::Config(format!(
                "bound alpha = {} must be positive",
                self.alpha
            )));
        }
        if self.kind == SchemeKind::SavRkCutoff {
            if self.r != 1 {
                return Err(Error::Config(format!(
                    "the sav scheme is only energy stable for linear elements (r = 1), got r = {}",
                    self.r
                )));
            }
            if self.c0 <= 0.0 || self.c0.is_nan() {
                return Err(Error::Config(format!("c0 = {} must be positive", self.c0)));
            }
        }
        Ok(())
    }
}

/// Lagrange basis on the nodes `t_{n-1}, ..., t_{n-k}` evaluated at
/// `t_{n-1} + theta tau`.
pub fn extrapolation_coeffs(k: usize, theta: f64) -> Vec<f64> {
    let node = |l: usize| -(l as f64);
    (0..k)
        .map(|l| {
            (0..k)
                .filter(|&j| j != l)
                .map(|j| (theta - node(j)) / (node(l) - node(j)))
                .product()
        })
        .collect()
}

/// Clamps every nodal value into `[-alpha, alpha]`; returns the clamped
/// field and the largest nodal change.
pub fn cutoff(v: &NodalField, alpha: f64) -> (NodalField, f64) {
    let clamped = v.map(|x| x.clamp(-alpha, alpha));
    let rho = clamped
        .values()
        .iter()
        .zip(v.values())
        .fold(0.0, |m: f64, (c, x)| m.max((c - x).abs()));
    (clamped, rho)
}

/// Per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    /// largest nodal change made by the cut-off
    pub rho: f64,
    pub max_abs: f64,
    pub energy: f64,
    pub sav_energy: Option<f64>,
    pub z: Option<f64>,
    pub wall_time: Duration,
}

impl StepRecord {
    pub const CSV_HEADER: &'static str = "n,t,max_abs_u,rho,energy,sav_energy,z";

    /// CSV row without the wall time, so rows are reproducible.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            self.n,
            self.t,
            self.max_abs,
            self.rho,
            self.energy,
            opt(self.sav_energy),
            opt(self.z)
        )
    }
}

/// The `k` most recent accepted states, newest first, with the modal
/// coefficients of their reaction source (`f(u)`, or `W(u)` for SAV).
#[derive(Debug, Clone)]
pub struct History {
    states: VecDeque<NodalField>,
    sources: VecDeque<DVector<f64>>,
    z: Option<f64>,
    n: usize,
    capacity: usize,
}

impl History {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.states.len() == self.capacity
    }

    /// Newest state.
    pub fn latest(&self) -> &NodalField {
        &self.states[0]
    }

    /// States, newest first.
    pub fn states(&self) -> impl Iterator<Item = &NodalField> {
        self.states.iter()
    }

    pub fn z(&self) -> Option<f64> {
        self.z
    }

    /// Step index of the newest state.
    pub fn step_index(&self) -> usize {
        self.n
    }

    fn push(&mut self, u: NodalField, source: DVector<f64>, z: Option<f64>) {
        self.states.push_front(u);
        self.sources.push_front(source);
        self.states.truncate(self.capacity);
        self.sources.truncate(self.capacity);
        self.z = z;
        self.n += 1;
    }
}

/// Modal source of a state: `f(u)` for RK schemes, `W(u)` for SAV.
fn modal_source(cfg: &SchemeConfig, op: &SpectralOperator, u: &NodalField) -> Result<DVector<f64>> {
    let nodal = match cfg.kind {
        SchemeKind::SavRkCutoff => sav_quantities(u, &cfg.reaction, cfg.c0)?.w.into_values(),
        _ => cfg.reaction.apply(u.values()),
    };
    Ok(op.to_modal(&nodal))
}

fn modal_dot(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b)
}

/// Solution of the linear stage system coupled to the auxiliary scalar:
/// `dot u_i = Delta_h u_i + z_i W_i`, `dot z_i = -1/2 (W_i, dot u_i)_h`.
struct SavStages {
    delta: Vec<DVector<f64>>,
    rate: Vec<DVector<f64>>,
    zdot: Vec<f64>,
}

fn sav_solve(
    kernel: &StageKernel,
    lap_hat: &DVector<f64>,
    z_prev: f64,
    w: &[DVector<f64>],
) -> Result<SavStages> {
    let t = kernel.tableau();
    let m = t.stages();
    let tau = kernel.tau();
    let base: Vec<DVector<f64>> = w.iter().map(|wi| lap_hat + wi * z_prev).collect();
    let (mut delta, mut rate) = kernel.solve(&base);
    let mut sens = Vec::with_capacity(m);
    for j in 0..m {
        let forcing: Vec<DVector<f64>> = (0..m).map(|i| &w[i] * (tau * t.a[i][j])).collect();
        sens.push(kernel.solve(&forcing));
    }
    let g = DMatrix::from_fn(m, m, |i, j| modal_dot(&w[i], &sens[j].1[i]));
    let d = DVector::from_fn(m, |i, _| modal_dot(&w[i], &rate[i]));
    let system = DMatrix::identity(m, m) + g * 0.5;
    let sv = system.clone().singular_values();
    let cond = sv.max() / sv.min();
    if cond >= 1e14 || cond.is_nan() {
        return Err(Error::SingularSav(cond));
    }
    let zdot = system
        .lu()
        .solve(&(-0.5 * d))
        .ok_or(Error::SingularSav(cond))?;
    for i in 0..m {
        for j in 0..m {
            delta[i].axpy(zdot[j], &sens[j].0[i], 1.0);
            rate[i].axpy(zdot[j], &sens[j].1[i], 1.0);
        }
    }
    Ok(SavStages {
        delta,
        rate,
        zdot: zdot.iter().copied().collect(),
    })
}

/// Extrapolated cut-off stepper bound to one spectral operator.
#[derive(Debug)]
pub struct Stepper {
    cfg: SchemeConfig,
    op: Arc<SpectralOperator>,
    kernel: StageKernel,
    /// `weights[i][l]`: coefficient of `u^{n-1-l}` at stage `i`
    weights: Vec<Vec<f64>>,
    history: History,
    startup_records: Vec<StepRecord>,
}

impl Stepper {
    /// Validates `cfg`, then fills the history from `u0` by the nonlinear
    /// startup procedure.
    pub fn new(cfg: SchemeConfig, op: Arc<SpectralOperator>, u0: NodalField) -> Result<Self> {
        let (history, records) = run_startup(&u0, &cfg, &op)?;
        let mut s = Self::from_history(cfg, op, history)?;
        s.startup_records = records;
        Ok(s)
    }

    /// Resumes from a full history.
    pub fn from_history(
        cfg: SchemeConfig,
        op: Arc<SpectralOperator>,
        history: History,
    ) -> Result<Self> {
        check_setup(&cfg, &op)?;
        if !history.is_full() || history.capacity != cfg.k {
            return Err(Error::Config(format!(
                "history holds {} of {} required states",
                history.len(),
                cfg.k
            )));
        }
        if cfg.kind == SchemeKind::SavRkCutoff && history.z.is_none() {
            return Err(Error::Config(
                "sav history carries no auxiliary variable".into(),
            ));
        }
        let kernel = StageKernel::new(&op, &cfg.tableau, cfg.tau)?;
        let weights = cfg
            .tableau
            .c
            .iter()
            .map(|&c| extrapolation_coeffs(cfg.k, c))
            .collect();
        Ok(Self {
            cfg,
            op,
            kernel,
            weights,
            history,
            startup_records: Vec::new(),
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn operator(&self) -> &Arc<SpectralOperator> {
        &self.op
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn into_history(self) -> History {
        self.history
    }

    pub fn state(&self) -> &NodalField {
        self.history.latest()
    }

    pub fn z(&self) -> Option<f64> {
        self.history.z
    }

    pub fn step_index(&self) -> usize {
        self.history.n
    }

    pub fn time(&self) -> f64 {
        self.history.n as f64 * self.cfg.tau
    }

    /// Records of the initial state and the startup levels.
    pub fn startup_records(&self) -> &[StepRecord] {
        &self.startup_records
    }

    /// Advances one step.
    pub fn step(&mut self) -> Result<StepRecord> {
        let n = self.history.n + 1;
        self.advance().map_err(|e| e.at_step(n))
    }

    /// Advances until step index `n_final`, handing each record to `sink`.
    pub fn run_to(&mut self, n_final: usize, mut sink: impl FnMut(&StepRecord)) -> Result<()> {
        while self.history.n < n_final {
            let rec = self.step()?;
            sink(&rec);
        }
        Ok(())
    }

    fn stage_sources(&self) -> Vec<DVector<f64>> {
        self.weights
            .iter()
            .map(|w| {
                let mut g = DVector::zeros(self.op.len());
                for (wl, src) in w.iter().zip(&self.history.sources) {
                    g.axpy(*wl, src, 1.0);
                }
                g
            })
            .collect()
    }

    fn advance(&mut self) -> Result<StepRecord> {
        let start = Instant::now();
        let cfg = &self.cfg;
        let op = &self.op;
        let prev = self.history.latest();
        let lap_hat = op.to_modal(&op.mesh().apply_laplacian(prev.values()));
        let sources = self.stage_sources();
        let (increment, z) = match cfg.kind {
            SchemeKind::RkCutoff | SchemeKind::RkPlain => {
                let forcing: Vec<DVector<f64>> = sources.iter().map(|g| &lap_hat + g).collect();
                let (_, rate) = self.kernel.solve(&forcing);
                (self.kernel.combine(&rate), None)
            }
            SchemeKind::SavRkCutoff => {
                let z_prev = self.history.z.expect("checked at construction");
                let st = sav_solve(&self.kernel, &lap_hat, z_prev, &sources)?;
                let dz: f64 = cfg.tableau.b.iter().zip(&st.zdot).map(|(b, d)| b * d).sum();
                (self.kernel.combine(&st.rate), Some(z_prev + cfg.tau * dz))
            }
        };
        let raw = add_modal(prev, op, &increment);
        let (u, rho) = finish(cfg, raw)?;
        let source = modal_source(cfg, op, &u)?;
        self.history.push(u, source, z);
        let mut rec = make_record(cfg, self.history.n, self.history.latest(), rho, z);
        rec.wall_time = start.elapsed();
        Ok(rec)
    }
}

fn check_setup(cfg: &SchemeConfig, op: &SpectralOperator) -> Result<()> {
    cfg.validate()?;
    if op.mesh().degree() != cfg.r {
        return Err(Error::Config(format!(
            "configured degree r = {} but the mesh has r = {}",
            cfg.r,
            op.mesh().degree()
        )));
    }
    Ok(())
}

fn add_modal(base: &NodalField, op: &SpectralOperator, coeffs: &DVector<f64>) -> NodalField {
    let d = op.from_modal(coeffs);
    let values = base.values().iter().zip(d).map(|(u, d)| u + d).collect();
    NodalField::new(base.mesh().clone(), values).expect("sizes match")
}

/// Cut-off (unless plain) and finiteness check of a raw update.
fn finish(cfg: &SchemeConfig, raw: NodalField) -> Result<(NodalField, f64)> {
    if let Some((j, v)) = raw
        .values()
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite())
    {
        return Err(Error::NonFinite {
            x: raw.mesh().nodes()[j],
            value: *v,
        });
    }
    Ok(if cfg.kind.clamps() {
        cutoff(&raw, cfg.alpha)
    } else {
        (raw, 0.0)
    })
}

fn make_record(
    cfg: &SchemeConfig,
    n: usize,
    u: &NodalField,
    rho: f64,
    z: Option<f64>,
) -> StepRecord {
    StepRecord {
        n,
        t: n as f64 * cfg.tau,
        rho,
        max_abs: u.max_abs(),
        energy: free_energy(u, &cfg.reaction),
        sav_energy: z.map(|z| sav_energy(u, z)),
        z,
        wall_time: Duration::ZERO,
    }
}

fn run_startup(
    u0: &NodalField,
    cfg: &SchemeConfig,
    op: &Arc<SpectralOperator>,
) -> Result<(History, Vec<StepRecord>)> {
    check_setup(cfg, op)?;
    if u0.mesh().key() != op.mesh().key() {
        return Err(Error::MeshMismatch);
    }
    if cfg.kind.clamps() && u0.max_abs() > cfg.alpha {
        return Err(Error::Config(format!(
            "initial data reaches {} which exceeds the bound alpha = {}",
            u0.max_abs(),
            cfg.alpha
        )));
    }
    let z0 = match cfg.kind {
        SchemeKind::SavRkCutoff => Some(sav_quantities(u0, &cfg.reaction, cfg.c0)?.z),
        _ => None,
    };
    let mut history = History {
        states: VecDeque::with_capacity(cfg.k),
        sources: VecDeque::with_capacity(cfg.k),
        z: z0,
        n: 0,
        capacity: cfg.k,
    };
    history.states.push_front(u0.clone());
    history.sources.push_front(modal_source(cfg, op, u0)?);
    let mut records = vec![make_record(cfg, 0, u0, 0.0, z0)];
    if cfg.k == 1 {
        return Ok((history, records));
    }
    let gl3 = gauss_legendre(3)?;
    let kernel = StageKernel::new(op, &gl3, cfg.tau)?;
    for _ in 1..cfg.k {
        let start = Instant::now();
        let n = history.n + 1;
        let (raw, z) = nonlinear_step(cfg, op, &kernel, history.latest(), history.z)
            .map_err(|e| e.at_step(n))?;
        let (u, rho) = finish(cfg, raw).map_err(|e| e.at_step(n))?;
        let source = modal_source(cfg, op, &u)?;
        history.push(u, source, z);
        let mut rec = make_record(cfg, history.n, history.latest(), rho, z);
        rec.wall_time = start.elapsed();
        records.push(rec);
    }
    Ok((history, records))
}

/// One step of the fully implicit method on the nonlinear semidiscrete
/// system, with stages found by fixed-point iteration.
fn nonlinear_step(
    cfg: &SchemeConfig,
    op: &SpectralOperator,
    kernel: &StageKernel,
    prev: &NodalField,
    z_prev: Option<f64>,
) -> Result<(NodalField, Option<f64>)> {
    let m = kernel.tableau().stages();
    let lap_hat = op.to_modal(&op.mesh().apply_laplacian(prev.values()));
    let mut stage_delta: Vec<DVector<f64>> = vec![DVector::zeros(op.len()); m];
    let mut stages: Vec<NodalField> = vec![prev.clone(); m];
    let mut zdot_prev = vec![0.0; m];
    let mut last = f64::INFINITY;
    for iter in 1..=STARTUP_MAX_ITER {
        let (delta, rate, zdot) = match cfg.kind {
            SchemeKind::SavRkCutoff => {
                let z_prev = z_prev.expect("sav startup carries z");
                let w = stages
                    .iter()
                    .map(|s| Ok(op.to_modal(sav_quantities(s, &cfg.reaction, cfg.c0)?.w.values())))
                    .collect::<Result<Vec<_>>>()?;
                let st = sav_solve(kernel, &lap_hat, z_prev, &w)?;
                (st.delta, st.rate, st.zdot)
            }
            _ => {
                let forcing: Vec<DVector<f64>> = stages
                    .iter()
                    .map(|s| &lap_hat + op.to_modal(&cfg.reaction.apply(s.values())))
                    .collect();
                let (delta, rate) = kernel.solve(&forcing);
                (delta, rate, vec![0.0; m])
            }
        };
        // modal coefficients are orthonormal in (.,.)_h
        let mut change: f64 = 0.0;
        for i in 0..m {
            let du = (&delta[i] - &stage_delta[i]).norm();
            let dz = (zdot[i] - zdot_prev[i]).abs() * cfg.tau;
            if !du.is_finite() || !dz.is_finite() {
                change = f64::INFINITY;
                break;
            }
            change = change.max(du).max(dz);
        }
        if change.is_infinite() {
            return Err(Error::StartupDiverged {
                iterations: iter,
                increment: change,
            });
        }
        stages = delta.iter().map(|d| add_modal(prev, op, d)).collect();
        stage_delta = delta;
        zdot_prev = zdot;
        last = change;
        if change < STARTUP_TOL {
            let update = add_modal(prev, op, &kernel.combine(&rate));
            let z = z_prev.map(|z| {
                z + cfg.tau
                    * kernel
                        .tableau()
                        .b
                        .iter()
                        .zip(&zdot_prev)
                        .map(|(b, d)| b * d)
                        .sum::<f64>()
            });
            return Ok((update, z));
        }
    }
    Err(Error::StartupDiverged {
        iterations: STARTUP_MAX_ITER,
        increment: last,
    })
}

/// Fills the history from `u0` (`k - 1` startup steps).
pub fn startup(u0: &NodalField, cfg: &SchemeConfig, op: &Arc<SpectralOperator>) -> Result<History> {
    run_startup(u0, cfg, op).map(|(h, _)| h)
}

/// One extrapolated cut-off RK step (or plain, per `cfg.kind`).
pub fn step_rk_cutoff(
    hist: &mut History,
    cfg: &SchemeConfig,
    op: &Arc<SpectralOperator>,
) -> Result<(NodalField, StepRecord)> {
    if cfg.kind == SchemeKind::SavRkCutoff {
        return Err(Error::Config(
            "step_rk_cutoff called with the sav scheme".into(),
        ));
    }
    let mut s = Stepper::from_history(cfg.clone(), op.clone(), hist.clone())?;
    let rec = s.step()?;
    *hist = s.into_history();
    Ok((hist.latest().clone(), rec))
}

/// One cut-off SAV-RK step; returns the new state and auxiliary variable.
pub fn step_sav_rk_cutoff(
    hist: &mut History,
    cfg: &SchemeConfig,
    op: &Arc<SpectralOperator>,
) -> Result<(NodalField, f64, StepRecord)> {
    if cfg.kind != SchemeKind::SavRkCutoff {
        return Err(Error::Config(
            "step_sav_rk_cutoff requires the sav scheme".into(),
        ));
    }
    let mut s = Stepper::from_history(cfg.clone(), op.clone(), hist.clone())?;
    let rec = s.step()?;
    *hist = s.into_history();
    let z = hist.z.expect("sav history carries z");
    Ok((hist.latest().clone(), z, rec))
}
