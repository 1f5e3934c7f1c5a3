//! Eigen-decomposition of the discrete Laplacian in the lumped inner product
//! and the modal implicit-stage solver built on it.
//!
//! With `D = diag(w)` the generalized problem `K phi = lambda D phi` is
//! solved through the symmetric matrix `D^{-1/2} K D^{-1/2} = Q Lambda Q^T`.
//! Eigenvectors `phi_j = D^{-1/2} q_j` are orthonormal in `(.,.)_h`, so the
//! modal coefficient of `v` is `(v, phi_j)_h = q_j^T D^{1/2} v`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::mesh::{Mesh1D, MeshKey, NodalField};
use crate::tableau::{sigma_p_eval, ButcherTableau};

#[derive(Debug)]
pub struct SpectralOperator {
    mesh: Arc<Mesh1D>,
    eigenvalues: Vec<f64>,
    /// columns are the symmetrized eigenvectors `q_j`
    q: DMatrix<f64>,
    sqrt_w: Vec<f64>,
}

/// Generalized symmetric eigensolve of `K phi = lambda diag(w) phi`.
///
/// Returns ascending eigenvalues and the orthonormal eigenvectors of the
/// symmetrized matrix.
pub fn eigendecompose(k: &DMatrix<f64>, w: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = w.len();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::Eigen {
            size: n,
            detail: format!("stiffness is {}x{}", k.nrows(), k.ncols()),
        });
    }
    if let Some(bad) = w.iter().find(|&&w| w <= 0.0 || w.is_nan()) {
        return Err(Error::Eigen {
            size: n,
            detail: format!("non-positive lumped weight {bad}"),
        });
    }
    let inv_sqrt: Vec<f64> = w.iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut s = DMatrix::from_fn(n, n, |i, j| k[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    // exact symmetry for the solver
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 0).ok_or_else(|| Error::Eigen {
        size: n,
        detail: format!(
            "QR iteration did not converge (max weight / min weight = {:e})",
            w.iter().cloned().fold(0.0, f64::max) / w.iter().cloned().fold(f64::INFINITY, f64::min)
        ),
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut q = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        q.set_column(dst, &eig.eigenvectors.column(src));
        // the Neumann nullspace can come back as -1e-14
        values.push(eig.eigenvalues[src].max(0.0));
    }
    Ok((values, q))
}

fn cache() -> &'static Mutex<HashMap<MeshKey, Arc<SpectralOperator>>> {
    static CACHE: OnceLock<Mutex<HashMap<MeshKey, Arc<SpectralOperator>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl SpectralOperator {
    pub fn new(mesh: Arc<Mesh1D>) -> Result<Self> {
        let (eigenvalues, q) = eigendecompose(&mesh.stiffness_matrix(), mesh.lumped_weights())?;
        let sqrt_w = mesh.lumped_weights().iter().map(|w| w.sqrt()).collect();
        Ok(Self {
            mesh,
            eigenvalues,
            q,
            sqrt_w,
        })
    }

    /// Shared operator for `mesh`, computed once per process.
    pub fn for_mesh(mesh: &Arc<Mesh1D>) -> Result<Arc<Self>> {
        let key = mesh.key();
        if let Some(op) = cache().lock().expect("spectral cache poisoned").get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(Self::new(mesh.clone())?);
        let mut guard = cache().lock().expect("spectral cache poisoned");
        Ok(guard.entry(key).or_insert(op).clone())
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `phi_j` as a nodal field.
    pub fn eigenvector(&self, j: usize) -> NodalField {
        let values = self
            .q
            .column(j)
            .iter()
            .zip(&self.sqrt_w)
            .map(|(q, s)| q / s)
            .collect();
        NodalField::new(self.mesh.clone(), values).expect("sizes match")
    }

    /// Modal coefficients `(v, phi_j)_h`.
    pub fn to_modal(&self, v: &[f64]) -> DVector<f64> {
        let scaled =
            DVector::from_iterator(v.len(), v.iter().zip(&self.sqrt_w).map(|(v, s)| v * s));
        self.q.tr_mul(&scaled)
    }

    /// Nodal values of `sum_j coeffs_j phi_j`.
    pub fn from_modal(&self, coeffs: &DVector<f64>) -> Vec<f64> {
        let y = &self.q * coeffs;
        y.iter().zip(&self.sqrt_w).map(|(y, s)| y / s).collect()
    }

    /// Scales mode `j` by `g(j, lambda_j)`.
    fn apply_symbol(&self, v: &NodalField, g: impl Fn(usize, f64) -> f64) -> Result<NodalField> {
        if v.mesh().key() != self.mesh.key() {
            return Err(Error::MeshMismatch);
        }
        let mut c = self.to_modal(v.values());
        for (j, (cj, &l)) in c.iter_mut().zip(&self.eigenvalues).enumerate() {
            *cj *= g(j, l);
        }
        NodalField::new(self.mesh.clone(), self.from_modal(&c))
    }

    /// `sigma(-tau Delta_h) v`.
    pub fn apply_sigma(&self, t: &ButcherTableau, tau: f64, v: &NodalField) -> Result<NodalField> {
        let factors = self.rational_table(t, tau)?;
        self.apply_symbol(v, |j, _| factors[j].0)
    }

    /// `p_i(-tau Delta_h) v` for stage `i` (zero based).
    pub fn apply_p(
        &self,
        t: &ButcherTableau,
        tau: f64,
        stage: usize,
        v: &NodalField,
    ) -> Result<NodalField> {
        let factors = self.rational_table(t, tau)?;
        self.apply_symbol(v, |j, _| factors[j].1[stage])
    }

    fn rational_table(&self, t: &ButcherTableau, tau: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        self.eigenvalues
            .iter()
            .map(|&l| sigma_p_eval(t, tau * l).map(|rf| (rf.sigma, rf.p)))
            .collect()
    }

    /// `Delta_h v` evaluated modally (used to cross-check the nodal route).
    pub fn apply_laplacian_modal(&self, v: &NodalField) -> Result<NodalField> {
        self.apply_symbol(v, |_, l| -l)
    }

    /// `sup_phi (g, phi)_h / ||phi||_{H^1}` with `||phi||^2_{H^1} = ||phi||_h^2 + ||phi'||^2`.
    pub fn dual_h1_norm(&self, g: &[f64]) -> f64 {
        let c = self.to_modal(g);
        c.iter()
            .zip(&self.eigenvalues)
            .map(|(c, l)| c * c / (1.0 + l))
            .sum::<f64>()
            .sqrt()
    }
}

/// Per-mode factorizations `(I + tau lambda_j A)^{-1}` for one tableau and
/// step size.
#[derive(Debug, Clone)]
pub struct StageKernel {
    tableau: ButcherTableau,
    tau: f64,
    eigenvalues: Vec<f64>,
    /// row-major `m x m` blocks of `(I + tau lambda A)^{-1} tau A`, one per mode
    solve_blocks: Vec<f64>,
}

impl StageKernel {
    pub fn new(op: &SpectralOperator, tableau: &ButcherTableau, tau: f64) -> Result<Self> {
        let m = tableau.stages();
        let a = tableau.a_matrix();
        let mut solve_blocks = Vec::with_capacity(op.len() * m * m);
        for &l in op.eigenvalues() {
            let mat = DMatrix::identity(m, m) + &a * (tau * l);
            let inv = mat.try_inverse().ok_or(Error::SingularStage(tau * l))?;
            let block = inv * &a * tau;
            for i in 0..m {
                for j in 0..m {
                    solve_blocks.push(block[(i, j)]);
                }
            }
        }
        Ok(Self {
            tableau: tableau.clone(),
            tau,
            eigenvalues: op.eigenvalues().to_vec(),
            solve_blocks,
        })
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Given modal forcings `r_i` of `dot u_i = Delta_h delta_i + r_i`,
    /// `delta_i = tau sum_j a_ij dot u_j`, returns the modal stage increments
    /// `delta_i` and stage derivatives `dot u_i`.
    pub fn solve(&self, forcing: &[DVector<f64>]) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
        let m = self.tableau.stages();
        assert_eq!(forcing.len(), m, "one forcing per stage");
        let n = self.eigenvalues.len();
        let mut delta = vec![DVector::zeros(n); m];
        let mut rate = vec![DVector::zeros(n); m];
        let mut buf = vec![0.0; m];
        for (mode, &l) in self.eigenvalues.iter().enumerate() {
            let block = &self.solve_blocks[mode * m * m..(mode + 1) * m * m];
            for (j, b) in buf.iter_mut().enumerate() {
                *b = forcing[j][mode];
            }
            for i in 0..m {
                let d: f64 = (0..m).map(|j| block[i * m + j] * buf[j]).sum();
                delta[i][mode] = d;
                rate[i][mode] = buf[i] - l * d;
            }
        }
        (delta, rate)
    }

    /// Modal increment `tau sum_i b_i dot u_i`.
    pub fn combine(&self, rates: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.eigenvalues.len());
        for (b, r) in self.tableau.b.iter().zip(rates) {
            out.axpy(self.tau * b, r, 1.0);
        }
        out
    }
}

/// One implicit Runge-Kutta step of `u' = Delta_h u + g_i` with frozen stage
/// sources `g_i`.
#[derive(Debug, Clone)]
pub struct StageSystem {
    pub tableau: ButcherTableau,
    pub tau: f64,
    pub sources: Vec<NodalField>,
    pub previous: NodalField,
}

#[derive(Debug, Clone)]
pub struct StageSolution {
    pub stages: Vec<NodalField>,
    pub derivatives: Vec<NodalField>,
    pub update: NodalField,
}

pub fn solve_stages(sys: &StageSystem, op: &SpectralOperator) -> Result<StageSolution> {
    let kernel = StageKernel::new(op, &sys.tableau, sys.tau)?;
    solve_stages_with(&kernel, op, &sys.previous, &sys.sources)
}

/// As [`solve_stages`], reusing a prepared kernel.
pub fn solve_stages_with(
    kernel: &StageKernel,
    op: &SpectralOperator,
    previous: &NodalField,
    sources: &[NodalField],
) -> Result<StageSolution> {
    let m = kernel.tableau.stages();
    if sources.len() != m {
        return Err(Error::Config(format!(
            "{} stage sources for an {m}-stage tableau",
            sources.len()
        )));
    }
    let mesh = op.mesh();
    if previous.mesh().key() != mesh.key() || sources.iter().any(|s| s.mesh().key() != mesh.key()) {
        return Err(Error::MeshMismatch);
    }
    let lap = mesh.apply_laplacian(previous.values());
    let forcing: Vec<DVector<f64>> = sources
        .iter()
        .map(|g| {
            let r: Vec<f64> = lap.iter().zip(g.values()).map(|(l, g)| l + g).collect();
            op.to_modal(&r)
        })
        .collect();
    let (delta, rate) = kernel.solve(&forcing);
    let field = |v: Vec<f64>| NodalField::new(mesh.clone(), v).expect("sizes match");
    let shifted = |c: &DVector<f64>| {
        let d = op.from_modal(c);
        field(
            previous
                .values()
                .iter()
                .zip(d)
                .map(|(u, d)| u + d)
                .collect(),
        )
    };
    Ok(StageSolution {
        stages: delta.iter().map(shifted).collect(),
        derivatives: rate.iter().map(|c| field(op.from_modal(c))).collect(),
        update: shifted(&kernel.combine(&rate)),
    })
}
