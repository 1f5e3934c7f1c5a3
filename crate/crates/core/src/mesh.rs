//! Uniform 1D meshes carrying degree-`r` Lagrange elements on Gauss-Lobatto
//! nodes, the lumped (nodal quadrature) inner product, and the exact
//! stiffness form.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_rule, gauss_lobatto_rule, GaussLobattoRule, LagrangeBasis};

#[derive(Debug, Clone)]
pub struct Mesh1D {
    a: f64,
    b: f64,
    elements: usize,
    rule: GaussLobattoRule,
    basis: LagrangeBasis,
    nodes: Vec<f64>,
    lumped_weights: Vec<f64>,
    /// Stiffness on one element of length `h`, `(r+1) x (r+1)`.
    element_stiffness: Vec<Vec<f64>>,
}

/// Identity of a mesh: two meshes with equal keys are interchangeable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeshKey {
    a: u64,
    b: u64,
    elements: usize,
    r: usize,
}

impl Mesh1D {
    /// Uniform partition of `[a, b]` into `elements` cells of degree `r`.
    pub fn new(a: f64, b: f64, elements: usize, r: usize) -> Result<Arc<Self>> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMesh(format!("need a < b, got [{a}, {b}]")));
        }
        if elements == 0 {
            return Err(Error::InvalidMesh("element count must be positive".into()));
        }
        let rule = gauss_lobatto_rule(r)?;
        let basis = LagrangeBasis::new(&rule.nodes);
        let h = (b - a) / elements as f64;
        let n = elements * r + 1;

        let mut nodes = vec![0.0; n];
        let mut lumped_weights = vec![0.0; n];
        for e in 0..elements {
            for (j, (&xi, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
                let g = e * r + j;
                nodes[g] = a + (b - a) * ((e as f64 + xi) / elements as f64);
                // interface nodes collect one endpoint weight from each side
                lumped_weights[g] += w * h;
            }
        }
        nodes[n - 1] = b;

        // Gauss-Legendre with r points integrates the degree 2r-2 products
        // of basis derivatives exactly.
        let (qx, qw) = gauss_legendre_rule(r);
        let derivs: Vec<Vec<f64>> = qx.iter().map(|&x| basis.derivatives(x)).collect();
        let mut element_stiffness = vec![vec![0.0; r + 1]; r + 1];
        for i in 0..=r {
            for j in i..=r {
                let s: f64 = derivs
                    .iter()
                    .zip(&qw)
                    .map(|(d, w)| w * d[i] * d[j])
                    .sum::<f64>()
                    / h;
                element_stiffness[i][j] = s;
                element_stiffness[j][i] = s;
            }
        }

        Ok(Arc::new(Self {
            a,
            b,
            elements,
            rule,
            basis,
            nodes,
            lumped_weights,
            element_stiffness,
        }))
    }

    pub fn key(&self) -> MeshKey {
        MeshKey {
            a: self.a.to_bits(),
            b: self.b.to_bits(),
            elements: self.elements,
            r: self.rule.r,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn degree(&self) -> usize {
        self.rule.r
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.elements as f64
    }

    pub fn rule(&self) -> &GaussLobattoRule {
        &self.rule
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn lumped_weights(&self) -> &[f64] {
        &self.lumped_weights
    }

    pub fn element_stiffness(&self) -> &[Vec<f64>] {
        &self.element_stiffness
    }

    fn element_edges(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.elements).map(|e| self.nodes[e * self.rule.r])
    }

    fn element_range(&self, e: usize) -> std::ops::Range<usize> {
        let r = self.rule.r;
        e * r..e * r + r + 1
    }

    /// Element containing `x` and the local coordinate in `[0, 1]`.
    fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.a) / self.h();
        let e = (s.floor().max(0.0) as usize).min(self.elements - 1);
        (e, s - e as f64)
    }

    /// `K v`, with `K` the exact stiffness matrix.
    ///
    /// Rows of each element matrix sum to zero, so products are formed from
    /// nodal differences; constants map to exactly zero.
    pub fn apply_stiffness(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for e in 0..self.elements {
            let range = self.element_range(e);
            let local = &v[range.clone()];
            for (a, g) in range.enumerate() {
                let mut s = 0.0;
                for (b, &vb) in local.iter().enumerate() {
                    if a != b {
                        s += self.element_stiffness[a][b] * (vb - local[a]);
                    }
                }
                out[g] += s;
            }
        }
        out
    }

    /// `v^T K v = ||d/dx v_h||^2_{L^2}`.
    pub fn stiffness_quad_form(&self, v: &[f64]) -> f64 {
        let mut total = 0.0;
        for e in 0..self.elements {
            let local = &v[self.element_range(e)];
            for (a, &va) in local.iter().enumerate() {
                for (b, &vb) in local.iter().enumerate().skip(a + 1) {
                    // -K_ab (v_a - v_b)^2 summed over pairs
                    let d = va - vb;
                    total -= self.element_stiffness[a][b] * d * d;
                }
            }
        }
        total
    }

    /// Dense global stiffness matrix.
    pub fn stiffness_matrix(&self) -> DMatrix<f64> {
        let n = self.num_nodes();
        let mut k = DMatrix::zeros(n, n);
        for e in 0..self.elements {
            let range = self.element_range(e);
            for (a, ga) in range.clone().enumerate() {
                for (b, gb) in range.clone().enumerate() {
                    k[(ga, gb)] += self.element_stiffness[a][b];
                }
            }
        }
        k
    }

    /// Dense consistent mass matrix `(phi_a, phi_b)_{L^2}`, integrated exactly.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        let (qx, qw) = gauss_legendre_rule(self.rule.r + 1);
        let r = self.rule.r;
        let mut local = vec![vec![0.0; r + 1]; r + 1];
        for (&x, &w) in qx.iter().zip(&qw) {
            let phi = self.basis.values(x);
            for a in 0..=r {
                for b in 0..=r {
                    local[a][b] += w * self.h() * phi[a] * phi[b];
                }
            }
        }
        let n = self.num_nodes();
        let mut m = DMatrix::zeros(n, n);
        for e in 0..self.elements {
            let range = self.element_range(e);
            for (a, ga) in range.clone().enumerate() {
                for (b, gb) in range.clone().enumerate() {
                    m[(ga, gb)] += local[a][b];
                }
            }
        }
        m
    }

    /// Discrete Laplacian `Delta_h v = -D^{-1} K v`.
    pub fn apply_laplacian(&self, v: &[f64]) -> Vec<f64> {
        let mut kv = self.apply_stiffness(v);
        for (y, w) in kv.iter_mut().zip(&self.lumped_weights) {
            *y = -*y / w;
        }
        kv
    }

    /// Sum of `w_j f_j g_j`.
    pub fn weighted_dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.lumped_weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }
}

/// Nodal values of a finite element function.
#[derive(Debug, Clone)]
pub struct NodalField {
    mesh: Arc<Mesh1D>,
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(mesh: Arc<Mesh1D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidMesh(format!(
                "expected {} nodal values, got {}",
                mesh.num_nodes(),
                values.len()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<Mesh1D>, c: f64) -> Self {
        let values = vec![c; mesh.num_nodes()];
        Self { mesh, values }
    }

    /// Nodal interpolant `Pi_h fun`.
    pub fn interpolate(mesh: Arc<Mesh1D>, fun: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(mesh.num_nodes());
        for &x in mesh.nodes() {
            let v = fun(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { x, value: v });
            }
            values.push(v);
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<Mesh1D> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_mesh(&self, other: &NodalField) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || self.mesh.key() == other.mesh.key()
    }

    /// Discrete inner product `(f, g)_h`.
    pub fn inner(&self, other: &NodalField) -> Result<f64> {
        if !self.same_mesh(other) {
            return Err(Error::MeshMismatch);
        }
        Ok(self.mesh.weighted_dot(&self.values, &other.values))
    }

    pub fn norm_h(&self) -> f64 {
        self.mesh.weighted_dot(&self.values, &self.values).sqrt()
    }

    /// `||d/dx u_h||_{L^2}`.
    pub fn grad_norm(&self) -> f64 {
        self.mesh.stiffness_quad_form(&self.values).max(0.0).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> NodalField {
        NodalField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Point evaluation of the piecewise polynomial.
    pub fn eval(&self, x: f64) -> f64 {
        let (e, xi) = self.mesh.locate(x);
        let range = self.mesh.element_range(e);
        self.mesh.basis.eval(&self.values[range], xi)
    }

    /// Nodal interpolant of this function onto another mesh of the same
    /// domain.
    pub fn transfer_to(&self, target: Arc<Mesh1D>) -> Result<NodalField> {
        if target.a() != self.mesh.a() || target.b() != self.mesh.b() {
            return Err(Error::MeshMismatch);
        }
        NodalField::interpolate(target, |x| self.eval(x))
    }

    /// `L^2` distance to `exact`, by `(r+2)`-point Gauss-Legendre quadrature
    /// per element (exact for polynomial integrands of degree `2r + 3`).
    pub fn l2_error_fn(&self, exact: impl Fn(f64) -> f64) -> f64 {
        let mesh = &self.mesh;
        let (qx, qw) = gauss_legendre_rule(mesh.degree() + 2);
        let table: Vec<Vec<f64>> = qx.iter().map(|&x| mesh.basis.values(x)).collect();
        let h = mesh.h();
        let mut total = 0.0;
        for e in 0..mesh.elements {
            let local = &self.values[mesh.element_range(e)];
            for ((&xi, &w), phi) in qx.iter().zip(&qw).zip(&table) {
                let uh: f64 = phi.iter().zip(local).map(|(p, u)| p * u).sum();
                let x = mesh.a + (mesh.b - mesh.a) * ((e as f64 + xi) / mesh.elements as f64);
                let d = uh - exact(x);
                total += w * h * d * d;
            }
        }
        total.sqrt()
    }

    /// `L^2` distance between two fields on the same mesh.
    pub fn l2_error(&self, other: &NodalField) -> Result<f64> {
        if !self.same_mesh(other) {
            return Err(Error::MeshMismatch);
        }
        let diff = NodalField {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        };
        Ok(diff.l2_error_fn(|_| 0.0))
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_error_fn(|_| 0.0)
    }

    /// `L^2` distance between fields on possibly different meshes of the
    /// same domain, integrated exactly over the common refinement of the
    /// two partitions.
    pub fn l2_distance(&self, other: &NodalField) -> Result<f64> {
        let (ma, mb) = (&self.mesh, &other.mesh);
        if ma.a != mb.a || ma.b != mb.b {
            return Err(Error::MeshMismatch);
        }
        let mut breaks: Vec<f64> = ma.element_edges().chain(mb.element_edges()).collect();
        breaks.sort_by(f64::total_cmp);
        let tol = 1e-12 * ma.length();
        breaks.dedup_by(|x, y| (*x - *y).abs() <= tol);
        let (qx, qw) = gauss_legendre_rule(ma.degree().max(mb.degree()) + 2);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let len = x1 - x0;
            // evaluate each field on the element containing this piece
            let mid = 0.5 * (x0 + x1);
            let (ea, _) = ma.locate(mid);
            let (eb, _) = mb.locate(mid);
            for (&xi, &wq) in qx.iter().zip(&qw) {
                let x = x0 + len * xi;
                let ua = self.eval_in(ea, x);
                let ub = other.eval_in(eb, x);
                total += wq * len * (ua - ub) * (ua - ub);
            }
        }
        Ok(total.sqrt())
    }

    fn eval_in(&self, e: usize, x: f64) -> f64 {
        let xi = (x - self.mesh.a) / self.mesh.h() - e as f64;
        self.mesh
            .basis
            .eval(&self.values[self.mesh.element_range(e)], xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composite_trapezoid_weights() {
        let m = Mesh1D::new(0.0, 2.0, 2, 1).unwrap();
        assert_eq!(m.nodes(), &[0.0, 1.0, 2.0]);
        assert_eq!(m.lumped_weights(), &[0.5, 1.0, 0.5]);
    }

    #[test]
    fn single_simpson_element() {
        let m = Mesh1D::new(0.0, 2.0, 1, 2).unwrap();
        assert_eq!(m.nodes(), &[0.0, 1.0, 2.0]);
        for (w, e) in m
            .lumped_weights()
            .iter()
            .zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0])
        {
            assert_relative_eq!(*w, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn node_placement_and_weight_sum() {
        for r in 1..=4 {
            for m in [1, 3, 10, 37] {
                let mesh = Mesh1D::new(-1.0, 2.5, m, r).unwrap();
                let rule = gauss_lobatto_rule(r).unwrap();
                let h = mesh.h();
                for e in 0..m {
                    for j in 0..=r {
                        let expect = -1.0 + e as f64 * h + h * rule.nodes[j];
                        assert_relative_eq!(mesh.nodes()[e * r + j], expect, epsilon = 1e-13);
                    }
                }
                assert!(mesh.lumped_weights().iter().all(|&w| w > 0.0));
                let total: f64 = mesh.lumped_weights().iter().sum();
                assert_relative_eq!(total, 3.5, max_relative = 1e-12);
                // boundary nodes carry one endpoint weight, interfaces two
                assert_relative_eq!(
                    mesh.lumped_weights()[0],
                    rule.weights[0] * h,
                    epsilon = 1e-15
                );
                if m > 1 {
                    assert_relative_eq!(
                        mesh.lumped_weights()[r],
                        2.0 * rule.weights[0] * h,
                        epsilon = 1e-15
                    );
                }
            }
        }
    }

    #[test]
    fn invalid_meshes() {
        assert!(Mesh1D::new(1.0, 1.0, 4, 1).is_err());
        assert!(Mesh1D::new(0.0, 1.0, 0, 1).is_err());
        assert!(matches!(
            Mesh1D::new(0.0, 1.0, 2, 12),
            Err(Error::UnsupportedDegree(12))
        ));
    }

    #[test]
    fn inner_product_examples() {
        for r in 1..=3 {
            let mesh = Mesh1D::new(0.0, 2.0, 5, r).unwrap();
            let one = NodalField::constant(mesh.clone(), 1.0);
            let x = NodalField::interpolate(mesh.clone(), |x| x).unwrap();
            assert_relative_eq!(one.inner(&one).unwrap(), 2.0, epsilon = 1e-14);
            assert_relative_eq!(x.inner(&one).unwrap(), 2.0, epsilon = 1e-14);
        }
        let mesh = Mesh1D::new(0.0, 2.0, 2, 1).unwrap();
        let f = NodalField::new(mesh, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(f.inner(&f).unwrap(), 1.0);
    }

    #[test]
    fn inner_product_rejects_mesh_mismatch() {
        let a = NodalField::constant(Mesh1D::new(0.0, 2.0, 4, 1).unwrap(), 1.0);
        let b = NodalField::constant(Mesh1D::new(0.0, 2.0, 2, 2).unwrap(), 1.0);
        assert!(matches!(a.inner(&b), Err(Error::MeshMismatch)));
    }

    #[test]
    fn quadrature_exact_for_low_degree_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for r in 1..=3 {
            let mesh = Mesh1D::new(0.0, 2.0, 4, r).unwrap();
            for _ in 0..20 {
                // deg p + deg q <= 2r - 1
                let dp = rng.gen_range(0..=r);
                let dq = 2 * r - 1 - dp;
                let pc: Vec<f64> = (0..=dp).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let qc: Vec<f64> = (0..=dq).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let poly = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, a| acc * x + a);
                let p = NodalField::interpolate(mesh.clone(), |x| poly(&pc, x)).unwrap();
                let q = NodalField::interpolate(mesh.clone(), |x| poly(&qc, x)).unwrap();
                // exact integral of the product over [0, 2]
                let mut prod = vec![0.0; dp + dq + 1];
                for (i, a) in pc.iter().enumerate() {
                    for (j, b) in qc.iter().enumerate() {
                        prod[i + j] += a * b;
                    }
                }
                let exact: f64 = prod
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * 2f64.powi(k as i32 + 1) / (k as f64 + 1.0))
                    .sum();
                let got = p.inner(&q).unwrap();
                assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "r={r}");
            }
        }
    }

    #[test]
    fn stiffness_linear_elements() {
        let mesh = Mesh1D::new(0.0, 1.0, 5, 1).unwrap();
        let h = mesh.h();
        let k = mesh.stiffness_matrix();
        assert_relative_eq!(k[(2, 1)], -1.0 / h, epsilon = 1e-12);
        assert_relative_eq!(k[(2, 2)], 2.0 / h, epsilon = 1e-12);
        assert_relative_eq!(k[(2, 3)], -1.0 / h, epsilon = 1e-12);
        assert_eq!(k[(2, 4)], 0.0);

        let mut hat = vec![0.0; mesh.num_nodes()];
        hat[2] = 1.0;
        assert_relative_eq!(mesh.stiffness_quad_form(&hat), 2.0 / h, epsilon = 1e-12);
    }

    #[test]
    fn stiffness_symmetric_with_constant_nullspace() {
        for r in 1..=4 {
            let mesh = Mesh1D::new(0.0, 2.0, 6, r).unwrap();
            let k = mesh.stiffness_matrix();
            assert!((&k - k.transpose()).amax() <= 1e-14);
            let ones = vec![1.0; mesh.num_nodes()];
            assert!(mesh.apply_stiffness(&ones).iter().all(|&v| v == 0.0));
            assert_eq!(mesh.stiffness_quad_form(&ones), 0.0);
            // quad form agrees with the dense matrix and with exact gradients
            let v = NodalField::interpolate(mesh.clone(), |x| x * x).unwrap();
            let dense = k.clone() * nalgebra::DVector::from_column_slice(v.values());
            let kv = mesh.apply_stiffness(v.values());
            for (a, b) in dense.iter().zip(&kv) {
                assert!((a - b).abs() < 1e-10);
            }
            if r >= 2 {
                // x^2 is represented exactly: int_0^2 (2x)^2 dx = 32/3
                assert_relative_eq!(
                    mesh.stiffness_quad_form(v.values()),
                    32.0 / 3.0,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn l2_error_examples() {
        let mesh = Mesh1D::new(0.0, 2.0, 8, 2).unwrap();
        let u = NodalField::interpolate(mesh.clone(), |x| x.sin()).unwrap();
        assert_eq!(u.l2_error(&u).unwrap(), 0.0);
        let one = NodalField::constant(mesh.clone(), 1.0);
        let zero = NodalField::constant(mesh, 0.0);
        assert_relative_eq!(one.l2_error(&zero).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn interpolation_error_is_second_order_for_linear_elements() {
        let exact = |x: f64| (std::f64::consts::PI * x / 2.0).sin();
        let errs: Vec<f64> = [20, 40, 80]
            .iter()
            .map(|&m| {
                let mesh = Mesh1D::new(0.0, 2.0, m, 1).unwrap();
                NodalField::interpolate(mesh, exact)
                    .unwrap()
                    .l2_error_fn(exact)
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 2.0).abs() < 0.05, "rate {rate}");
        }
    }

    #[test]
    fn interpolate_rejects_non_finite() {
        let mesh = Mesh1D::new(0.0, 1.0, 2, 1).unwrap();
        assert!(matches!(
            NodalField::interpolate(mesh, |x| 1.0 / (x - 0.5)),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn point_evaluation_reproduces_element_polynomials() {
        let mesh = Mesh1D::new(0.0, 2.0, 3, 3).unwrap();
        let p = |x: f64| 2.0 - x + 0.5 * x.powi(3);
        let u = NodalField::interpolate(mesh.clone(), p).unwrap();
        for &x in &[0.0, 0.3, 0.6666, 1.0, 1.99, 2.0] {
            assert_relative_eq!(u.eval(x), p(x), epsilon = 1e-12);
        }
        let fine = Mesh1D::new(0.0, 2.0, 6, 3).unwrap();
        let t = u.transfer_to(fine).unwrap();
        // nested nodes are reproduced exactly
        assert_eq!(t.values()[0], u.values()[0]);
        assert_eq!(t.values()[6], u.values()[3]);
    }

    #[test]
    fn distance_over_non_nested_partitions() {
        // a kinked hat on 3 elements against a cubic on 5: compare with a
        // brute-force midpoint sum
        let a = Mesh1D::new(0.0, 2.0, 3, 1).unwrap();
        let b = Mesh1D::new(0.0, 2.0, 5, 3).unwrap();
        let u = NodalField::interpolate(a, |x| (1.0 - (x - 1.0).abs()).max(0.0) + 0.2 * x).unwrap();
        let v = NodalField::interpolate(b, |x| x * x * (2.0 - x)).unwrap();
        let d = u.l2_distance(&v).unwrap();
        let n = 200_000;
        let brute: f64 = (0..n)
            .map(|i| {
                let x = 2.0 * (i as f64 + 0.5) / n as f64;
                let e = u.eval(x) - v.eval(x);
                e * e * 2.0 / n as f64
            })
            .sum::<f64>()
            .sqrt();
        assert!((d - brute).abs() < 1e-8, "{d} vs {brute}");
        assert_eq!(u.l2_distance(&u).unwrap(), 0.0);
        let w = NodalField::constant(Mesh1D::new(0.0, 3.0, 3, 1).unwrap(), 0.0);
        assert!(u.l2_distance(&w).is_err());
    }
}
