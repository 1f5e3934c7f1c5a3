//! Reference-interval quadrature rules and nodal Lagrange bases on `[0, 1]`.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 8;

/// Value and derivative of the Legendre polynomial `P_n` at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    // P'_n from the three-term identity; only used away from x = +-1.
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The `(r+1)`-point Gauss-Lobatto rule mapped to the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLobattoRule {
    pub r: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Builds the Gauss-Lobatto rule with `r + 1` points on `[0, 1]`.
///
/// Interior points are the roots of `P'_r`, found by Newton iteration from
/// Chebyshev-Lobatto guesses; weights are `2 / (r (r+1) P_r(x)^2)` on
/// `[-1, 1]`, halved for the unit interval.
pub fn gauss_lobatto_rule(r: usize) -> Result<GaussLobattoRule> {
    if !(1..=MAX_DEGREE).contains(&r) {
        return Err(Error::UnsupportedDegree(r));
    }
    let n = r + 1;
    let rf = r as f64;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[r] = 1.0;
    for (j, xj) in x.iter_mut().enumerate().take(r).skip(1) {
        let mut t = -(std::f64::consts::PI * j as f64 / rf).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(r, t);
            // (1 - t^2) P'' = 2 t P' - r (r+1) P
            let d2p = (2.0 * t * dp - rf * (rf + 1.0) * p) / (1.0 - t * t);
            let step = dp / d2p;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        *xj = t;
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for j in 0..n {
        let (p, _) = legendre(r, x[j]);
        nodes[j] = 0.5 * (1.0 + x[j]);
        weights[j] = 1.0 / (rf * (rf + 1.0) * p * p);
    }
    // Mirror the left half so the rule is exactly symmetric.
    for j in 0..n / 2 {
        let i = r - j;
        nodes[i] = 1.0 - nodes[j];
        weights[i] = weights[j];
    }
    if r.is_multiple_of(2) {
        nodes[r / 2] = 0.5;
    }
    nodes[0] = 0.0;
    nodes[r] = 1.0;
    Ok(GaussLobattoRule { r, nodes, weights })
}

/// Gauss-Legendre rule with `n` points on `[0, 1]`; exact to degree `2n - 1`.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let step = p / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        // ascending order on [0, 1]
        nodes[n - 1 - i] = 0.5 * (1.0 + t);
        weights[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (nodes, weights)
}

/// Lagrange basis through a fixed node set, evaluated by the barycentric
/// formula.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
    /// `diff[i][j] = l_j'(x_i)`
    diff: Vec<Vec<f64>>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[f64]) -> Self {
        let n = nodes.len();
        let bary: Vec<f64> = (0..n)
            .map(|j| {
                let prod: f64 = (0..n)
                    .filter(|&k| k != j)
                    .map(|k| nodes[j] - nodes[k])
                    .product();
                1.0 / prod
            })
            .collect();
        let mut diff = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut diag = 0.0;
            for j in 0..n {
                if i != j {
                    let d = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                    diff[i][j] = d;
                    diag -= d;
                }
            }
            diff[i][i] = diag;
        }
        Self {
            nodes: nodes.to_vec(),
            bary,
            diff,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// All basis values `l_j(x)`.
    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            out[j] = 1.0;
            return out;
        }
        let mut denom = 0.0;
        for ((o, &b), &xj) in out.iter_mut().zip(&self.bary).zip(&self.nodes) {
            *o = b / (x - xj);
            denom += *o;
        }
        for v in &mut out {
            *v /= denom;
        }
        out
    }

    /// All basis derivatives `l_j'(x)`.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let vals = self.values(x);
        let n = self.nodes.len();
        (0..n)
            .map(|j| (0..n).map(|i| vals[i] * self.diff[i][j]).sum())
            .collect()
    }

    /// Evaluates the interpolant with nodal values `coeffs` at `x`.
    pub fn eval(&self, coeffs: &[f64], x: f64) -> f64 {
        self.values(x).iter().zip(coeffs).map(|(l, c)| l * c).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_rules() {
        let r1 = gauss_lobatto_rule(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0, 1.0]);
        assert_relative_eq!(r1.weights[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(r1.weights[1], 0.5, epsilon = 1e-15);

        let r2 = gauss_lobatto_rule(2).unwrap();
        assert_eq!(r2.nodes, vec![0.0, 0.5, 1.0]);
        for (w, e) in r2.weights.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert_relative_eq!(*w, e, epsilon = 1e-15);
        }
    }

    /// Brute-force moment solve: with the symmetric interior pair
    /// `(1 -+ s)/2` and symmetric weights `(w0, w1, w1, w0)`, exactness on
    /// `1, x^2, x^4` fixes everything. Solved by bisection on `s` so that the
    /// check does not reuse the Newton/Legendre path.
    fn brute_force_r3() -> ([f64; 4], [f64; 4]) {
        // residual of the x^4 moment after fitting w0, w1 to degrees 0 and 2
        let moments = |s: f64| {
            let xi = 0.5 * (1.0 - s);
            let xj = 0.5 * (1.0 + s);
            // unknown w0 (endpoints), w1 (interior): 2w0 + 2w1 = 1
            // w0*(0 + 1) + w1*(xi^2 + xj^2) = 1/3
            let q2 = xi * xi + xj * xj;
            let w1 = (1.0 / 3.0 - 0.5) / (q2 - 1.0);
            let w0 = 0.5 - w1;
            let r4 = w0 + w1 * (xi.powi(4) + xj.powi(4)) - 0.2;
            (r4, w0, w1)
        };
        let (mut lo, mut hi) = (0.1, 0.9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moments(lo).0.signum() == moments(mid).0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        let (_, w0, w1) = moments(s);
        (
            [0.0, 0.5 * (1.0 - s), 0.5 * (1.0 + s), 1.0],
            [w0, w1, w1, w0],
        )
    }

    #[test]
    fn r3_matches_brute_force_moments() {
        let (bn, bw) = brute_force_r3();
        // frozen from the brute-force solve: s = 1/sqrt(5), weights 1/12, 5/12
        assert_relative_eq!(bn[1], 0.5 * (1.0 - 1.0 / 5f64.sqrt()), epsilon = 1e-12);
        assert_relative_eq!(bw[0], 1.0 / 12.0, epsilon = 1e-12);
        assert_relative_eq!(bw[1], 5.0 / 12.0, epsilon = 1e-12);

        let rule = gauss_lobatto_rule(3).unwrap();
        for j in 0..4 {
            assert_relative_eq!(rule.nodes[j], bn[j], epsilon = 1e-12);
            assert_relative_eq!(rule.weights[j], bw[j], epsilon = 1e-12);
        }
    }

    #[test]
    fn lobatto_invariants_all_degrees() {
        for r in 1..=MAX_DEGREE {
            let rule = gauss_lobatto_rule(r).unwrap();
            assert_eq!(rule.nodes.len(), r + 1);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert_relative_eq!(rule.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            for j in 0..r {
                assert!(rule.nodes[j] < rule.nodes[j + 1]);
            }
            for j in 0..=r {
                assert!((rule.nodes[j] - (1.0 - rule.nodes[r - j])).abs() < 1e-15);
                assert!((rule.weights[j] - rule.weights[r - j]).abs() < 1e-15);
            }
            for q in 0..=(2 * r - 1) {
                let approx: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(q as i32))
                    .sum();
                let exact = 1.0 / (q as f64 + 1.0);
                assert_relative_eq!(approx, exact, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn unsupported_degrees_rejected() {
        assert!(matches!(
            gauss_lobatto_rule(0),
            Err(Error::UnsupportedDegree(0))
        ));
        assert!(matches!(
            gauss_lobatto_rule(9),
            Err(Error::UnsupportedDegree(9))
        ));
    }

    #[test]
    fn legendre_rule_exactness() {
        for n in 1..=10 {
            let (x, w) = gauss_legendre_rule(n);
            for q in 0..(2 * n) {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(q as i32)).sum();
                assert_relative_eq!(s, 1.0 / (q as f64 + 1.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn lagrange_basis_reproduces_polynomials() {
        let rule = gauss_lobatto_rule(4).unwrap();
        let basis = LagrangeBasis::new(&rule.nodes);
        let p = |x: f64| 1.0 - 2.0 * x + 3.0 * x.powi(3) - x.powi(4);
        let dp = |x: f64| -2.0 + 9.0 * x * x - 4.0 * x.powi(3);
        let c: Vec<f64> = rule.nodes.iter().map(|&x| p(x)).collect();
        for &x in &[0.0, 0.13, 0.5, 0.77, 1.0] {
            assert_relative_eq!(basis.eval(&c, x), p(x), epsilon = 1e-13);
            let d: f64 = basis
                .derivatives(x)
                .iter()
                .zip(&c)
                .map(|(l, c)| l * c)
                .sum();
            assert_relative_eq!(d, dp(x), epsilon = 1e-11);
        }
    }
}
