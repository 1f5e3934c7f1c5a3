//! Energies, bound checks and convergence-rate tables.

use crate::error::{Error, Result};
use crate::mesh::NodalField;
use crate::problem::Reaction;
use crate::spectral::SpectralOperator;

/// `1/2 ||d/dx u_h||^2`, from the exact stiffness form.
pub fn gradient_energy(u: &NodalField) -> f64 {
    0.5 * u.mesh().stiffness_quad_form(u.values())
}

/// `(F(u), 1)_h`.
pub fn potential_energy(u: &NodalField, reaction: &Reaction) -> f64 {
    u.values()
        .iter()
        .zip(u.mesh().lumped_weights())
        .map(|(&v, w)| w * reaction.potential(v))
        .sum()
}

/// `E(u) = 1/2 u^T K u + (F(u), 1)_h`.
pub fn free_energy(u: &NodalField, reaction: &Reaction) -> f64 {
    gradient_energy(u) + potential_energy(u, reaction)
}

/// Modified energy `1/2 ||d/dx u_h||^2 + z^2` of the auxiliary-variable
/// formulation.
pub fn sav_energy(u: &NodalField, z: f64) -> f64 {
    gradient_energy(u) + z * z
}

/// Largest single-step increase of a series (0 for a nonincreasing one).
pub fn max_increase(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub n: usize,
    pub free_energy: f64,
    pub sav_energy: Option<f64>,
    /// increase over the previous report, clipped at zero
    pub violation: f64,
}

/// Builds per-step reports from a state sequence; `z` is supplied for
/// auxiliary-variable runs, in which case monotonicity is tracked on the
/// modified energy.
pub fn energy_reports(
    states: &[NodalField],
    z: Option<&[f64]>,
    reaction: &Reaction,
) -> Vec<EnergyReport> {
    let mut out: Vec<EnergyReport> = Vec::with_capacity(states.len());
    for (n, u) in states.iter().enumerate() {
        let free = free_energy(u, reaction);
        let sav = z.map(|z| sav_energy(u, z[n]));
        let tracked = sav.unwrap_or(free);
        let violation = out
            .last()
            .map(|prev| {
                let p = prev.sav_energy.unwrap_or(prev.free_energy);
                (tracked - p).max(0.0)
            })
            .unwrap_or(0.0);
        out.push(EnergyReport {
            n,
            free_energy: free,
            sav_energy: sav,
            violation,
        });
    }
    out
}

/// Whether every nodal value lies in `[-alpha, alpha]`.
pub fn within_bound(u: &NodalField, alpha: f64) -> bool {
    u.values().iter().all(|v| v.abs() <= alpha)
}

/// `sup_phi |(Pi_h Lap v - Lap_h Pi_h v, phi)_h| / ||phi||_{H^1}` for smooth
/// `v` with second derivative `v_xx`.
pub fn consistency_defect(
    op: &SpectralOperator,
    v: impl Fn(f64) -> f64,
    v_xx: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mesh = op.mesh();
    let pv = NodalField::interpolate(mesh.clone(), v)?;
    let pl = NodalField::interpolate(mesh.clone(), v_xx)?;
    let lap = mesh.apply_laplacian(pv.values());
    let g: Vec<f64> = pl.values().iter().zip(&lap).map(|(a, b)| a - b).collect();
    Ok(op.dual_h1_norm(&g))
}

/// Rows of a refinement study with consecutive observed rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub resolutions: Vec<usize>,
    pub errors: Vec<f64>,
    /// `rates[i]` compares rows `i` and `i + 1`
    pub rates: Vec<f64>,
}

impl RateTable {
    /// Rate of the finest pair.
    pub fn headline(&self) -> f64 {
        *self.rates.last().expect("at least two rows")
    }

    /// Mean of the last `pairs` rates.
    pub fn finest_mean(&self, pairs: usize) -> f64 {
        let tail = &self.rates[self.rates.len().saturating_sub(pairs)..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    pub fn to_csv(&self, axis_label: &str) -> String {
        let mut out = format!("{axis_label},error,rate\n");
        for (i, (n, e)) in self.resolutions.iter().zip(&self.errors).enumerate() {
            let rate = if i == 0 {
                String::new()
            } else {
                format!("{:.4}", self.rates[i - 1])
            };
            out.push_str(&format!("{n},{e:.6e},{rate}\n"));
        }
        out
    }
}

/// Observed rates `log(e_coarse / e_fine) / log(n_fine / n_coarse)`; for the
/// usual factor-two refinement this is `log2(e_coarse / e_fine)`.
pub fn error_table(rows: &[(usize, f64)]) -> Result<RateTable> {
    if rows.len() < 2 {
        return Err(Error::ErrorTable(format!(
            "need at least two rows, got {}",
            rows.len()
        )));
    }
    for &(n, e) in rows {
        if e <= 0.0 || !e.is_finite() {
            return Err(Error::ErrorTable(format!(
                "error {e} at resolution {n} is not positive"
            )));
        }
        if n == 0 {
            return Err(Error::ErrorTable("zero resolution".into()));
        }
    }
    let rates = rows
        .windows(2)
        .map(|w| {
            let ((n0, e0), (n1, e1)) = (w[0], w[1]);
            (e0 / e1).ln() / (n1 as f64 / n0 as f64).ln()
        })
        .collect();
    Ok(RateTable {
        resolutions: rows.iter().map(|r| r.0).collect(),
        errors: rows.iter().map(|r| r.1).collect(),
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh1D;
    use approx::assert_relative_eq;

    #[test]
    fn energy_examples() {
        let mesh = Mesh1D::new(0.0, 2.0, 20, 2).unwrap();
        let gl = Reaction::GinzburgLandau { eps: 0.1 };
        assert_eq!(
            free_energy(&NodalField::constant(mesh.clone(), 1.0), &gl),
            0.0
        );
        assert_relative_eq!(
            free_energy(&NodalField::constant(mesh.clone(), 0.0), &gl),
            50.0,
            epsilon = 1e-12
        );
        let z = 51f64.sqrt();
        assert_relative_eq!(
            sav_energy(&NodalField::constant(mesh.clone(), 0.0), z),
            51.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            sav_energy(&NodalField::constant(mesh.clone(), 0.3), 2.0),
            4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gradient_energy_of_linear_function() {
        let mesh = Mesh1D::new(0.0, 2.0, 5, 3).unwrap();
        let u = NodalField::interpolate(mesh, |x| 3.0 * x).unwrap();
        assert_relative_eq!(gradient_energy(&u), 0.5 * 9.0 * 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rate_examples() {
        let t = error_table(&[(10, 1e-2), (20, 2.5e-3)]).unwrap();
        assert_relative_eq!(t.headline(), 2.0, epsilon = 1e-12);

        let t = error_table(&[
            (10, 3.03e-2),
            (20, 7.42e-3),
            (40, 1.84e-3),
            (80, 4.60e-4),
            (160, 1.14e-4),
        ])
        .unwrap();
        for r in &t.rates {
            assert!((r - 2.0).abs() < 0.05, "{r}");
        }
        assert!((t.headline() - 2.0).abs() < 0.02);

        assert!(error_table(&[(10, 1.0)]).is_err());
        assert!(error_table(&[(10, 1.0), (20, 0.0)]).is_err());
        assert!(error_table(&[(10, -1.0), (20, 0.5)]).is_err());
    }

    #[test]
    fn increases_and_reports() {
        assert_eq!(max_increase(&[3.0, 2.0, 2.0, 1.0]), 0.0);
        assert_eq!(max_increase(&[3.0, 2.0, 2.5, 1.0]), 0.5);
        let mesh = Mesh1D::new(0.0, 2.0, 4, 1).unwrap();
        let gl = Reaction::GinzburgLandau { eps: 0.1 };
        let states = vec![NodalField::constant(mesh.clone(), 0.0); 3];
        let reps = energy_reports(&states, Some(&[2.0, 1.0, 1.5]), &gl);
        assert_eq!(reps[1].violation, 0.0);
        assert_relative_eq!(reps[2].violation, 1.25, epsilon = 1e-12);
    }

    #[test]
    fn csv_layout() {
        let t = error_table(&[(10, 1e-2), (20, 2.5e-3)]).unwrap();
        let csv = t.to_csv("nx");
        assert_eq!(
            csv,
            "nx,error,rate\n10,1.000000e-2,\n20,2.500000e-3,2.0000\n"
        );
    }
}
