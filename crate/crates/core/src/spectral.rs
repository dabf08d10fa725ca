//! λ sweeps, ESQPT diagnostics and the strength function of a quench.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{self, EigenSystem, ModelParams, StateCoefficients, TridiagonalHamiltonian};
use crate::io;

/// `λ_c = (ω − ω₀)/2`.
pub fn critical_coupling(omega: f64, omega0: f64) -> f64 {
    (omega - omega0) / 2.0
}

/// Scaled ESQPT energy ε_c = 1 of the critical subspace above λ_c.
pub fn esqpt_energy(params: &ModelParams) -> Result<f64> {
    if !params.is_critical_subspace() {
        return Err(Error::NoEsqpt(format!(
            "M = {} is not the critical subspace M = 2j = {}",
            params.m(),
            params.two_j()
        )));
    }
    let lc = critical_coupling(params.omega, params.omega0);
    if params.lambda <= lc {
        return Err(Error::NoEsqpt(format!("lambda = {} does not exceed lambda_c = {lc}", params.lambda)));
    }
    Ok(1.0)
}

/// Spectra and ⟨J_z⟩/j of every eigenstate across a λ/λ_c grid.
#[derive(Debug, Clone)]
pub struct SpectrumSweep {
    pub lambda_over_lc: Vec<f64>,
    /// `energies[i][k]`: scaled energy ε_k at grid point i, ascending in k.
    pub energies: Vec<Vec<f64>>,
    pub jz: Vec<Vec<f64>>,
}

pub fn sweep_spectrum(params: &ModelParams, lambda_over_lc: &[f64]) -> Result<SpectrumSweep> {
    if lambda_over_lc.is_empty() {
        return Err(Error::InvalidParams("empty lambda grid".into()));
    }
    let lc = critical_coupling(params.omega, params.omega0);
    if lc <= 0.0 && lambda_over_lc.iter().any(|&r| r != 0.0) {
        return Err(Error::InvalidParams("zero detuning: no critical coupling to scale by".into()));
    }
    let mut grid = lambda_over_lc.to_vec();
    grid.sort_by(f64::total_cmp);
    let basis = hilbert::build_basis(params);
    let j = params.j();
    let columns = grid
        .par_iter()
        .map(|&r| {
            let es = hilbert::diagonalize(&hilbert::build_hamiltonian(&params.with_lambda(r * lc)))?;
            let jz = (0..es.dim()).map(|k| hilbert::scaled_jz(&es.state(k), &basis, j)).collect();
            Ok((es.scaled_energies(), jz))
        })
        .collect::<Result<Vec<(Vec<f64>, Vec<f64>)>>>()?;
    let (energies, jz) = columns.into_iter().unzip();
    Ok(SpectrumSweep { lambda_over_lc: grid, energies, jz })
}

/// Lowest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence bisection.
pub fn lowest_eigenvalue(h: &TridiagonalHamiltonian) -> f64 {
    let d = h.dim();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..d {
        let r = if i > 0 { h.offdiag[i - 1].abs() } else { 0.0 } + if i + 1 < d { h.offdiag[i].abs() } else { 0.0 };
        lo = lo.min(h.diag[i] - r);
        hi = hi.max(h.diag[i] + r);
    }
    let pivot_floor = f64::EPSILON * (hi - lo).abs().max(1.0);
    // number of eigenvalues below x
    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..d {
            let b2 = if i > 0 { h.offdiag[i - 1].powi(2) } else { 0.0 };
            q = h.diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -pivot_floor;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Scaled ground-state energy ε_g.s.(λ) on a grid of raw λ values.
pub fn ground_energy_sweep(params: &ModelParams, lambdas: &[f64]) -> Vec<f64> {
    let scale = params.energy_scale();
    lambdas
        .par_iter()
        .map(|&l| lowest_eigenvalue(&hilbert::build_hamiltonian(&params.with_lambda(l))) / scale)
        .collect()
}

/// λ at which |d²ε_g.s./dλ²| (central differences) is largest.
pub fn ground_state_kink(lambdas: &[f64], energies: &[f64]) -> Option<f64> {
    (1..lambdas.len().saturating_sub(1))
        .map(|i| {
            let h1 = lambdas[i] - lambdas[i - 1];
            let h2 = lambdas[i + 1] - lambdas[i];
            let d2 =
                2.0 * (h1 * energies[i + 1] - (h1 + h2) * energies[i] + h2 * energies[i - 1]) / (h1 * h2 * (h1 + h2));
            (lambdas[i], d2.abs())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(l, _)| l)
}

/// Sharpest feature of ⟨J_z⟩/j against ε between adjacent eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JzFeature {
    /// Lower state of the adjacent pair.
    pub index: usize,
    /// Midpoint energy of the pair.
    pub epsilon: f64,
    /// |Δ⟨J_z⟩/Δε| across the pair.
    pub slope: f64,
    /// Local level spacing Δε across the pair.
    pub spacing: f64,
}

/// ESQPT locator: argmax of |Δ⟨J_z⟩/Δε| over adjacent pairs with midpoint in `window`.
pub fn jz_slope_feature(energies: &[f64], jz: &[f64], window: Option<(f64, f64)>) -> Option<JzFeature> {
    energies
        .windows(2)
        .zip(jz.windows(2))
        .enumerate()
        .filter_map(|(k, (e, z))| {
            let spacing = e[1] - e[0];
            let epsilon = 0.5 * (e[0] + e[1]);
            if spacing <= 0.0 {
                return None;
            }
            if let Some((lo, hi)) = window {
                if epsilon < lo || epsilon > hi {
                    return None;
                }
            }
            Some(JzFeature { index: k, epsilon, slope: ((z[1] - z[0]) / spacing).abs(), spacing })
        })
        .max_by(|a, b| a.slope.total_cmp(&b.slope))
}

/// Distribution of the initial state over final eigenstates.
#[derive(Debug, Clone)]
pub struct StrengthFunction {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    pub energy_scale: f64,
}

pub fn strength_function(psi_i: &StateCoefficients, es_f: &EigenSystem) -> Result<StrengthFunction> {
    if psi_i.dim() != es_f.dim() {
        return Err(Error::DimensionMismatch { expected: es_f.dim(), got: psi_i.dim() });
    }
    let weights = (0..es_f.dim())
        .map(|k| {
            let v = es_f.vectors.column(k);
            let overlap: num_complex::Complex64 = v.iter().zip(&psi_i.amplitudes).map(|(&a, c)| c * a).sum();
            overlap.norm_sqr()
        })
        .collect();
    Ok(StrengthFunction { energies: es_f.energies.clone(), weights, energy_scale: es_f.params.energy_scale() })
}

impl StrengthFunction {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn mean_energy(&self) -> f64 {
        self.weights.iter().zip(&self.energies).map(|(w, e)| w * e).sum::<f64>() / self.total_weight()
    }

    pub fn energy_std(&self) -> f64 {
        let mean = self.mean_energy();
        let var = self.weights.iter().zip(&self.energies).map(|(w, e)| w * (e - mean).powi(2)).sum::<f64>()
            / self.total_weight();
        var.max(0.0).sqrt()
    }

    pub fn scaled_energies(&self) -> Vec<f64> {
        self.energies.iter().map(|e| e / self.energy_scale).collect()
    }

    /// Weight carried by states with scaled energy below `epsilon`.
    pub fn weight_below(&self, epsilon: f64) -> f64 {
        self.weights.iter().zip(&self.energies).filter(|(_, &e)| e / self.energy_scale < epsilon).map(|(w, _)| w).sum()
    }
}

pub fn write_spectrum_csv<W: Write>(w: W, sweep: &SpectrumSweep) -> Result<()> {
    let mut rows = Vec::new();
    for (i, &r) in sweep.lambda_over_lc.iter().enumerate() {
        for (k, (&e, &z)) in sweep.energies[i].iter().zip(&sweep.jz[i]).enumerate() {
            rows.push(vec![r, k as f64, e, z]);
        }
    }
    io::write_csv(w, &["lambda_over_lambda_c", "k", "epsilon_k", "jz_over_j_k"], &rows)
}

pub fn write_strength_csv<W: Write>(w: W, sf: &StrengthFunction) -> Result<()> {
    let rows: Vec<Vec<f64>> = sf.scaled_energies().into_iter().zip(&sf.weights).map(|(e, &w)| vec![e, w]).collect();
    io::write_csv(w, &["epsilon_k", "weight_k"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn critical_couplings() {
        assert_eq!(critical_coupling(2.0, 1.0), 0.5);
        assert_eq!(critical_coupling(1.0, 1.0), 0.0);
        assert_eq!(critical_coupling(3.0, 1.0), 1.0);
    }

    #[test]
    fn esqpt_energy_requires_critical_subspace() {
        let p = ModelParams::new(200.0, 2.0, 1.0, 400, 2.5).unwrap();
        assert_eq!(esqpt_energy(&p).unwrap(), 1.0);
        let q = ModelParams::new(200.0, 2.0, 1.0, 300, 2.5).unwrap();
        assert!(matches!(esqpt_energy(&q), Err(Error::NoEsqpt(_))));
        assert!(esqpt_energy(&p.with_lambda(0.4)).is_err());
    }

    #[test]
    fn single_point_decoupled_sweep() {
        let p = ModelParams::new(3.0, 2.0, 1.0, 6, 0.0).unwrap();
        let s = sweep_spectrum(&p, &[0.0]).unwrap();
        let mut expected: Vec<f64> = (0..=6).map(|n| (2.0 * n as f64 + (6.0 - n as f64 - 3.0)) / 3.0).collect();
        expected.sort_by(f64::total_cmp);
        for (e, x) in s.energies[0].iter().zip(&expected) {
            assert_relative_eq!(e, x, epsilon = 1e-13);
        }
    }

    #[test]
    fn bisection_matches_dense_ground_energy() {
        for &(j, m, l) in &[(0.5, 1, 0.75), (20.0, 40, 2.5), (200.0, 400, 0.7), (200.0, 300, 2.5)] {
            let h = hilbert::build_hamiltonian(&ModelParams::new(j, 2.0, 1.0, m, l).unwrap());
            let dense = hilbert::eigenvalues(&h).unwrap()[0];
            assert!((lowest_eigenvalue(&h) - dense).abs() <= 1e-11 * h.norm(), "{j} {m} {l}");
        }
    }

    #[test]
    fn identity_quench_strength() {
        let p = ModelParams::new(10.0, 2.0, 1.0, 20, 1.0).unwrap();
        let es = hilbert::diagonalize(&hilbert::build_hamiltonian(&p)).unwrap();
        let sf = strength_function(&hilbert::ground_state(&es), &es).unwrap();
        assert_relative_eq!(sf.weights[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(sf.total_weight(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn strength_mean_is_energy_expectation() {
        let pi = ModelParams::new(10.0, 2.0, 1.0, 15, 0.0).unwrap();
        let pf = pi.with_lambda(2.5);
        let hi = hilbert::build_hamiltonian(&pi);
        let hf = hilbert::build_hamiltonian(&pf);
        let psi = hilbert::ground_state(&hilbert::diagonalize(&hi).unwrap());
        let sf = strength_function(&psi, &hilbert::diagonalize(&hf).unwrap()).unwrap();
        let direct = hf.expectation(&psi);
        assert!((sf.mean_energy() - direct).abs() <= 1e-10 * direct.abs());
        assert!((sf.total_weight() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let p = ModelParams::new(2.0, 2.0, 1.0, 3, 1.0).unwrap();
        let es = hilbert::diagonalize(&hilbert::build_hamiltonian(&p)).unwrap();
        let psi = StateCoefficients::basis_state(3, 0);
        assert!(matches!(strength_function(&psi, &es), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn spectrum_csv_columns() {
        let p = ModelParams::new(1.0, 2.0, 1.0, 2, 0.0).unwrap();
        let s = sweep_spectrum(&p, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s).unwrap();
        let (h, rows) = io::read_csv(&buf[..]).unwrap();
        assert_eq!(h, vec!["lambda_over_lambda_c", "k", "epsilon_k", "jz_over_j_k"]);
        assert_eq!(rows.len(), 6);
    }
}
