//! Exact post-quench evolution in the eigenbasis of the final Hamiltonian.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{EigenSystem, StateCoefficients};
use crate::io;
use crate::phase_space::{husimi_transform, wigner_transform, PhaseField, PhaseGrid};
use crate::spectral::StrengthFunction;

/// P_qm(τ) = |Σ_k w_k e^{−i E_k τ/(ω₀ j)}|² on each τ.
pub fn quantum_survival(strength: &StrengthFunction, taus: &[f64]) -> Vec<f64> {
    let s = strength.energy_scale;
    taus.par_iter()
        .map(|&tau| {
            let amp: Complex64 = strength
                .weights
                .iter()
                .zip(&strength.energies)
                .map(|(&w, &e)| w * Complex64::from_polar(1.0, -e * tau / s))
                .sum();
            amp.norm_sqr()
        })
        .collect()
}

/// Initial state expanded in the final eigenbasis, reusable across times.
pub struct Propagator<'a> {
    es: &'a EigenSystem,
    /// ⟨E_k|ψ_i⟩.
    overlaps: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(psi_i: &StateCoefficients, es: &'a EigenSystem) -> Result<Self> {
        if psi_i.dim() != es.dim() {
            return Err(Error::DimensionMismatch { expected: es.dim(), got: psi_i.dim() });
        }
        let overlaps = (0..es.dim())
            .map(|k| es.vectors.column(k).iter().zip(&psi_i.amplitudes).map(|(&v, c)| c * v).sum())
            .collect();
        Ok(Self { es, overlaps })
    }

    /// c_n(τ) = Σ_k ⟨n|E_k⟩⟨E_k|ψ_i⟩ e^{−i E_k τ/(ω₀ j)}.
    pub fn at(&self, tau: f64) -> StateCoefficients {
        let s = self.es.params.energy_scale();
        let phased: Vec<Complex64> = self
            .overlaps
            .iter()
            .zip(&self.es.energies)
            .map(|(a, &e)| a * Complex64::from_polar(1.0, -e * tau / s))
            .collect();
        let d = self.es.dim();
        let amplitudes = (0..d).map(|n| (0..d).map(|k| phased[k] * self.es.vectors[(n, k)]).sum()).collect();
        StateCoefficients { amplitudes, tau }
    }
}

pub fn evolve_coefficients(psi_i: &StateCoefficients, es_f: &EigenSystem, tau: f64) -> Result<StateCoefficients> {
    Ok(Propagator::new(psi_i, es_f)?.at(tau))
}

pub fn evolved_wigner(psi_i: &StateCoefficients, es_f: &EigenSystem, tau: f64, grid: &PhaseGrid) -> Result<PhaseField> {
    wigner_transform(&evolve_coefficients(psi_i, es_f, tau)?, grid)
}

pub fn evolved_husimi(psi_i: &StateCoefficients, es_f: &EigenSystem, tau: f64, grid: &PhaseGrid) -> Result<PhaseField> {
    husimi_transform(&evolved_wigner(psi_i, es_f, tau, grid)?, grid)
}

/// Uniform grid of `samples` times on [0, tau_max].
pub fn tau_grid(tau_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| tau_max * i as f64 / (n - 1) as f64).collect(),
    }
}

pub fn write_survival_csv<W: Write>(w: W, taus: &[f64], p_qm: &[f64]) -> Result<()> {
    let rows: Vec<Vec<f64>> = taus.iter().zip(p_qm).map(|(&t, &p)| vec![t, p]).collect();
    io::write_csv(w, &["tau", "p_qm"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_hamiltonian, diagonalize, ground_state, ModelParams};
    use crate::spectral::strength_function;

    fn setup(j: f64, m: i64, li: f64, lf: f64) -> (StateCoefficients, EigenSystem) {
        let p = ModelParams::new(j, 2.0, 1.0, m, li).unwrap();
        let psi = ground_state(&diagonalize(&build_hamiltonian(&p)).unwrap());
        (psi, diagonalize(&build_hamiltonian(&p.with_lambda(lf))).unwrap())
    }

    #[test]
    fn identity_quench_survives() {
        let (psi, es) = setup(10.0, 20, 2.5, 2.5);
        let sf = strength_function(&psi, &es).unwrap();
        for p in quantum_survival(&sf, &tau_grid(500.0, 50)) {
            assert!((p - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn routes_agree_and_norm_is_kept() {
        let (psi, es) = setup(10.0, 15, 0.0, 2.5);
        let sf = strength_function(&psi, &es).unwrap();
        let prop = Propagator::new(&psi, &es).unwrap();
        let h = build_hamiltonian(&es.params);
        let e0 = h.expectation(&psi);
        let taus: Vec<f64> = (0..20).map(|i| 3.7 * i as f64 * i as f64).collect();
        let p = quantum_survival(&sf, &taus);
        for (&tau, &pq) in taus.iter().zip(&p) {
            let c = prop.at(tau);
            assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((psi.inner(&c).norm_sqr() - pq).abs() < 1e-10);
            assert!((h.expectation(&c) - e0).abs() < 1e-10 * e0.abs());
        }
        assert!((p[0] - 1.0).abs() < 1e-12);
        let c0 = prop.at(0.0);
        for (a, b) in c0.amplitudes.iter().zip(&psi.amplitudes) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenstate_picks_up_a_phase() {
        let (_, es) = setup(6.0, 8, 1.0, 1.0);
        let psi = es.state(3);
        let c = evolve_coefficients(&psi, &es, 42.0).unwrap();
        for (a, b) in c.amplitudes.iter().zip(&psi.amplitudes) {
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn wigner_overlap_matches_survival() {
        let (psi, es) = setup(10.0, 15, 0.0, 2.5);
        let sf = strength_function(&psi, &es).unwrap();
        let grid = PhaseGrid::new(-9.0, 9.0, 181, -9.0, 9.0, 181).unwrap();
        let w0 = wigner_transform(&psi, &grid).unwrap();
        for &tau in &[0.0, 3.0, 17.0] {
            let wt = evolved_wigner(&psi, &es, tau, &grid).unwrap();
            let p = quantum_survival(&sf, &[tau])[0];
            assert!((w0.overlap(&wt).unwrap() - p).abs() < 1e-3);
            let q = husimi_transform(&wt, &grid).unwrap();
            assert!(q.min() >= -1e-10);
            assert!((q.integral() - 1.0).abs() < 1e-4);
        }
    }
}
