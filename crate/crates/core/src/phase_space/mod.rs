//! Phase-space representations: Wigner and Husimi transforms of subspace
//! states, and the classical Hamiltonian whose domain is the disk x² + p² ≤ 2M.

pub mod classical;
pub mod fock;
pub mod grid;
pub mod husimi;
pub mod wigner;

pub use classical::{classical_hamiltonian, quasipotential, ClassicalHamiltonian};
pub use fock::fock_wavefunction;
pub use grid::{FieldKind, PhaseField, PhaseGrid};
pub use husimi::{husimi_of_state, husimi_transform};
pub use wigner::{wigner_transform, wigner_values};

/// Negative-mass fraction above which a Gaussian description is flagged unreliable.
pub const NEGATIVE_MASS_LIMIT: f64 = 0.01;

/// Centroid and widths of a (mostly positive) phase-space distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSummary {
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    /// ∫|min(W,0)| relative to ∫W.
    pub negative_fraction: f64,
}

impl GaussianSummary {
    pub fn is_reliable(&self) -> bool {
        self.negative_fraction <= NEGATIVE_MASS_LIMIT
    }
}

/// First and second moments by Riemann sums, normalized by the field's own mass.
pub fn gaussian_moments(field: &PhaseField) -> GaussianSummary {
    let g = &field.grid;
    let (mut m0, mut mx, mut mp, mut neg) = (0.0, 0.0, 0.0, 0.0);
    for ix in 0..g.nx {
        let x = g.x(ix);
        for (ip, &w) in field.row(ix).iter().enumerate() {
            m0 += w;
            mx += w * x;
            mp += w * g.p(ip);
            neg += (-w).max(0.0);
        }
    }
    let (x0, p0) = (mx / m0, mp / m0);
    let (mut vx, mut vp) = (0.0, 0.0);
    for ix in 0..g.nx {
        let dx = g.x(ix) - x0;
        for (ip, &w) in field.row(ix).iter().enumerate() {
            let dp = g.p(ip) - p0;
            vx += w * dx * dx;
            vp += w * dp * dp;
        }
    }
    GaussianSummary { x0, p0, sigma_x: (vx / m0).sqrt(), sigma_p: (vp / m0).sqrt(), negative_fraction: neg / m0 }
}

/// Exact first and second moments of a state's Wigner function from ladder
/// expectations: x = (a + a†)/√2, p = (a − a†)/(i√2).
pub fn state_moments(state: &crate::hilbert::StateCoefficients) -> GaussianSummary {
    let c = &state.amplitudes;
    let norm = state.norm_sqr();
    let mut a = num_complex::Complex64::new(0.0, 0.0);
    let mut a2 = num_complex::Complex64::new(0.0, 0.0);
    let mut n_mean = 0.0;
    for n in 0..c.len() {
        n_mean += n as f64 * c[n].norm_sqr();
        if n + 1 < c.len() {
            a += c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt();
        }
        if n + 2 < c.len() {
            a2 += c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt();
        }
    }
    let (a, a2, n_mean) = (a / norm, a2 / norm, n_mean / norm);
    let x0 = std::f64::consts::SQRT_2 * a.re;
    let p0 = std::f64::consts::SQRT_2 * a.im;
    let x2 = a2.re + n_mean + 0.5;
    let p2 = -a2.re + n_mean + 0.5;
    GaussianSummary {
        x0,
        p0,
        sigma_x: (x2 - x0 * x0).max(0.0).sqrt(),
        sigma_p: (p2 - p0 * p0).max(0.0).sqrt(),
        negative_fraction: 0.0,
    }
}
