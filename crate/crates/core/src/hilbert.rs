//! Fixed-M subspace of the Tavis-Cummings Hamiltonian
//!
//! `H = ω b†b + ω₀ J_z + λ/√(2j) (b† J₋ + b J₊)` conserves `M = b†b + J_z + j`,
//! so each M block is a tridiagonal matrix in the basis `|n, m = M − n − j⟩`
//! ordered by ascending photon number `n`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Physical parameters of one fixed-M system (ℏ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    two_j: u32,
    pub omega: f64,
    pub omega0: f64,
    m: u32,
    pub lambda: f64,
}

impl ModelParams {
    /// `j` must be a positive integer or half-integer, `0 ≤ M ≤ 2j`, `ω ≥ ω₀ > 0`.
    pub fn new(j: f64, omega: f64, omega0: f64, m: i64, lambda: f64) -> Result<Self> {
        let two_j_f = 2.0 * j;
        if !(two_j_f.is_finite() && two_j_f >= 1.0 && (two_j_f - two_j_f.round()).abs() < 1e-12) {
            return Err(Error::InvalidParams(format!("j = {j} is not a positive integer or half-integer")));
        }
        let two_j = two_j_f.round() as u32;
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParams(format!("omega0 = {omega0} must be positive")));
        }
        if !(omega.is_finite() && omega >= omega0) {
            return Err(Error::InvalidParams(format!("omega = {omega} must satisfy omega >= omega0 = {omega0}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda = {lambda} is not finite")));
        }
        if m < 0 {
            return Err(Error::InvalidParams(format!("M = {m} must be non-negative")));
        }
        if m > two_j as i64 {
            return Err(Error::UnsupportedSubspace { m, two_j });
        }
        Ok(Self { two_j, omega, omega0, m: m as u32, lambda })
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn two_j(&self) -> u32 {
        self.two_j
    }

    /// Conserved excitation number M.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Detuning Δω = ω − ω₀.
    pub fn detuning(&self) -> f64 {
        self.omega - self.omega0
    }

    /// Energy scale ω₀ j used for scaled energies ε = E/(ω₀ j) and times τ = ω₀ j t.
    pub fn energy_scale(&self) -> f64 {
        self.omega0 * self.j()
    }

    pub fn is_critical_subspace(&self) -> bool {
        self.m == self.two_j
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    /// Multiplies ω, ω₀ and λ by `factor` (energy-unit change).
    pub fn rescaled(&self, factor: f64) -> Self {
        Self { omega: self.omega * factor, omega0: self.omega0 * factor, lambda: self.lambda * factor, ..*self }
    }
}

/// Basis `|n, m⟩` of one M subspace, ascending in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub n_values: Vec<u32>,
    pub m_values: Vec<f64>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.n_values.len()
    }
}

pub fn build_basis(params: &ModelParams) -> SubspaceBasis {
    let j = params.j();
    // M ≤ 2j ⇒ every n = 0..=M keeps |m| ≤ j, d = min(M+1, 2j+1) = M+1
    let dim = (params.m() + 1).min(params.two_j() + 1);
    let n_values: Vec<u32> = (0..dim).collect();
    let m_values = n_values.iter().map(|&n| params.m() as f64 - n as f64 - j).collect();
    SubspaceBasis { n_values, m_values }
}

/// Real symmetric tridiagonal block of H in the ascending-n basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalHamiltonian {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub params: ModelParams,
}

pub fn build_hamiltonian(params: &ModelParams) -> TridiagonalHamiltonian {
    let basis = build_basis(params);
    let j = params.j();
    let coupling = params.lambda / (2.0 * j).sqrt();
    let diag = basis
        .n_values
        .iter()
        .zip(&basis.m_values)
        .map(|(&n, &m)| params.omega * n as f64 + params.omega0 * m)
        .collect();
    // ⟨n+1, m−1| b†J₋ |n, m⟩ = √(n+1) √(j(j+1) − m(m−1))
    let offdiag = basis
        .n_values
        .iter()
        .zip(&basis.m_values)
        .take(basis.dim().saturating_sub(1))
        .map(|(&n, &m)| {
            let spin = (j * (j + 1.0) - m * (m - 1.0)).max(0.0);
            coupling * (n as f64 + 1.0).sqrt() * spin.sqrt()
        })
        .collect();
    TridiagonalHamiltonian { diag, offdiag, params: *params }
}

impl TridiagonalHamiltonian {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        for (i, &v) in self.diag.iter().enumerate() {
            h[(i, i)] = v;
        }
        for (i, &v) in self.offdiag.iter().enumerate() {
            h[(i, i + 1)] = v;
            h[(i + 1, i)] = v;
        }
        h
    }

    /// Frobenius norm, an upper bound on the spectral norm.
    pub fn norm(&self) -> f64 {
        let d2: f64 = self.diag.iter().map(|v| v * v).sum();
        let o2: f64 = self.offdiag.iter().map(|v| v * v).sum();
        (d2 + 2.0 * o2).sqrt()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        (0..d)
            .map(|i| {
                let mut acc = v[i] * self.diag[i];
                if i > 0 {
                    acc += v[i - 1] * self.offdiag[i - 1];
                }
                if i + 1 < d {
                    acc += v[i + 1] * self.offdiag[i];
                }
                acc
            })
            .collect()
    }

    /// ⟨ψ|H|ψ⟩ for a normalized state.
    pub fn expectation(&self, state: &StateCoefficients) -> f64 {
        let hv = self.apply(&state.amplitudes);
        state.amplitudes.iter().zip(&hv).map(|(c, h)| (c.conj() * h).re).sum()
    }
}

/// Ascending eigenvalues with orthonormal eigenvectors stored as matrix columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub params: ModelParams,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn scaled_energies(&self) -> Vec<f64> {
        let s = self.params.energy_scale();
        self.energies.iter().map(|e| e / s).collect()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    pub fn state(&self, k: usize) -> StateCoefficients {
        StateCoefficients::from_real(&self.vector(k))
    }
}

pub fn diagonalize(h: &TridiagonalHamiltonian) -> Result<EigenSystem> {
    let d = h.dim();
    if d == 0 {
        return Err(Error::InvalidParams("empty subspace".into()));
    }
    let eig = SymmetricEigen::try_new(h.to_dense(), f64::EPSILON, 1000 * d.max(10))
        .ok_or(Error::EigenNonConvergence { dim: d })?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(d, d);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let lead = v.iter().copied().fold(0.0_f64, |a, x| if x.abs() > a.abs() { x } else { a });
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            vectors[(i, col)] = sign * v[i];
        }
    }
    Ok(EigenSystem { energies, vectors, params: h.params })
}

/// Eigenvalues only, for λ sweeps that need no eigenvectors.
pub fn eigenvalues(h: &TridiagonalHamiltonian) -> Result<Vec<f64>> {
    let d = h.dim();
    let mut ev: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
    if ev.iter().any(|e| !e.is_finite()) {
        return Err(Error::EigenNonConvergence { dim: d });
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Complex amplitudes `c_n` over the subspace basis at scaled time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCoefficients {
    pub amplitudes: Vec<Complex64>,
    pub tau: f64,
}

impl StateCoefficients {
    pub fn from_real(v: &[f64]) -> Self {
        Self { amplitudes: v.iter().map(|&x| Complex64::new(x, 0.0)).collect(), tau: 0.0 }
    }

    /// Fock state `|n⟩` of a `dim`-dimensional subspace.
    pub fn basis_state(dim: usize, n: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[n] = 1.0;
        Self::from_real(&v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        for c in &mut self.amplitudes {
            *c /= n;
        }
        self
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateCoefficients) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Highest Fock index carrying weight above `cutoff`.
    pub fn max_occupied(&self, cutoff: f64) -> usize {
        self.amplitudes.iter().rposition(|c| c.norm_sqr() > cutoff).unwrap_or(0)
    }
}

/// Lowest eigenvector, sign fixed so its largest-magnitude entry is positive.
pub fn ground_state(es: &EigenSystem) -> StateCoefficients {
    es.state(0)
}

/// `⟨J_z⟩ = Σ |c_n|² (M − n − j)`.
pub fn expectation_jz(state: &StateCoefficients, basis: &SubspaceBasis) -> f64 {
    state.amplitudes.iter().zip(&basis.m_values).map(|(c, m)| c.norm_sqr() * m).sum()
}

/// `⟨J_z⟩/j`.
pub fn scaled_jz(state: &StateCoefficients, basis: &SubspaceBasis, j: f64) -> f64 {
    expectation_jz(state, basis) / j
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(j: f64, m: i64, lambda: f64) -> ModelParams {
        ModelParams::new(j, 2.0, 1.0, m, lambda).unwrap()
    }

    #[test]
    fn basis_dimensions() {
        assert_eq!(build_basis(&params(200.0, 300, 0.0)).dim(), 301);
        assert_eq!(build_basis(&params(200.0, 400, 0.0)).dim(), 401);
        let b = build_basis(&params(0.5, 1, 0.0));
        assert_eq!(b.n_values, vec![0, 1]);
        assert_eq!(b.m_values, vec![0.5, -0.5]);
        for (n, m) in b.n_values.iter().zip(&b.m_values) {
            assert_eq!(*n as f64 + m + 0.5, 1.0);
        }
    }

    #[test]
    fn rejects_bad_subspaces() {
        assert!(matches!(
            ModelParams::new(200.0, 2.0, 1.0, 500, 0.0),
            Err(Error::UnsupportedSubspace { m: 500, two_j: 400 })
        ));
        assert!(matches!(ModelParams::new(2.0, 2.0, 1.0, -1, 0.0), Err(Error::InvalidParams(_))));
        assert!(ModelParams::new(0.3, 2.0, 1.0, 0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.5, 1.0, 0, 0.0).is_err());
        // zero detuning is allowed here
        assert!(ModelParams::new(1.0, 1.0, 1.0, 2, 0.3).is_ok());
    }

    #[test]
    fn spin_half_hamiltonian() {
        let h = build_hamiltonian(&params(0.5, 1, 0.75));
        assert_relative_eq!(h.diag[0], 0.5);
        assert_relative_eq!(h.diag[1], 1.5);
        assert_relative_eq!(h.offdiag[0], 0.75, epsilon = 1e-15);

        let es = diagonalize(&h).unwrap();
        let r = (0.25f64 + 0.5625).sqrt();
        assert_relative_eq!(es.energies[0], 1.0 - r, epsilon = 1e-14);
        assert_relative_eq!(es.energies[1], 1.0 + r, epsilon = 1e-14);
        assert_relative_eq!(es.energies[1] - 1.0, 0.9013878188659973, epsilon = 1e-12);

        // c ∝ (cos θ, −sin θ), tan 2θ = 2λ/(E₂ − E₁)
        let theta = 0.5 * (2.0 * 0.75f64 / 1.0).atan();
        let gs = ground_state(&es);
        assert_relative_eq!(gs.amplitudes[0].re, theta.cos(), epsilon = 1e-12);
        assert_relative_eq!(gs.amplitudes[1].re, -theta.sin(), epsilon = 1e-12);
    }

    #[test]
    fn decoupled_limit() {
        let p = params(3.0, 5, 0.0);
        let h = build_hamiltonian(&p);
        assert!(h.offdiag.iter().all(|&v| v == 0.0));
        let es = diagonalize(&h).unwrap();
        let mut expected: Vec<f64> = (0..=5).map(|n| 2.0 * n as f64 + (5.0 - n as f64 - 3.0)).collect();
        expected.sort_by(f64::total_cmp);
        for (e, x) in es.energies.iter().zip(&expected) {
            assert_relative_eq!(e, x, epsilon = 1e-13);
        }
        let gs = ground_state(&es);
        assert_relative_eq!(gs.amplitudes[0].re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_and_residuals() {
        let h = build_hamiltonian(&params(20.0, 40, 2.5));
        let es = diagonalize(&h).unwrap();
        let tr: f64 = h.diag.iter().sum();
        let sum: f64 = es.energies.iter().sum();
        assert!((tr - sum).abs() <= 1e-10 * tr.abs());
        let hd = h.to_dense();
        for k in 0..es.dim() {
            let v = es.vectors.column(k);
            let r = (&hd * v - v * es.energies[k]).norm();
            assert!(r <= 1e-10 * h.norm(), "residual {r}");
        }
        let id = es.vectors.transpose() * &es.vectors;
        assert!((id - DMatrix::identity(es.dim(), es.dim())).amax() < 1e-12);
        assert!(es.energies.windows(2).all(|w| w[1] - w[0] > 0.0));
    }

    #[test]
    fn jz_expectations() {
        let p = params(2.0, 4, 0.0);
        let b = build_basis(&p);
        let s0 = StateCoefficients::basis_state(5, 0);
        assert_relative_eq!(expectation_jz(&s0, &b), 2.0);
        let sm = StateCoefficients::basis_state(5, 4);
        assert_relative_eq!(expectation_jz(&sm, &b), -2.0);
        let mut v = vec![0.0; 5];
        v[0] = 0.5f64.sqrt();
        v[4] = 0.5f64.sqrt();
        assert_relative_eq!(expectation_jz(&StateCoefficients::from_real(&v), &b), 0.0, epsilon = 1e-15);
    }
}
