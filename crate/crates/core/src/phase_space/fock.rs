//! Harmonic-oscillator eigenfunctions ψ_n(x) = (2ⁿ n! √π)^{-1/2} e^{-x²/2} H_n(x).
//!
//! Evaluated by the three-term recurrence on ψ_n itself,
//! `ψ_{n+1} = √(2/(n+1)) x ψ_n − √(n/(n+1)) ψ_{n−1}`, with a running
//! power-of-two rescaling so the Gaussian factor never underflows midway.

use num_complex::Complex64;

const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_EXP: i32 = -498;

/// Writes ψ_0(x) … ψ_{n_max}(x) into `out` (length n_max + 1).
pub fn fock_row(x: f64, out: &mut [f64]) {
    let ln2 = std::f64::consts::LN_2;
    let shrink = 2f64.powi(RESCALE_EXP);
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    let emit = |v: f64, log_scale: f64| -> f64 {
        if v == 0.0 {
            0.0
        } else if log_scale > -700.0 {
            v * log_scale.exp()
        } else {
            v.signum() * (v.abs().ln() + log_scale).exp()
        }
    };
    out[0] = emit(cur, log_scale);
    #[allow(clippy::needless_range_loop)]
    for k in 1..out.len() {
        let kf = (k - 1) as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_ABOVE {
            prev *= shrink;
            cur *= shrink;
            log_scale -= RESCALE_EXP as f64 * ln2;
        }
        out[k] = emit(cur, log_scale);
    }
}

/// ψ_n(x).
pub fn fock_wavefunction(n: usize, x: f64) -> f64 {
    let mut row = vec![0.0; n + 1];
    fock_row(x, &mut row);
    row[n]
}

/// ψ(x) = Σ_n c_n ψ_n(x) at each of `xs`.
pub fn wavefunction(coeffs: &[Complex64], xs: &[f64]) -> Vec<Complex64> {
    let mut row = vec![0.0; coeffs.len()];
    xs.iter()
        .map(|&x| {
            fock_row(x, &mut row);
            coeffs.iter().zip(&row).map(|(c, &f)| c * f).sum()
        })
        .collect()
}
