//! W(x,p) = (1/π) ∫ ψ*(x+y) ψ(x−y) e^{2ipy} dy by trapezoid quadrature.
//!
//! ψ is tabulated once on a fine line aligned with the x grid (step h = Δx/r),
//! so x ± kh always lands on a tabulated point. The integrand is band-limited
//! to |k| ≲ 2√(2n+1) + 2|p|; h is chosen below that Nyquist bound, which makes
//! the trapezoid sum spectrally accurate.

use num_complex::Complex64;
use rayon::prelude::*;

use super::fock;
use super::grid::{FieldKind, PhaseField, PhaseGrid};
use crate::error::{Error, Result};
use crate::hilbert::StateCoefficients;

/// Fock weights below this are ignored when sizing the quadrature.
const OCCUPATION_CUTOFF: f64 = 1e-28;

/// Fock weights below this may be undersampled by the output grid: their
/// cross terms with the bulk are at most ~1e-6 in W.
const SAMPLING_CUTOFF: f64 = 1e-12;

/// Beyond the outermost turning point ψ is below e^{-40} after this margin.
const TAIL_MARGIN: f64 = 9.0;

/// Largest grid spacing (geometric mean of Δx, Δp) that still resolves Wigner
/// structure of a state occupying Fock levels up to `n_max`.
pub fn max_spacing(n_max: usize) -> f64 {
    std::f64::consts::PI / (2.0 * n_max as f64 + 1.0).sqrt()
}

pub fn check_sampling(grid: &PhaseGrid, n_max: usize) -> Result<()> {
    let limit = max_spacing(n_max);
    let spacing = grid.cell_area().sqrt();
    if spacing > limit {
        return Err(Error::GridTooCoarse { spacing, limit, n_max });
    }
    Ok(())
}

/// W on `grid`, which must be fine enough for grid sums (normalization,
/// overlaps) to resolve the state.
pub fn wigner_transform(state: &StateCoefficients, grid: &PhaseGrid) -> Result<PhaseField> {
    check_sampling(grid, state.max_occupied(SAMPLING_CUTOFF))?;
    wigner_values(state, grid)
}

/// W at the points of `grid`, at any spacing: the quadrature line is refined
/// independently of the output grid, so each value is exact, but grid sums
/// need not be.
pub fn wigner_values(state: &StateCoefficients, grid: &PhaseGrid) -> Result<PhaseField> {
    let n_eff = state.max_occupied(OCCUPATION_CUTOFF);
    let coeffs = &state.amplitudes[..=n_eff];

    let k_psi = (2.0 * n_eff as f64 + 1.0).sqrt();
    let p_abs = grid.p_min.abs().max(grid.p_max.abs());
    let h_max = 2.0 * std::f64::consts::PI / (2.0 * k_psi + 2.0 * p_abs + 8.0);
    let dx = grid.dx();
    let r = (dx / h_max).ceil().max(1.0) as i64;
    let h = dx / r as f64;

    // ψ line: u_i = x_min + i h, i in [i_lo, i_hi], covering |u| ≤ X_s
    let reach = k_psi + TAIL_MARGIN;
    let i_lo = ((-reach - grid.x_min) / h).floor() as i64;
    let i_hi = ((reach - grid.x_min) / h).ceil() as i64;
    let xs: Vec<f64> = (i_lo..=i_hi).map(|i| grid.x_min + i as f64 * h).collect();
    let psi = psi_line(coeffs, &xs);
    let len = psi.len() as i64;

    let np = grid.np;
    let dp = grid.dp();
    let p_min = grid.p_min;
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(np).enumerate().for_each(|(ix, row)| {
        let centre = ix as i64 * r - i_lo;
        if centre < 0 || centre >= len {
            return;
        }
        let kmax = centre.min(len - 1 - centre);
        let f0 = psi[centre as usize].norm_sqr();
        row.iter_mut().for_each(|v| *v = f0);
        for k in 1..=kmax {
            let f = psi[(centre + k) as usize].conj() * psi[(centre - k) as usize];
            if f.re == 0.0 && f.im == 0.0 {
                continue;
            }
            let phase = 2.0 * k as f64 * h;
            let mut z = 2.0 * f * Complex64::from_polar(1.0, p_min * phase);
            let rot = Complex64::from_polar(1.0, dp * phase);
            for v in row.iter_mut() {
                *v += z.re;
                z *= rot;
            }
        }
        let scale = h / std::f64::consts::PI;
        row.iter_mut().for_each(|v| *v *= scale);
    });
    let mut field = PhaseField::new(*grid, values, FieldKind::Wigner);
    field.tau = state.tau;
    Ok(field)
}

fn psi_line(coeffs: &[Complex64], xs: &[f64]) -> Vec<Complex64> {
    xs.par_chunks(256).flat_map_iter(|chunk| fock::wavefunction(coeffs, chunk)).collect()
}
