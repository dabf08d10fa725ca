//! Q(x,p) = (1/π) ∫∫ W(x',p') e^{−(x−x')²−(p−p')²} dx' dp' as a separable
//! discrete convolution, truncated where the kernel drops below e^{−64}.

use rayon::prelude::*;

use num_complex::Complex64;

use super::grid::{FieldKind, PhaseField, PhaseGrid};
use crate::error::{Error, Result};
use crate::hilbert::StateCoefficients;

const KERNEL_REACH: f64 = 8.0;

/// Sparse 1-D weights: for each output coordinate, the input index range and
/// the e^{−d²}·Δ factors over it.
struct Axis {
    start: Vec<usize>,
    weights: Vec<Vec<f64>>,
}

impl Axis {
    fn new(out: impl Iterator<Item = f64>, in_min: f64, in_step: f64, in_len: usize) -> Self {
        let mut start = Vec::new();
        let mut weights = Vec::new();
        for y in out {
            let lo = ((y - KERNEL_REACH - in_min) / in_step).ceil().max(0.0) as usize;
            let hi = (((y + KERNEL_REACH - in_min) / in_step).floor().min(in_len as f64 - 1.0)).max(-1.0);
            let w: Vec<f64> = if hi < lo as f64 {
                Vec::new()
            } else {
                (lo..=hi as usize)
                    .map(|i| {
                        let d = y - (in_min + i as f64 * in_step);
                        (-d * d).exp() * in_step
                    })
                    .collect()
            };
            start.push(lo);
            weights.push(w);
        }
        Self { start, weights }
    }

    fn apply(&self, k: usize, input: impl Fn(usize) -> f64) -> f64 {
        let s = self.start[k];
        self.weights[k].iter().enumerate().map(|(i, w)| w * input(s + i)).sum()
    }
}

/// Husimi function of a Wigner field, sampled on `grid` (which may differ from
/// the input grid).
pub fn husimi_transform(field: &PhaseField, grid: &PhaseGrid) -> Result<PhaseField> {
    if field.kind != FieldKind::Wigner {
        return Err(Error::WrongFieldKind { expected: FieldKind::Wigner.name(), got: field.kind.name() });
    }
    let src = &field.grid;
    let px = Axis::new((0..grid.np).map(|ip| grid.p(ip)), src.p_min, src.dp(), src.np);
    let ax = Axis::new((0..grid.nx).map(|ix| grid.x(ix)), src.x_min, src.dx(), src.nx);

    // p-pass: (src.nx × grid.np)
    let mut half = vec![0.0; src.nx * grid.np];
    half.par_chunks_mut(grid.np).enumerate().for_each(|(ix, row)| {
        let w = field.row(ix);
        for (ip, v) in row.iter_mut().enumerate() {
            *v = px.apply(ip, |k| w[k]);
        }
    });

    // x-pass
    let np = grid.np;
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(np).enumerate().for_each(|(ix, row)| {
        for (ip, v) in row.iter_mut().enumerate() {
            *v = ax.apply(ix, |k| half[k * np + ip]) / std::f64::consts::PI;
        }
    });
    let mut out = PhaseField::new(*grid, values, FieldKind::Husimi);
    out.tau = field.tau;
    Ok(out)
}

/// Q(x,p) = |⟨α|ψ⟩|²/(2π) with α = (x + ip)/√2, from the Fock amplitudes.
/// Pointwise exact at any grid spacing (valid while |α|² < ~1400, where
/// e^{−|α|²/2} underflows; the classical disk has |α|² ≤ M).
pub fn husimi_of_state(state: &StateCoefficients, grid: &PhaseGrid) -> PhaseField {
    let c = &state.amplitudes[..=state.max_occupied(0.0)];
    let mut values = vec![0.0; grid.len()];
    values.par_chunks_mut(grid.np).enumerate().for_each(|(ix, row)| {
        let x = grid.x(ix);
        for (ip, v) in row.iter_mut().enumerate() {
            // ⟨α|n⟩ = e^{−|α|²/2} ᾱⁿ/√n!, built by recurrence
            let a_bar = Complex64::new(x, -grid.p(ip)) / std::f64::consts::SQRT_2;
            let mut t = Complex64::new((-0.5 * a_bar.norm_sqr()).exp(), 0.0);
            let mut sum = c[0] * t;
            for (n, cn) in c.iter().enumerate().skip(1) {
                t *= a_bar / (n as f64).sqrt();
                sum += cn * t;
            }
            *v = sum.norm_sqr() / (2.0 * std::f64::consts::PI);
        }
    });
    let mut out = PhaseField::new(*grid, values, FieldKind::Husimi);
    out.tau = state.tau;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::StateCoefficients;
    use crate::phase_space::wigner::wigner_transform;
    use std::f64::consts::PI;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(-10.0, 10.0, 201, -10.0, 10.0, 201).unwrap()
    }

    #[test]
    fn gaussian_closed_form() {
        let g = grid();
        let w = PhaseField::from_fn(g, FieldKind::Wigner, |x, p| (-x * x - p * p).exp() / PI);
        let q = husimi_transform(&w, &g).unwrap();
        for (v, (x, p)) in q.values.iter().zip(g.points()) {
            let expected = (-(x * x + p * p) / 2.0).exp() / (2.0 * PI);
            assert!((v - expected).abs() < 1e-9, "{x} {p}: {v} vs {expected}");
        }
        assert!((q.integral() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn narrow_bump_gives_unit_gaussian() {
        let g = PhaseGrid::new(-8.0, 8.0, 321, -8.0, 8.0, 321).unwrap();
        let s = 0.05f64;
        let w = PhaseField::from_fn(g, FieldKind::Wigner, |x, p| {
            (-((x - 1.0).powi(2) + (p + 0.5).powi(2)) / (2.0 * s * s)).exp() / (2.0 * PI * s * s)
        });
        let q = husimi_transform(&w, &g).unwrap();
        let peak = q.interpolate(1.0, -0.5);
        assert!((peak - 1.0 / PI).abs() < 1e-2 / PI);
    }

    #[test]
    fn first_fock_state_is_positive() {
        let g = PhaseGrid::new(-8.0, 8.0, 161, -8.0, 8.0, 161).unwrap();
        let w = wigner_transform(&StateCoefficients::basis_state(4, 1), &g).unwrap();
        assert!(w.interpolate(0.0, 0.0) < -0.3);
        let q = husimi_transform(&w, &g).unwrap();
        assert!(q.min() >= -1e-10);
        assert!((q.integral() - 1.0).abs() < 1e-4);
        // Q_1 = r²/2 e^{−r²/2}/(2π) in this normalization
        for (v, (x, p)) in q.values.iter().zip(g.points()) {
            let r2 = x * x + p * p;
            assert!((v - r2 / 2.0 * (-r2 / 2.0).exp() / (2.0 * PI)).abs() < 1e-8);
        }
    }

    #[test]
    fn direct_matches_convolution() {
        let g = PhaseGrid::new(-9.0, 9.0, 181, -9.0, 9.0, 181).unwrap();
        let mut s = 7u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps = (0..12).map(|_| num_complex::Complex64::new(next(), next())).collect();
        let state = StateCoefficients { amplitudes: amps, tau: 0.0 }.normalized();
        let q_conv = husimi_transform(&wigner_transform(&state, &g).unwrap(), &g).unwrap();
        let q_direct = husimi_of_state(&state, &g);
        let err = q_conv.values.iter().zip(&q_direct.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn rejects_non_wigner_input() {
        let g = grid();
        let f = PhaseField::from_fn(g, FieldKind::Husimi, |_, _| 0.0);
        assert!(matches!(husimi_transform(&f, &g), Err(Error::WrongFieldKind { .. })));
    }
}
