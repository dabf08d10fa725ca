//! Classical one-degree-of-freedom Hamiltonian of a fixed-M subspace:
//!
//! `H(x,p) = (Δω/2)(x²+p²) + ω₀(M−j) + (λx/√j) √(j² − (M − j − (x²+p²)/2)²)`
//!
//! defined on the disk x² + p² ≤ 2M (for M ≤ 2j). With λ > 0 the quasipotential
//! minimum sits at x < 0.

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;

/// Precomputed constants of the classical Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalHamiltonian {
    pub params: ModelParams,
    half_detuning: f64,
    offset: f64,
    coupling: f64,
    shift: f64,
    j2: f64,
}

impl ClassicalHamiltonian {
    pub fn new(params: &ModelParams) -> Self {
        let j = params.j();
        let m = params.m() as f64;
        Self {
            params: *params,
            half_detuning: 0.5 * params.detuning(),
            offset: params.omega0 * (m - j),
            coupling: params.lambda / j.sqrt(),
            shift: m - j,
            j2: j * j,
        }
    }

    /// Squared radius 2M of the domain boundary.
    pub fn boundary_r2(&self) -> f64 {
        2.0 * self.params.m() as f64
    }

    pub fn radicand(&self, x: f64, p: f64) -> f64 {
        let u = self.shift - 0.5 * (x * x + p * p);
        self.j2 - u * u
    }

    pub fn in_domain(&self, x: f64, p: f64) -> bool {
        self.radicand(x, p) >= -1e-12 * self.j2
    }

    /// H(x,p); errors outside the classical domain.
    pub fn value(&self, x: f64, p: f64) -> Result<f64> {
        if !self.in_domain(x, p) {
            return Err(Error::OutsideDomain { x, p });
        }
        Ok(self.value_clamped(x, p))
    }

    /// H with the radicand clamped at zero: a continuous extension past the boundary.
    #[inline]
    pub fn value_clamped(&self, x: f64, p: f64) -> f64 {
        let r2 = x * x + p * p;
        let root = self.radicand(x, p).max(0.0).sqrt();
        self.half_detuning * r2 + self.offset + self.coupling * x * root
    }

    /// (∂H/∂x, ∂H/∂p), with the radicand floored to keep the boundary finite.
    #[inline]
    pub fn gradient(&self, x: f64, p: f64) -> (f64, f64) {
        let u = self.shift - 0.5 * (x * x + p * p);
        let root = (self.j2 - u * u).max(1e-24 * self.j2).sqrt();
        let dx = 2.0 * self.half_detuning * x + self.coupling * (root + x * x * u / root);
        let dp = 2.0 * self.half_detuning * p + self.coupling * x * u * p / root;
        (dx, dp)
    }

    /// Hamiltonian flow (ẋ, ṗ) = (∂H/∂p, −∂H/∂x).
    #[inline]
    pub fn flow(&self, x: f64, p: f64) -> (f64, f64) {
        let (hx, hp) = self.gradient(x, p);
        (hp, -hx)
    }

    pub fn gradient_norm(&self, x: f64, p: f64) -> f64 {
        let (a, b) = self.gradient(x, p);
        a.hypot(b)
    }

    /// Value on the domain boundary, (Δω)M + ω₀(M − j).
    pub fn boundary_value(&self) -> f64 {
        self.half_detuning * self.boundary_r2() + self.offset
    }

    /// Quasipotential v(x) = H(x, 0).
    pub fn quasipotential(&self, x: f64) -> Result<f64> {
        self.value(x, 0.0)
    }

    /// dv/dx at p = 0.
    pub fn quasipotential_slope(&self, x: f64) -> f64 {
        self.gradient(x, 0.0).0
    }

    /// Global minimum of v(x) on the domain: coarse scan, then bisection on the
    /// analytic slope (golden section if the slope does not change sign).
    pub fn quasipotential_minimum(&self) -> (f64, f64) {
        let r = self.boundary_r2().sqrt();
        let n = 4000;
        let xs: Vec<f64> = (0..=n).map(|i| -r + 2.0 * r * i as f64 / n as f64).collect();
        let (imin, _) =
            xs.iter().map(|&x| self.value_clamped(x, 0.0)).enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        let lo = xs[imin.saturating_sub(1)];
        let hi = xs[(imin + 1).min(n)];
        let x0 = bisect(|x| self.quasipotential_slope(x), lo, hi, 0.0)
            .unwrap_or_else(|| golden_section(|x| self.value_clamped(x, 0.0), lo, hi, 1e-13 * r.max(1.0)));
        (x0, self.value_clamped(x0, 0.0))
    }
}

pub fn classical_hamiltonian(params: &ModelParams, x: f64, p: f64) -> Result<f64> {
    ClassicalHamiltonian::new(params).value(x, p)
}

pub fn quasipotential(params: &ModelParams, x: f64) -> Result<f64> {
    ClassicalHamiltonian::new(params).quasipotential(x)
}

pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Root of `f` in `[a, b]` by bisection; `None` unless the ends straddle zero.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Option<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ham(j: f64, m: i64, lambda: f64) -> ClassicalHamiltonian {
        ClassicalHamiltonian::new(&ModelParams::new(j, 2.0, 1.0, m, lambda).unwrap())
    }

    #[test]
    fn origin_of_critical_subspace_is_esqpt_energy() {
        let h = ham(200.0, 400, 2.5);
        assert_eq!(h.value(0.0, 0.0).unwrap(), 200.0);
        assert_eq!(h.value(0.0, 0.0).unwrap() / h.params.energy_scale(), 1.0);
    }

    #[test]
    fn direct_substitution() {
        let h = ham(2.0, 4, 1.0);
        let expected = 0.5 + 2.0 + (1.0 / 2f64.sqrt()) * (4.0f64 - 2.25).sqrt();
        assert_relative_eq!(h.value(1.0, 0.0).unwrap(), expected, epsilon = 1e-14);
        assert_relative_eq!(expected, 3.43541, epsilon = 1e-5);
    }

    #[test]
    fn boundary_value_and_domain() {
        let h = ham(3.0, 5, 1.7);
        let r = 10f64.sqrt();
        for k in 0..12 {
            let a = k as f64 * 0.5;
            let (x, p) = (r * a.cos(), r * a.sin());
            assert!(h.radicand(x, p).abs() < 1e-12);
            assert_relative_eq!(h.value(x, p).unwrap(), 1.0 * 5.0 + 1.0 * 2.0, epsilon = 1e-9);
        }
        assert!(matches!(h.value(3.2, 0.2), Err(Error::OutsideDomain { .. })));
        // radicand ≥ 0 exactly on the disk
        for &(x, p) in &[(0.0, 0.0), (2.0, 2.0), (-3.1, 0.1), (3.0, 1.2)] {
            assert_eq!(h.radicand(x, p) >= 0.0, x * x + p * p <= 10.0);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let h = ham(200.0, 300, 2.5);
        for &(x, p) in &[(0.3, -0.2), (-10.0, 4.0), (5.0, 5.0), (-15.0, -1.0)] {
            let e = 1e-6;
            let fx = (h.value(x + e, p).unwrap() - h.value(x - e, p).unwrap()) / (2.0 * e);
            let fp = (h.value(x, p + e).unwrap() - h.value(x, p - e).unwrap()) / (2.0 * e);
            let (gx, gp) = h.gradient(x, p);
            assert_relative_eq!(gx, fx, max_relative = 1e-7, epsilon = 1e-7);
            assert_relative_eq!(gp, fp, max_relative = 1e-7, epsilon = 1e-7);
        }
    }

    #[test]
    fn quasipotential_shapes() {
        // critical subspace: stationary at the origin
        let h = ham(200.0, 400, 2.5);
        let e = 1e-7;
        let slope = (h.quasipotential(e).unwrap() - h.quasipotential(-e).unwrap()) / (2.0 * e);
        assert!(slope.abs() < 1e-6);
        // non-critical: finite slope at the origin
        let g = ham(200.0, 300, 2.5);
        let slope = (g.quasipotential(e).unwrap() - g.quasipotential(-e).unwrap()) / (2.0 * e);
        assert!(slope.abs() > 0.1);
        // the global minimum lies at x < 0 for λ > 0
        let (x0, v0) = h.quasipotential_minimum();
        assert!(x0 < 0.0);
        assert!(h.quasipotential_slope(x0).abs() < 1e-6);
        for k in 0..200 {
            let x = -28.0 + 0.28 * k as f64;
            assert!(h.quasipotential(x).unwrap() >= v0 - 1e-9);
        }
    }
}
