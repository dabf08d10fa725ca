//! Closed energy contours of the classical Hamiltonian.
//!
//! A contour is found by marching squares on a fixed working lattice over the
//! domain box, starting from the lattice crossing nearest the seed. Vertices are
//! then pulled onto the level set along the gradient, chords that bow too far
//! off the level set are subdivided, and the loop is oriented along the flow.
//! Time follows from |(ẋ, ṗ)| = |∇H|: each chord takes Δs / |∇H(midpoint)|.

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::phase_space::ClassicalHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Cells per side of the working lattice.
    pub working_grid: usize,
    /// Speed floor and stationary-seed cutoff, in units of ω₀.
    pub g_min: f64,
    /// Period cap in scaled time τ.
    pub t_cap: f64,
    /// Level-set tolerance for vertices, relative to max(|E|, ω₀ j).
    pub level_tol: f64,
    /// Chord midpoints off the level set by more than this (relative) are split.
    pub chord_tol: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { working_grid: 2048, g_min: 1e-8, t_cap: 1e4, level_tol: 1e-9, chord_tol: 2e-6 }
    }
}

/// Closed oriented contour with unscaled times; vertex 0 is the seed at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub energy: f64,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    /// Cumulative times at the vertices (empty before time parametrization).
    pub ts: Vec<f64>,
    /// Unscaled period (0 for fixed points).
    pub period: f64,
    /// Seed sits on a stationary point; the trajectory never moves.
    pub fixed_point: bool,
    /// Period reached the cap: the contour runs through or next to a stationary point.
    pub near_stationary: bool,
}

impl Contour {
    pub fn fixed(energy: f64, x: f64, p: f64) -> Self {
        Self { energy, xs: vec![x], ps: vec![p], ts: vec![0.0], period: 0.0, fixed_point: true, near_stationary: true }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Position after unscaled time `t` from the seed, by linear interpolation.
    pub fn position(&self, t: f64) -> (f64, f64) {
        if self.fixed_point || self.period <= 0.0 {
            return (self.xs[0], self.ps[0]);
        }
        let t = t.rem_euclid(self.period);
        let n = self.xs.len();
        // last vertex with ts[i] ≤ t
        let i = self.ts.partition_point(|&s| s <= t).saturating_sub(1);
        let (t0, t1) = (self.ts[i], if i + 1 < n { self.ts[i + 1] } else { self.period });
        let j = (i + 1) % n;
        let f = if t1 > t0 { ((t - t0) / (t1 - t0)).clamp(0.0, 1.0) } else { 0.0 };
        (self.xs[i] + f * (self.xs[j] - self.xs[i]), self.ps[i] + f * (self.ps[j] - self.ps[i]))
    }

    /// Largest |H − E| over the vertices.
    pub fn max_level_error(&self, ham: &ClassicalHamiltonian) -> f64 {
        self.xs.iter().zip(&self.ps).map(|(&x, &p)| (ham.value_clamped(x, p) - self.energy).abs()).fold(0.0, f64::max)
    }
}

/// Square lattice of H values; node (i, k) sits at (x0 + i h, p0 + k h).
struct Lattice {
    x0: f64,
    p0: f64,
    h: f64,
    cells: usize,
    values: Vec<f64>,
}

impl Lattice {
    fn new(ham: &ClassicalHamiltonian, x0: f64, p0: f64, h: f64, cells: usize) -> Self {
        let n = cells + 1;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let x = x0 + i as f64 * h;
            for k in 0..n {
                values[i * n + k] = ham.value_clamped(x, p0 + k as f64 * h);
            }
        }
        Self { x0, p0, h, cells, values }
    }

    #[inline]
    fn node(&self, i: usize, k: usize) -> f64 {
        self.values[i * (self.cells + 1) + k]
    }

    #[inline]
    fn xy(&self, i: usize, k: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.h, self.p0 + k as f64 * self.h)
    }

    fn cell_of(&self, x: f64, p: f64) -> Option<(usize, usize)> {
        let fi = ((x - self.x0) / self.h).floor();
        let fk = ((p - self.p0) / self.h).floor();
        let n = self.cells as f64;
        (fi >= 0.0 && fk >= 0.0 && fi < n && fk < n).then_some((fi as usize, fk as usize))
    }

    /// Corners a=(i,k), b=(i+1,k), c=(i+1,k+1), d=(i,k+1); edge e joins corner e and e+1.
    #[inline]
    fn corners(i: usize, k: usize) -> [(usize, usize); 4] {
        [(i, k), (i + 1, k), (i + 1, k + 1), (i, k + 1)]
    }

    fn crossing(&self, i: usize, k: usize, edge: usize, level: f64) -> Option<(f64, f64)> {
        let c = Self::corners(i, k);
        let (a, b) = (c[edge], c[(edge + 1) % 4]);
        let (fa, fb) = (self.node(a.0, a.1) - level, self.node(b.0, b.1) - level);
        if (fa >= 0.0) == (fb >= 0.0) {
            return None;
        }
        let t = fa / (fa - fb);
        let (pa, pb) = (self.xy(a.0, a.1), self.xy(b.0, b.1));
        Some((pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1)))
    }

    fn exit_edge(&self, i: usize, k: usize, entry: usize, level: f64) -> Option<usize> {
        let f: Vec<f64> = Self::corners(i, k).iter().map(|&(a, b)| self.node(a, b) - level).collect();
        let s: Vec<bool> = f.iter().map(|&v| v >= 0.0).collect();
        let crossed: Vec<usize> = (0..4).filter(|&e| s[e] != s[(e + 1) % 4]).collect();
        match crossed.len() {
            2 => crossed.into_iter().find(|&e| e != entry),
            4 => {
                // asymptotic decider: sign of the bilinear interpolant at its saddle
                let denom = f[0] - f[1] + f[2] - f[3];
                let saddle = if denom != 0.0 { (f[0] * f[2] - f[1] * f[3]) / denom } else { 0.0 };
                let pairs = if (saddle >= 0.0) == s[0] { [1, 0, 3, 2] } else { [3, 2, 1, 0] };
                Some(pairs[entry])
            }
            _ => None,
        }
    }

    /// Neighbouring cell across `edge` and the edge index as seen from there.
    fn across(&self, i: usize, k: usize, edge: usize) -> Option<(usize, usize, usize)> {
        let n = self.cells;
        match edge {
            0 => (k > 0).then(|| (i, k - 1, 2)),
            1 => (i + 1 < n).then(|| (i + 1, k, 3)),
            2 => (k + 1 < n).then(|| (i, k + 1, 0)),
            _ => (i > 0).then(|| (i - 1, k, 1)),
        }
    }

    /// Closed polyline of the level set through the crossing nearest `seed`.
    fn march(&self, level: f64, seed: (f64, f64)) -> Option<Vec<(f64, f64)>> {
        let (ci, ck) = self.cell_of(seed.0, seed.1)?;
        let mut best: Option<((usize, usize, usize), f64)> = None;
        let lo_i = ci.saturating_sub(2);
        let lo_k = ck.saturating_sub(2);
        for i in lo_i..=(ci + 2).min(self.cells - 1) {
            for k in lo_k..=(ck + 2).min(self.cells - 1) {
                for e in 0..4 {
                    if let Some(q) = self.crossing(i, k, e, level) {
                        let d = (q.0 - seed.0).hypot(q.1 - seed.1);
                        if best.is_none_or(|(_, bd)| d < bd) {
                            best = Some(((i, k, e), d));
                        }
                    }
                }
            }
        }
        let start = best?.0;
        let (mut i, mut k, mut entry) = start;
        let mut pts = vec![self.crossing(i, k, entry, level)?];
        let max_steps = 8 * self.cells * self.cells;
        for _ in 0..max_steps {
            let exit = self.exit_edge(i, k, entry, level)?;
            let next = self.across(i, k, exit)?;
            if next == start {
                return Some(pts);
            }
            (i, k, entry) = next;
            pts.push(self.crossing(i, k, entry, level)?);
        }
        None
    }
}

/// Chords whose speed varies by more than this factor are split.
const SPEED_RATIO: f64 = 1.05;
const MAX_SPLIT_DEPTH: u32 = 10;

/// Energy window (in units of the level tolerance) for recognising a separatrix.
const SEPARATRIX_TOL: f64 = 10.0;

/// Traces energy contours of one Hamiltonian. Holds the working lattice, so
/// build once and share across seeds.
pub struct ContourTracer {
    pub ham: ClassicalHamiltonian,
    pub config: ContourConfig,
    lattice: Lattice,
    g_min: f64,
    t_cap: f64,
    /// Stationary points on the p = 0 line as (x, H).
    stationary: Vec<(f64, f64)>,
}

impl ContourTracer {
    pub fn new(params: &ModelParams, config: ContourConfig) -> Self {
        let ham = ClassicalHamiltonian::new(params);
        let cells = config.working_grid.max(16) & !1;
        // pad by two cells so the domain boundary stays interior; symmetric with an
        // even cell count puts the origin on a node
        let r = ham.boundary_r2().sqrt().max(1.0);
        let h = 2.0 * r / (cells as f64 - 4.0);
        let half = 0.5 * cells as f64 * h;
        let lattice = Lattice::new(&ham, -half, -half, h, cells);
        Self {
            ham,
            config,
            lattice,
            g_min: config.g_min * params.omega0,
            t_cap: config.t_cap / params.energy_scale(),
            stationary: stationary_points(&ham),
        }
    }

    /// Stationary points of H on the p = 0 line as (x, H).
    pub fn stationary_points(&self) -> &[(f64, f64)] {
        &self.stationary
    }

    fn scale(&self, e: f64) -> f64 {
        e.abs().max(self.ham.params.energy_scale())
    }

    /// Working-lattice spacing.
    pub fn spacing(&self) -> f64 {
        self.lattice.h
    }

    /// Oriented, refined contour through the seed, without times.
    pub fn trace_geometry(&self, x: f64, p: f64) -> Result<Contour> {
        let energy = self.ham.value(x, p)?;
        if self.ham.gradient_norm(x, p) <= self.g_min {
            return Err(Error::StationarySeed { x, p });
        }
        let (pts, h) = self.raw_loop(energy, (x, p))?;
        let tol = self.config.level_tol * self.scale(energy);
        let mut pts: Vec<(f64, f64)> = pts.into_iter().map(|q| self.project(q, energy, h, tol)).collect();
        pts.dedup_by(|a, b| (a.0 - b.0).hypot(a.1 - b.1) < 1e-12 * h);

        // splice the seed into the nearest chord and rotate it to the front
        let n = pts.len();
        let j = (0..n)
            .min_by(|&a, &b| {
                seg_dist((x, p), pts[a], pts[(a + 1) % n]).total_cmp(&seg_dist((x, p), pts[b], pts[(b + 1) % n]))
            })
            .unwrap();
        pts.rotate_left(j + 1);
        pts.insert(0, (x, p));
        pts.dedup_by(|a, b| (a.0 - b.0).hypot(a.1 - b.1) < 1e-12 * h);
        while pts.len() > 1 && {
            let l = pts[pts.len() - 1];
            (l.0 - x).hypot(l.1 - p) < 1e-12 * h
        } {
            pts.pop();
        }

        let pts = self.subdivide(pts, energy, h, tol);
        let pts = self.orient(pts);
        let (xs, ps) = pts.into_iter().unzip();
        Ok(Contour { energy, xs, ps, ts: Vec::new(), period: 0.0, fixed_point: false, near_stationary: false })
    }

    /// Full trajectory: geometry plus time parametrization; stationary seeds give fixed points.
    pub fn trace(&self, x: f64, p: f64) -> Result<Contour> {
        match self.trace_geometry(x, p) {
            Ok(c) => Ok(self.parametrize(c)),
            Err(Error::StationarySeed { .. }) => Ok(Contour::fixed(self.ham.value(x, p)?, x, p)),
            Err(e) => Err(e),
        }
    }

    /// Fills in vertex times and the period.
    pub fn parametrize(&self, mut c: Contour) -> Contour {
        let n = c.xs.len();
        let mut ts = Vec::with_capacity(n);
        let mut t = 0.0;
        let mut stalled = false;
        for i in 0..n {
            ts.push(t);
            let j = (i + 1) % n;
            let (dx, dp) = (c.xs[j] - c.xs[i], c.ps[j] - c.ps[i]);
            let (mx, mp) = (0.5 * (c.xs[i] + c.xs[j]), 0.5 * (c.ps[i] + c.ps[j]));
            let speed = self.ham.gradient_norm(mx, mp).max(self.g_min);
            t += dx.hypot(dp) / speed;
            if self.ham.gradient_norm(c.xs[j], c.ps[j]) <= self.g_min {
                // the contour runs through a stationary point: passage takes forever
                stalled = true;
            }
        }
        // a contour at a stationary energy that runs into the stationary point is
        // a separatrix: the passage through the point never ends
        let tol = SEPARATRIX_TOL * self.config.level_tol * self.scale(c.energy);
        let reach = 2.0 * self.lattice.h;
        stalled |= self.stationary.iter().any(|&(xs, es)| {
            (c.energy - es).abs() <= tol && c.xs.iter().zip(&c.ps).any(|(&x, &p)| (x - xs).hypot(p) <= reach)
        });
        if stalled {
            t = t.max(self.t_cap);
        }
        c.near_stationary = stalled || t >= self.t_cap;
        c.period = t;
        c.ts = ts;
        c
    }

    /// Closed loop from the working lattice, falling back to finer local lattices
    /// for contours too small to resolve. Returns the loop and the lattice spacing.
    fn raw_loop(&self, energy: f64, seed: (f64, f64)) -> Result<(Vec<(f64, f64)>, f64)> {
        if let Some(pts) = self.lattice.march(energy, seed).filter(|p| p.len() >= 8) {
            return Ok((pts, self.lattice.h));
        }
        let mut h = self.lattice.h;
        for _ in 0..4 {
            h /= 32.0;
            let half = 64.0 * h;
            let local = Lattice::new(&self.ham, seed.0 - half, seed.1 - half, h, 128);
            if let Some(pts) = local.march(energy, seed).filter(|p| p.len() >= 8) {
                return Ok((pts, h));
            }
        }
        Err(Error::ContourClosure(format!("no closed level line at E = {energy} through ({}, {})", seed.0, seed.1)))
    }

    /// Newton steps along the gradient (each at most one cell), bisection along
    /// the gradient line as fallback.
    fn project(&self, q: (f64, f64), e: f64, h: f64, tol: f64) -> (f64, f64) {
        let (mut x, mut p) = q;
        for _ in 0..30 {
            let f = self.ham.value_clamped(x, p) - e;
            if f.abs() <= tol {
                return (x, p);
            }
            let (gx, gp) = self.ham.gradient(x, p);
            let g2 = gx * gx + gp * gp;
            if g2 == 0.0 || !g2.is_finite() {
                break;
            }
            let (mut dx, mut dp) = (-f * gx / g2, -f * gp / g2);
            let step = dx.hypot(dp);
            if step > h {
                dx *= h / step;
                dp *= h / step;
            }
            x += dx;
            p += dp;
        }
        if (self.ham.value_clamped(x, p) - e).abs() <= tol {
            return (x, p);
        }
        let (gx, gp) = self.ham.gradient(q.0, q.1);
        let g = gx.hypot(gp);
        if g > 0.0 && g.is_finite() {
            let (ux, up) = (gx / g, gp / g);
            let f = |s: f64| self.ham.value_clamped(q.0 + s * ux, q.1 + s * up) - e;
            let root = crate::phase_space::classical::bisect(f, -h, h, 1e-15 * h);
            if let Some(s) = root {
                return (q.0 + s * ux, q.1 + s * up);
            }
        }
        (x, p)
    }

    fn speed(&self, q: (f64, f64)) -> f64 {
        self.ham.gradient_norm(q.0, q.1).max(self.g_min)
    }

    fn subdivide(&self, pts: Vec<(f64, f64)>, e: f64, h: f64, tol: f64) -> Vec<(f64, f64)> {
        let chord_tol = self.config.chord_tol * self.scale(e);
        let n = pts.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            out.push(a);
            self.split(a, b, e, h, tol, chord_tol, MAX_SPLIT_DEPTH, &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn split(
        &self,
        a: (f64, f64),
        b: (f64, f64),
        e: f64,
        h: f64,
        tol: f64,
        chord_tol: f64,
        depth: u32,
        out: &mut Vec<(f64, f64)>,
    ) {
        let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        if depth == 0 {
            return;
        }
        let bowed = (self.ham.value_clamped(mid.0, mid.1) - e).abs() > chord_tol;
        // the midpoint speed must represent the whole chord for the time step
        let (va, vb, vm) = (self.speed(a), self.speed(b), self.speed(mid));
        let uneven = va.max(vb).max(vm) > SPEED_RATIO * va.min(vb).min(vm);
        if !bowed && !uneven {
            return;
        }
        let m = self.project(mid, e, h, tol);
        self.split(a, m, e, h, tol, chord_tol, depth - 1, out);
        out.push(m);
        self.split(m, b, e, h, tol, chord_tol, depth - 1, out);
    }

    /// Keeps vertex 0, reverses the rest if the loop runs against the flow.
    fn orient(&self, mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
        let n = pts.len();
        let along: f64 = (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                let (fx, fp) = self.ham.flow(0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
                let norm = fx.hypot(fp);
                if norm > 0.0 && norm.is_finite() {
                    ((b.0 - a.0) * fx + (b.1 - a.1) * fp) / norm
                } else {
                    0.0
                }
            })
            .sum();
        if along < 0.0 {
            pts[1..].reverse();
        }
        pts
    }
}

/// Sign changes of ∂H/∂x along p = 0, plus the origin of the critical subspace,
/// where the square root vanishes and the slope does not change sign.
fn stationary_points(ham: &ClassicalHamiltonian) -> Vec<(f64, f64)> {
    let r = ham.boundary_r2().sqrt();
    let n = 8192;
    let slope = |x: f64| ham.quasipotential_slope(x);
    let mut out = Vec::new();
    let xs: Vec<f64> = (0..=n).map(|i| -r + 2.0 * r * i as f64 / n as f64).collect();
    for w in xs.windows(2) {
        // skip the boundary points where the slope is singular
        if w[0] <= -r || w[1] >= r {
            continue;
        }
        if let Some(x) = crate::phase_space::classical::bisect(slope, w[0], w[1], 1e-14 * r) {
            if slope(x).abs() < 1e-6 * ham.params.omega0 * r.max(1.0) {
                out.push((x, ham.value_clamped(x, 0.0)));
            }
        }
    }
    if ham.params.is_critical_subspace() && !out.iter().any(|&(x, _)| x.abs() < 1e-9) {
        out.push((0.0, ham.value_clamped(0.0, 0.0)));
    }
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    out
}

fn seg_dist(q: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dp) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dp * dp;
    let t = if l2 > 0.0 { (((q.0 - a.0) * dx + (q.1 - a.1) * dp) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (q.0 - a.0 - t * dx).hypot(q.1 - a.1 - t * dp)
}

/// Oriented contour through `seed` with default settings (no times).
pub fn trace_equienergy_contour(params: &ModelParams, seed: (f64, f64)) -> Result<Contour> {
    ContourTracer::new(params, ContourConfig::default()).trace_geometry(seed.0, seed.1)
}

/// Times along a traced contour with default speed floor and period cap.
pub fn parametrize_time(contour: Contour, params: &ModelParams) -> Contour {
    ContourTracer::new(params, ContourConfig { working_grid: 16, ..Default::default() }).parametrize(contour)
}
