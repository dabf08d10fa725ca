//! Trajectory ensembles, Gaussian deposition and the classical survival probability.
//!
//! Storing every contour of a full-size ensemble does not fit in memory
//! comfortably, so an ensemble may instead re-trace its contours chunk by chunk
//! whenever it is evaluated. Chunks have a fixed size and partial results are
//! reduced in chunk order, so outputs do not depend on the worker count.

use rayon::prelude::*;

use super::contour::{Contour, ContourConfig, ContourTracer};
use super::seeds::TrajectorySeedGrid;
use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::phase_space::{FieldKind, PhaseField, PhaseGrid};

/// Seeds per work unit.
pub const CHUNK: usize = 256;

/// Kernel truncation in standard deviations.
const KERNEL_REACH: f64 = 6.0;

/// Per-trajectory summary, kept even when contours are not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryInfo {
    pub energy: f64,
    /// Period in scaled time τ (0 for fixed points).
    pub period_tau: f64,
    pub vertices: usize,
    pub fixed_point: bool,
    pub near_stationary: bool,
}

impl TrajectoryInfo {
    fn of(c: &Contour, scale: f64) -> Self {
        Self {
            energy: c.energy,
            period_tau: c.period * scale,
            vertices: c.len(),
            fixed_point: c.fixed_point,
            near_stationary: c.near_stationary,
        }
    }
}

pub struct TrajectoryEnsemble {
    pub params: ModelParams,
    pub seeds: TrajectorySeedGrid,
    /// Deposition kernel widths (σ_x, σ_p), the seed spacings.
    pub kernel: (f64, f64),
    tracer: ContourTracer,
    contours: Option<Vec<Contour>>,
}

impl TrajectoryEnsemble {
    /// Builds the ensemble; with `store` the contours are traced now and kept,
    /// otherwise they are traced on demand.
    pub fn new(params: &ModelParams, seeds: TrajectorySeedGrid, config: ContourConfig, store: bool) -> Result<Self> {
        let tracer = ContourTracer::new(params, config);
        let kernel = seeds.spacing();
        let mut ens = Self { params: *params, seeds, kernel, tracer, contours: None };
        if store {
            let chunks = ens.map_chunks(|_, cs| Ok(cs.to_vec()))?;
            ens.contours = Some(chunks.into_iter().flatten().collect());
        }
        Ok(ens)
    }

    /// Ensemble with already traced contours (e.g. loaded from a cache file).
    pub fn from_contours(
        params: &ModelParams,
        seeds: TrajectorySeedGrid,
        config: ContourConfig,
        contours: Vec<Contour>,
    ) -> Result<Self> {
        if contours.len() != seeds.len() {
            return Err(Error::DimensionMismatch { expected: seeds.len(), got: contours.len() });
        }
        let tracer = ContourTracer::new(params, ContourConfig { working_grid: 16, ..config });
        let kernel = seeds.spacing();
        Ok(Self { params: *params, seeds, kernel, tracer, contours: Some(contours) })
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn contours(&self) -> Option<&[Contour]> {
        self.contours.as_deref()
    }

    pub fn tracer(&self) -> &ContourTracer {
        &self.tracer
    }

    /// Unscaled time per unit τ.
    fn time_per_tau(&self) -> f64 {
        1.0 / self.params.energy_scale()
    }

    /// Applies `f(first_index, contours)` to fixed-size chunks in parallel and
    /// returns the results in chunk order.
    pub fn map_chunks<R: Send>(&self, f: impl Fn(usize, &[Contour]) -> Result<R> + Sync) -> Result<Vec<R>> {
        let n = self.len();
        let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
        starts
            .into_par_iter()
            .map(|s| {
                let e = (s + CHUNK).min(n);
                match &self.contours {
                    Some(cs) => f(s, &cs[s..e]),
                    None => {
                        let traced = (s..e)
                            .map(|l| self.tracer.trace(self.seeds.xs[l], self.seeds.ps[l]))
                            .collect::<Result<Vec<_>>>()?;
                        f(s, &traced)
                    }
                }
            })
            .collect()
    }

    pub fn infos(&self) -> Result<Vec<TrajectoryInfo>> {
        let scale = self.params.energy_scale();
        let chunks =
            self.map_chunks(|_, cs| Ok(cs.iter().map(|c| TrajectoryInfo::of(c, scale)).collect::<Vec<_>>()))?;
        Ok(chunks.into_iter().flatten().collect())
    }

    /// Positions at scaled time τ.
    pub fn evolve(&self, tau: f64) -> Result<Vec<(f64, f64)>> {
        Ok(self.evolve_many(&[tau])?.pop().unwrap())
    }

    /// Positions at each τ in `taus` (outer index τ).
    pub fn evolve_many(&self, taus: &[f64]) -> Result<Vec<Vec<(f64, f64)>>> {
        let k = self.time_per_tau();
        let chunks = self.map_chunks(|_, cs| {
            Ok(taus.iter().map(|&tau| cs.iter().map(|c| c.position(tau * k)).collect::<Vec<_>>()).collect::<Vec<_>>())
        })?;
        let mut out = vec![Vec::with_capacity(self.len()); taus.len()];
        for chunk in chunks {
            for (o, c) in out.iter_mut().zip(chunk) {
                o.extend(c);
            }
        }
        Ok(out)
    }

    /// One pass over all trajectories: survival series on `taus`, positions at
    /// `snapshot_taus`, and per-trajectory summaries.
    pub fn run(&self, overlap: &OverlapKernel, taus: &[f64], snapshot_taus: &[f64]) -> Result<TwaOutput> {
        let k = self.time_per_tau();
        let scale = self.params.energy_scale();
        let w = &self.seeds.weights;
        let chunks = self.map_chunks(|s, cs| {
            let mut sums = vec![0.0; taus.len()];
            let mut s0 = 0.0;
            for (c, &wl) in cs.iter().zip(&w[s..]) {
                s0 += wl * overlap.eval(c.xs[0], c.ps[0]);
                for (acc, &tau) in sums.iter_mut().zip(taus) {
                    let (x, p) = c.position(tau * k);
                    *acc += wl * overlap.eval(x, p);
                }
            }
            let snaps: Vec<Vec<(f64, f64)>> =
                snapshot_taus.iter().map(|&tau| cs.iter().map(|c| c.position(tau * k)).collect()).collect();
            let infos: Vec<TrajectoryInfo> = cs.iter().map(|c| TrajectoryInfo::of(c, scale)).collect();
            Ok((s0, sums, snaps, infos))
        })?;

        let mut s0 = 0.0;
        let mut sums = vec![0.0; taus.len()];
        let mut snapshots = vec![Vec::with_capacity(self.len()); snapshot_taus.len()];
        let mut infos = Vec::with_capacity(self.len());
        for (c0, cs, snaps, inf) in chunks {
            s0 += c0;
            sums.iter_mut().zip(&cs).for_each(|(a, b)| *a += b);
            snapshots.iter_mut().zip(snaps).for_each(|(a, b)| a.extend(b));
            infos.extend(inf);
        }
        if s0 <= 0.0 {
            return Err(Error::EmptySupport { threshold: self.seeds.threshold });
        }
        let g = &overlap.field.grid;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * g.cell_area() * s0);
        Ok(TwaOutput { survival: sums.iter().map(|s| s / s0).collect(), snapshots, infos, norm })
    }

    /// P_cl on `taus`, normalized so that P_cl(0) = 1.
    pub fn survival_series(&self, overlap: &OverlapKernel, taus: &[f64]) -> Result<Vec<f64>> {
        Ok(self.run(overlap, taus, &[])?.survival)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwaOutput {
    pub survival: Vec<f64>,
    pub snapshots: Vec<Vec<(f64, f64)>>,
    pub infos: Vec<TrajectoryInfo>,
    /// Deposition prefactor N₀ fixed by P_cl(0) = 1 on the overlap grid.
    pub norm: f64,
}

/// Separable truncated Gaussian weights along one grid axis.
struct AxisWeights {
    start: usize,
    w: Vec<f64>,
}

fn axis_weights(z: f64, min: f64, step: f64, len: usize, sigma: f64, out: &mut AxisWeights) {
    out.w.clear();
    let reach = KERNEL_REACH * sigma;
    let lo = ((z - reach - min) / step).ceil().max(0.0);
    let hi = ((z + reach - min) / step).floor().min(len as f64 - 1.0);
    if hi < lo {
        out.start = 0;
        return;
    }
    out.start = lo as usize;
    // e^{-(d+h)²/2σ²} = e^{-d²/2σ²} · r, r ← r · e^{-h²/σ²}
    let a = 0.5 / (sigma * sigma);
    let d0 = min + lo * step - z;
    let mut g = (-a * d0 * d0).exp();
    let mut r = (-a * (2.0 * d0 * step + step * step)).exp();
    let q = (-2.0 * a * step * step).exp();
    for _ in lo as usize..=hi as usize {
        out.w.push(g);
        g *= r;
        r *= q;
    }
}

/// K(z) = Σ_g W_i(g) G_σ(g − z): the initial Wigner field smoothed by the
/// deposition kernel, so that P_cl(τ) ∝ Σ_l w_l K(z_l(τ)) without depositing
/// the evolved field.
pub struct OverlapKernel {
    pub field: PhaseField,
    pub sigma: (f64, f64),
}

impl OverlapKernel {
    /// `w_i` on the evaluation grid; points outside the classical disk are masked.
    pub fn new(w_i: &PhaseField, sigma: (f64, f64), m: u32) -> Self {
        let mut field = w_i.clone();
        field.mask_domain(m);
        Self { field, sigma }
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let g = &self.field.grid;
        thread_local! {
            static BUF: std::cell::RefCell<(AxisWeights, AxisWeights)> =
                const { std::cell::RefCell::new((AxisWeights { start: 0, w: Vec::new() }, AxisWeights { start: 0, w: Vec::new() })) };
        }
        BUF.with(|b| {
            let (ax, ap) = &mut *b.borrow_mut();
            axis_weights(x, g.x_min, g.dx(), g.nx, self.sigma.0, ax);
            axis_weights(p, g.p_min, g.dp(), g.np, self.sigma.1, ap);
            let mut sum = 0.0;
            for (i, wx) in ax.w.iter().enumerate() {
                let row = &self.field.row(ax.start + i)[ap.start..ap.start + ap.w.len()];
                let inner: f64 = row.iter().zip(&ap.w).map(|(v, wp)| v * wp).sum();
                sum += wx * inner;
            }
            sum
        })
    }
}

/// Workers' deposition buffers; fixed so the merge order never changes.
const DEPOSIT_BUCKETS: usize = 16;

/// W(x,p) = norm · Σ_l w_l exp(−(x−x_l)²/2σ_x² − (p−p_l)²/2σ_p²) on `grid`.
pub fn deposit_wigner(
    positions: &[(f64, f64)],
    weights: &[f64],
    sigma: (f64, f64),
    norm: f64,
    grid: &PhaseGrid,
) -> PhaseField {
    let n = positions.len();
    let per = n.div_ceil(DEPOSIT_BUCKETS).max(1);
    let buffers: Vec<Vec<f64>> = (0..DEPOSIT_BUCKETS)
        .into_par_iter()
        .map(|b| {
            let mut buf = vec![0.0; grid.len()];
            let mut ax = AxisWeights { start: 0, w: Vec::new() };
            let mut ap = AxisWeights { start: 0, w: Vec::new() };
            for l in (b * per).min(n)..((b + 1) * per).min(n) {
                let (x, p) = positions[l];
                axis_weights(x, grid.x_min, grid.dx(), grid.nx, sigma.0, &mut ax);
                axis_weights(p, grid.p_min, grid.dp(), grid.np, sigma.1, &mut ap);
                for (i, wx) in ax.w.iter().enumerate() {
                    let base = (ax.start + i) * grid.np + ap.start;
                    let scale = weights[l] * wx;
                    for (k, wp) in ap.w.iter().enumerate() {
                        buf[base + k] += scale * wp;
                    }
                }
            }
            buf
        })
        .collect();
    let mut values = vec![0.0; grid.len()];
    for buf in buffers {
        values.iter_mut().zip(buf).for_each(|(v, b)| *v += b);
    }
    values.iter_mut().for_each(|v| *v *= norm);
    PhaseField::new(*grid, values, FieldKind::Wigner)
}

/// P_cl = 2π Σ W_i W_t Δx Δp.
pub fn classical_survival(w_i: &PhaseField, w_t: &PhaseField) -> Result<f64> {
    w_i.overlap(w_t)
}
