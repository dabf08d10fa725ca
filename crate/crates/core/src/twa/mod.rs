//! Truncated Wigner approximation: the initial Wigner function is sampled on a
//! seed grid and each sample is carried along its classical energy contour.

pub mod cache;
pub mod contour;
pub mod ensemble;
pub mod seeds;

pub use contour::{parametrize_time, trace_equienergy_contour, Contour, ContourConfig, ContourTracer};
pub use ensemble::{classical_survival, deposit_wigner, OverlapKernel, TrajectoryEnsemble, TrajectoryInfo, TwaOutput};
pub use seeds::{seed_trajectories, seeds_from_field, SeedGridConfig, TrajectorySeedGrid};

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::phase_space::classical::bisect;

impl ContourTracer {
    /// Scaled period τ(E) of the contour at energy `e` crossing the p = 0 line
    /// nearest to `anchor_x`.
    pub fn period_of_energy(&self, e: f64, anchor_x: f64) -> Result<f64> {
        let ham = &self.ham;
        let r = ham.boundary_r2().sqrt();
        let f = |x: f64| ham.value_clamped(x, 0.0) - e;
        let h = self.spacing();
        let steps = (2.0 * r / h).ceil() as usize + 1;
        let mut root = None;
        for s in 0..steps {
            let (a, b) = (anchor_x + s as f64 * h, anchor_x + (s + 1) as f64 * h);
            if b.abs() <= r || a.abs() <= r {
                if let Some(x) = bisect(f, a.clamp(-r, r), b.clamp(-r, r), 1e-14 * r) {
                    root = Some(x);
                    break;
                }
            }
            let (a, b) = (anchor_x - (s + 1) as f64 * h, anchor_x - s as f64 * h);
            if b.abs() <= r || a.abs() <= r {
                if let Some(x) = bisect(f, a.clamp(-r, r), b.clamp(-r, r), 1e-14 * r) {
                    root = Some(x);
                    break;
                }
            }
        }
        let x = root.ok_or_else(|| Error::InvalidParams(format!("energy {e} not attained on the p = 0 line")))?;
        let c = match self.trace(x, 0.0) {
            Ok(c) => c,
            Err(Error::StationarySeed { .. }) => return Err(Error::StationaryEnergy { energy: e }),
            Err(err) => return Err(err),
        };
        if c.fixed_point || c.near_stationary {
            return Err(Error::StationaryEnergy { energy: e });
        }
        Ok(c.period * ham.params.energy_scale())
    }
}

/// Scaled period τ(E) of the contour at energy `e` through the p = 0 line
/// nearest `anchor_x` (the packet centre).
pub fn classical_period_of_energy(params: &ModelParams, e: f64, anchor_x: f64) -> Result<f64> {
    ContourTracer::new(params, ContourConfig::default()).period_of_energy(e, anchor_x)
}
