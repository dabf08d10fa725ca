use crate::error::{Error, Result};
use crate::phase_space::{gaussian_moments, FieldKind, GaussianSummary, PhaseField, PhaseGrid};

/// Seed-grid layout. Unless spacings are given explicitly the grid spans
/// `box_sigmas` standard deviations of W_i on each side of its centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedGridConfig {
    pub nx: usize,
    pub np: usize,
    pub box_sigmas: f64,
    pub dx: Option<f64>,
    pub dp: Option<f64>,
    /// Seeds with W_i ≤ threshold · max W_i are dropped.
    pub threshold: f64,
}

impl Default for SeedGridConfig {
    fn default() -> Self {
        Self { nx: 255, np: 250, box_sigmas: 4.0, dx: None, dp: None, threshold: 1e-4 }
    }
}

impl SeedGridConfig {
    pub fn grid_for(&self, summary: &GaussianSummary) -> Result<PhaseGrid> {
        let span = |n: usize, sigma: f64| 2.0 * self.box_sigmas * sigma / (n as f64 - 1.0);
        let dx = self.dx.unwrap_or_else(|| span(self.nx, summary.sigma_x));
        let dp = self.dp.unwrap_or_else(|| span(self.np, summary.sigma_p));
        if !(dx > 0.0 && dp > 0.0) {
            return Err(Error::InvalidParams("seed spacings must be positive".into()));
        }
        PhaseGrid::centered(summary.x0, summary.p0, self.nx, self.np, dx, dp)
    }
}

/// Retained seeds with their W_i weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySeedGrid {
    pub grid: PhaseGrid,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub weights: Vec<f64>,
    pub threshold: f64,
}

impl TrajectorySeedGrid {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Seed spacings, used as deposition kernel widths.
    pub fn spacing(&self) -> (f64, f64) {
        (self.grid.dx(), self.grid.dp())
    }
}

/// Seeds on a grid derived from the moments of `w_i`, weighted by W_i
/// interpolated from its own grid.
pub fn seed_trajectories(w_i: &PhaseField, cfg: &SeedGridConfig, m: u32) -> Result<TrajectorySeedGrid> {
    let grid = cfg.grid_for(&gaussian_moments(w_i))?;
    let sampled = if grid == w_i.grid {
        w_i.clone()
    } else {
        PhaseField::from_fn(grid, FieldKind::Wigner, |x, p| w_i.interpolate(x, p))
    };
    seeds_from_field(&sampled, cfg.threshold, m)
}

/// Seeds at every point of `field` above the relative threshold and inside the
/// classical disk x² + p² ≤ 2M.
pub fn seeds_from_field(field: &PhaseField, threshold: f64, m: u32) -> Result<TrajectorySeedGrid> {
    let cut = threshold * field.max();
    let r2 = 2.0 * m as f64;
    let g = field.grid;
    let (mut xs, mut ps, mut weights) = (Vec::new(), Vec::new(), Vec::new());
    for ((x, p), &w) in g.points().zip(&field.values) {
        if w > cut && x * x + p * p <= r2 {
            xs.push(x);
            ps.push(p);
            weights.push(w);
        }
    }
    if xs.is_empty() {
        return Err(Error::EmptySupport { threshold });
    }
    Ok(TrajectorySeedGrid { grid: g, xs, ps, weights, threshold })
}
