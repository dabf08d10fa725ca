use crate::error::{Error, Result};

/// Regular rectangular (x, p) grid; both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub np: usize,
}

impl PhaseGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize, p_min: f64, p_max: f64, np: usize) -> Result<Self> {
        if nx < 2 || np < 2 {
            return Err(Error::InvalidParams(format!("grid needs at least 2x2 points, got {nx}x{np}")));
        }
        if !(x_max > x_min && p_max > p_min) {
            return Err(Error::InvalidParams("grid bounds must be increasing".into()));
        }
        Ok(Self { x_min, x_max, nx, p_min, p_max, np })
    }

    /// Grid with the given spacings whose midpoint is `(xc, pc)`.
    pub fn centered(xc: f64, pc: f64, nx: usize, np: usize, dx: f64, dp: f64) -> Result<Self> {
        let hx = 0.5 * dx * (nx as f64 - 1.0);
        let hp = 0.5 * dp * (np as f64 - 1.0);
        Self::new(xc - hx, xc + hx, nx, pc - hp, pc + hp, np)
    }

    /// Square box enclosing the classical disk x² + p² ≤ 2M.
    pub fn domain_box(m: u32, nx: usize, np: usize) -> Result<Self> {
        let r = (2.0 * m as f64).sqrt().max(1.0);
        Self::new(-r, r, nx, -r, r, np)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx as f64 - 1.0)
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np as f64 - 1.0)
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dp()
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn p(&self, ip: usize) -> f64 {
        self.p_min + ip as f64 * self.dp()
    }

    pub fn len(&self) -> usize {
        self.nx * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, ip: usize) -> usize {
        ix * self.np + ip
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.nx).flat_map(move |ix| (0..self.np).map(move |ip| (self.x(ix), self.p(ip))))
    }

    /// Same grid with each spacing halved (points doubled minus one).
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx - 1, np: 2 * self.np - 1, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Wigner,
    Husimi,
    ClassicalHamiltonian,
    QuasipotentialRow,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Wigner => "wigner",
            FieldKind::Husimi => "husimi",
            FieldKind::ClassicalHamiltonian => "classical_hamiltonian",
            FieldKind::QuasipotentialRow => "quasipotential_row",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Self::Wigner, Self::Husimi, Self::ClassicalHamiltonian, Self::QuasipotentialRow]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// Scalar field sampled on a [`PhaseGrid`], stored row-major with x as the
/// slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub kind: FieldKind,
    pub tau: f64,
}

impl PhaseField {
    pub fn new(grid: PhaseGrid, values: Vec<f64>, kind: FieldKind) -> Self {
        assert_eq!(values.len(), grid.len());
        Self { grid, values, kind, tau: 0.0 }
    }

    pub fn from_fn(grid: PhaseGrid, kind: FieldKind, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.points().map(|(x, p)| f(x, p)).collect();
        Self::new(grid, values, kind)
    }

    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[self.grid.index(ix, ip)]
    }

    pub fn row(&self, ix: usize) -> &[f64] {
        &self.values[ix * self.grid.np..(ix + 1) * self.grid.np]
    }

    /// Riemann sum ∫∫ f dx dp, rows reduced in index order.
    pub fn integral(&self) -> f64 {
        let rows: f64 = (0..self.grid.nx).map(|ix| self.row(ix).iter().sum::<f64>()).sum();
        rows * self.grid.cell_area()
    }

    /// 2π ∫∫ f g dx dp on a shared grid.
    pub fn overlap(&self, other: &PhaseField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let np = self.grid.np;
        let sum: f64 = (0..self.grid.nx)
            .map(|ix| {
                let a = &self.values[ix * np..(ix + 1) * np];
                let b = &other.values[ix * np..(ix + 1) * np];
                a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>()
            })
            .sum();
        Ok(2.0 * std::f64::consts::PI * sum * self.grid.cell_area())
    }

    /// 2π ∫∫ W² dx dp, equal to 1 for a pure state's Wigner function.
    pub fn purity(&self) -> f64 {
        self.overlap(self).unwrap()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Zeroes every point outside the disk x² + p² ≤ 2M.
    pub fn mask_domain(&mut self, m: u32) {
        let r2 = 2.0 * m as f64;
        let grid = self.grid;
        for (v, (x, p)) in self.values.iter_mut().zip(grid.points()) {
            if x * x + p * p > r2 {
                *v = 0.0;
            }
        }
    }

    /// Σ |f − g| dx dp.
    pub fn l1_distance(&self, other: &PhaseField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum();
        Ok(s * self.grid.cell_area())
    }

    /// Bilinear interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64, p: f64) -> f64 {
        let g = &self.grid;
        let fx = (x - g.x_min) / g.dx();
        let fp = (p - g.p_min) / g.dp();
        if fx < 0.0 || fp < 0.0 || fx > (g.nx - 1) as f64 || fp > (g.np - 1) as f64 {
            return 0.0;
        }
        let ix = (fx.floor() as usize).min(g.nx - 2);
        let ip = (fp.floor() as usize).min(g.np - 2);
        let (tx, tp) = (fx - ix as f64, fp - ip as f64);
        (1.0 - tx) * (1.0 - tp) * self.at(ix, ip)
            + tx * (1.0 - tp) * self.at(ix + 1, ip)
            + (1.0 - tx) * tp * self.at(ix, ip + 1)
            + tx * tp * self.at(ix + 1, ip + 1)
    }
}
