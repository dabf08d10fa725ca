//! Binary ensemble cache: traced contours can be reloaded for new τ sweeps.
//!
//! Layout (little endian): magic, format version, model parameters, seed grid,
//! then per trajectory its seed, weight, contour header and vertex arrays.

use std::io::{Read, Write};

use super::contour::{Contour, ContourConfig};
use super::ensemble::TrajectoryEnsemble;
use super::seeds::TrajectorySeedGrid;
use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::phase_space::PhaseGrid;

const MAGIC: &[u8; 8] = b"TCQENS\0\0";
pub const FORMAT_VERSION: u32 = 1;

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.0.write_all(&v.to_le_bytes())?)
    }
    fn f64s(&mut self, v: &[f64]) -> Result<()> {
        v.iter().try_for_each(|&x| self.f64(x))
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

fn corrupt(msg: &str) -> Error {
    Error::Parse { line: 0, msg: format!("ensemble cache: {msg}") }
}

/// Writes an ensemble whose contours are stored.
pub fn write_cache(ens: &TrajectoryEnsemble, out: impl Write) -> Result<()> {
    let contours = ens.contours().ok_or_else(|| Error::InvalidParams("ensemble keeps no contours to cache".into()))?;
    let mut w = Writer(out);
    w.0.write_all(MAGIC)?;
    w.0.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let p = &ens.params;
    w.f64s(&[p.j(), p.omega, p.omega0, p.m() as f64, p.lambda])?;
    let g = &ens.seeds.grid;
    w.f64s(&[g.x_min, g.x_max, g.nx as f64, g.p_min, g.p_max, g.np as f64, ens.seeds.threshold])?;
    w.u64(ens.len() as u64)?;
    for (l, c) in contours.iter().enumerate() {
        w.f64s(&[ens.seeds.xs[l], ens.seeds.ps[l], ens.seeds.weights[l], c.energy, c.period])?;
        w.u64(c.fixed_point as u64 | (c.near_stationary as u64) << 1)?;
        w.u64(c.len() as u64)?;
        w.f64s(&c.xs)?;
        w.f64s(&c.ps)?;
        w.f64s(&c.ts)?;
    }
    Ok(())
}

/// Reads a cache written for `params`; a mismatch in any model parameter is an error.
pub fn read_cache(params: &ModelParams, config: ContourConfig, input: impl Read) -> Result<TrajectoryEnsemble> {
    let mut r = Reader(input);
    if &r.bytes::<8>()? != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(r.bytes()?);
    if version != FORMAT_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let stored = r.f64s(5)?;
    let want = [params.j(), params.omega, params.omega0, params.m() as f64, params.lambda];
    if stored != want {
        return Err(Error::InvalidParams("ensemble cache was built for different model parameters".into()));
    }
    let g = r.f64s(7)?;
    let grid = PhaseGrid::new(g[0], g[1], g[2] as usize, g[3], g[4], g[5] as usize)?;
    let n = r.u64()? as usize;
    let mut seeds = TrajectorySeedGrid { grid, xs: vec![], ps: vec![], weights: vec![], threshold: g[6] };
    let mut contours = Vec::with_capacity(n);
    for _ in 0..n {
        let h = r.f64s(5)?;
        seeds.xs.push(h[0]);
        seeds.ps.push(h[1]);
        seeds.weights.push(h[2]);
        let flags = r.u64()?;
        let len = r.u64()? as usize;
        if len == 0 || len > 1 << 28 {
            return Err(corrupt("implausible vertex count"));
        }
        contours.push(Contour {
            energy: h[3],
            period: h[4],
            fixed_point: flags & 1 != 0,
            near_stationary: flags & 2 != 0,
            xs: r.f64s(len)?,
            ps: r.f64s(len)?,
            ts: r.f64s(len)?,
        });
    }
    TrajectoryEnsemble::from_contours(params, seeds, config, contours)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{FieldKind, PhaseField};
    use crate::twa::{seed_trajectories, SeedGridConfig};

    fn ensemble(params: &ModelParams) -> TrajectoryEnsemble {
        let g = PhaseGrid::new(-4.0, 4.0, 81, -4.0, 4.0, 81).unwrap();
        let w =
            PhaseField::from_fn(g, FieldKind::Wigner, |x, p| (-(x + 0.5).powi(2) - p * p).exp() / std::f64::consts::PI);
        let seeds =
            seed_trajectories(&w, &SeedGridConfig { nx: 15, np: 15, ..Default::default() }, params.m()).unwrap();
        TrajectoryEnsemble::new(params, seeds, config(), true).unwrap()
    }

    fn config() -> ContourConfig {
        ContourConfig { working_grid: 256, ..Default::default() }
    }

    #[test]
    fn round_trip() {
        let params = ModelParams::new(5.0, 2.0, 1.0, 8, 1.3).unwrap();
        let ens = ensemble(&params);
        let mut buf = Vec::new();
        write_cache(&ens, &mut buf).unwrap();
        let back = read_cache(&params, config(), buf.as_slice()).unwrap();
        assert_eq!(back.contours(), ens.contours());
        assert_eq!(back.seeds.weights, ens.seeds.weights);
        assert_eq!(back.evolve(7.5).unwrap(), ens.evolve(7.5).unwrap());
    }

    #[test]
    fn rejects_other_params_and_garbage() {
        let params = ModelParams::new(5.0, 2.0, 1.0, 8, 1.3).unwrap();
        let mut buf = Vec::new();
        write_cache(&ensemble(&params), &mut buf).unwrap();
        let other = params.with_lambda(1.2);
        assert!(read_cache(&other, config(), buf.as_slice()).err().unwrap().is_validation());
        assert!(read_cache(&params, config(), &buf[..buf.len() / 2]).is_err());
        let mut bad = buf.clone();
        bad[0] ^= 0xff;
        assert!(read_cache(&params, config(), bad.as_slice()).is_err());
    }

    #[test]
    fn streaming_ensembles_cannot_be_cached() {
        let params = ModelParams::new(5.0, 2.0, 1.0, 8, 1.3).unwrap();
        let ens = ensemble(&params);
        let lazy = TrajectoryEnsemble::new(&params, ens.seeds.clone(), config(), false).unwrap();
        assert!(write_cache(&lazy, Vec::new()).is_err());
    }
}
