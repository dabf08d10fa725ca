//! Gaussian-packet decay laws for non-critical quenches and fitting utilities
//! for survival series.
//!
//! Near the packet centre (x₀, 0) the classical Hamiltonian is taken as
//! E₀ + V'(x − x₀) and the period as τ(E) = τ₀ + β(E − E₀). Integrating the
//! overlap of two Gaussians over the energy shells then gives
//!
//!   P(t ≈ nτ₀) = P(0) / √(1 + b²n²),   b = V'² σ_x β_t / (2σ_p),
//!
//! with β_t the period slope in unscaled time. For b n ≫ 1 this approaches
//! 4π²𝒩²σ_p² / (V'² n |β_t|), the 1/n envelope.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::hilbert::ModelParams;
use crate::phase_space::{ClassicalHamiltonian, GaussianSummary};
use crate::twa::{ContourConfig, ContourTracer};

/// Inputs of the Gaussian-packet decay model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayModelParams {
    /// Packet-centre energy H(x₀, 0).
    pub e0: f64,
    /// |v'(x₀)|, energy per unit x.
    pub vprime: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
    /// dτ/dE: scaled period per unit energy.
    pub beta: f64,
    /// Scaled period at E₀.
    pub tau0: f64,
    /// Gaussian prefactor 𝒩 of W_i.
    pub norm_n: f64,
    /// ω₀ j, the factor between τ and t.
    pub energy_scale: f64,
}

impl DecayModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_x > 0.0 && self.sigma_p > 0.0) {
            return Err(Error::InvalidParams("packet widths must be positive".into()));
        }
        if !(self.tau0 > 0.0) {
            return Err(Error::InvalidParams("period tau0 must be positive".into()));
        }
        if !(self.energy_scale > 0.0) {
            return Err(Error::InvalidParams("energy scale must be positive".into()));
        }
        Ok(())
    }

    /// Period slope in unscaled time per unit energy.
    pub fn beta_unscaled(&self) -> f64 {
        self.beta / self.energy_scale
    }

    /// Overlap at τ = 0 of the Gaussian with itself.
    pub fn p0(&self) -> f64 {
        2.0 * PI * PI * self.norm_n * self.norm_n * self.sigma_x * self.sigma_p
    }

    /// b in P_n = P(0)/√(1 + b²n²).
    pub fn dephasing_rate(&self) -> f64 {
        self.vprime * self.vprime * self.sigma_x * self.beta_unscaled().abs() / (2.0 * self.sigma_p)
    }

    /// α of exp(−α τ²): V'² / (4σ_p² (ω₀ j)²).
    pub fn initial_decay_rate(&self) -> f64 {
        let v = self.vprime / self.energy_scale;
        v * v / (4.0 * self.sigma_p * self.sigma_p)
    }

    fn is_stationary(&self) -> bool {
        self.vprime * self.sigma_x <= 1e-9 * self.energy_scale
    }
}

/// P(τ) = exp(−V'² t² / 4σ_p²), t = τ/(ω₀ j).
pub fn predict_initial_decay(m: &DecayModelParams, taus: &[f64]) -> Result<Vec<f64>> {
    m.validate()?;
    if m.is_stationary() {
        return Err(Error::StationaryCenter { slope: m.vprime });
    }
    let alpha = m.initial_decay_rate();
    Ok(taus.iter().map(|t| (-alpha * t * t).exp()).collect())
}

/// Default factor by which n|β| must exceed (σ_p/σ_x)·2/V'².
pub const VALIDITY_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedPeak {
    pub n: u32,
    pub tau: f64,
    pub height: f64,
}

/// Asymptotic 1/n revival envelope at τ_n = n τ₀. The smallest requested n
/// must satisfy n|β_t| > margin · (σ_p/σ_x) · 2/V'².
pub fn predict_power_law(m: &DecayModelParams, ns: &[u32], margin: f64) -> Result<Vec<PredictedPeak>> {
    m.validate()?;
    if m.is_stationary() {
        return Err(Error::StationaryCenter { slope: m.vprime });
    }
    let Some(&n_min) = ns.iter().min() else { return Ok(Vec::new()) };
    let beta = m.beta_unscaled().abs();
    let lhs = n_min as f64 * beta;
    let rhs = (m.sigma_p / m.sigma_x) * 2.0 / (m.vprime * m.vprime);
    if n_min == 0 || !(lhs > margin * rhs) {
        return Err(Error::ValidityViolated { lhs, rhs, margin });
    }
    let c = 4.0 * PI * PI * m.norm_n * m.norm_n * m.sigma_p * m.sigma_p / (m.vprime * m.vprime * beta);
    Ok(ns.iter().map(|&n| PredictedPeak { n, tau: n as f64 * m.tau0, height: c / n as f64 }).collect())
}

/// Finite-n revival heights P(0)/√(1 + b²n²), valid for every n ≥ 0.
pub fn predict_revival_envelope(m: &DecayModelParams, ns: &[u32]) -> Result<Vec<PredictedPeak>> {
    m.validate()?;
    let (p0, b) = (m.p0(), m.dephasing_rate());
    Ok(ns
        .iter()
        .map(|&n| PredictedPeak { n, tau: n as f64 * m.tau0, height: p0 / (1.0 + (b * n as f64).powi(2)).sqrt() })
        .collect())
}

/// Relative RMS residual above which periods are reported as nonlinear in energy.
pub const NONLINEAR_RESIDUAL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodFit {
    /// Energy at which `tau0` is quoted (window centre).
    pub e_ref: f64,
    /// Fitted scaled period at `e_ref`.
    pub tau0: f64,
    /// dτ/dE.
    pub beta: f64,
    /// RMS residual over mean period.
    pub residual: f64,
    /// Residual above [`NONLINEAR_RESIDUAL`], or a stationary energy inside the window.
    pub nonlinear: bool,
    /// (E, τ(E)) samples that entered the fit.
    pub samples: Vec<(f64, f64)>,
    pub stationary_samples: usize,
}

/// Least-squares line τ(E) ≈ τ₀ + β(E − E_ref) through periods of the
/// contours crossing p = 0 nearest `anchor_x`, sampled uniformly over `window`.
pub fn fit_period_linearization(
    params: &ModelParams,
    window: (f64, f64),
    anchor_x: f64,
    samples: usize,
    config: ContourConfig,
) -> Result<PeriodFit> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) || samples < 3 {
        return Err(Error::InvalidParams("period fit needs a proper energy window and at least 3 samples".into()));
    }
    let tracer = ContourTracer::new(params, config);
    let mut pts = Vec::with_capacity(samples);
    let mut stationary = 0;
    for i in 0..samples {
        let e = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        match tracer.period_of_energy(e, anchor_x) {
            Ok(t) => pts.push((e, t)),
            Err(Error::StationaryEnergy { .. }) => stationary += 1,
            Err(err) => return Err(err),
        }
    }
    if pts.len() < 3 {
        return Err(Error::StationaryEnergy { energy: 0.5 * (lo + hi) });
    }
    let e_ref = 0.5 * (lo + hi);
    let (a, b) = least_squares(pts.iter().map(|&(e, t)| (e - e_ref, t)));
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let rms = (pts.iter().map(|&(e, t)| (t - a - b * (e - e_ref)).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    let residual = rms / mean;
    Ok(PeriodFit {
        e_ref,
        tau0: a,
        beta: b,
        residual,
        nonlinear: residual > NONLINEAR_RESIDUAL || stationary > 0,
        samples: pts,
        stationary_samples: stationary,
    })
}

/// Intercept and slope of the least-squares line y = a + b x.
fn least_squares(pts: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in pts {
        n += 1.0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let den = n * sxx - sx * sx;
    let b = if den.abs() > 0.0 { (n * sxy - sx * sy) / den } else { 0.0 };
    ((sy - b * sx) / n, b)
}

/// Number of energy standard deviations on each side of E₀ used for β.
pub const PERIOD_WINDOW_SIGMAS: f64 = 2.0;

/// Measures every model input from the final Hamiltonian and the initial
/// packet: E₀ and V' from the quasipotential at x₀, widths from the packet,
/// τ₀ and β from contour periods over E₀ ± 2 V'σ_x.
pub fn measure_decay_model(
    params_f: &ModelParams,
    packet: &GaussianSummary,
    config: ContourConfig,
) -> Result<(DecayModelParams, PeriodFit)> {
    let ham = ClassicalHamiltonian::new(params_f);
    let x0 = packet.x0;
    let e0 = ham.value(x0, 0.0)?;
    let vprime = ham.quasipotential_slope(x0).abs();
    let half = PERIOD_WINDOW_SIGMAS * vprime * packet.sigma_x;
    if half <= 1e-9 * params_f.energy_scale() {
        return Err(Error::StationaryCenter { slope: vprime });
    }
    let fit = fit_period_linearization(params_f, (e0 - half, e0 + half), x0, 21, config)?;
    let tau0 = ContourTracer::new(params_f, config).period_of_energy(e0, x0)?;
    let model = DecayModelParams {
        e0,
        vprime,
        sigma_x: packet.sigma_x,
        sigma_p: packet.sigma_p,
        beta: fit.beta,
        tau0,
        norm_n: 1.0 / (2.0 * PI * packet.sigma_x * packet.sigma_p),
        energy_scale: params_f.energy_scale(),
    };
    Ok((model, fit))
}

/// Default minimum prominence of a revival peak.
pub const PEAK_PROMINENCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalPeak {
    pub tau: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Interior local maxima whose topographic prominence reaches `prominence`.
/// Flat tops count once, at their middle sample.
pub fn extract_revival_peaks(taus: &[f64], p: &[f64], prominence: f64) -> Result<Vec<RevivalPeak>> {
    if taus.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: taus.len(), got: p.len() });
    }
    let n = p.len();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if p[i] > p[i - 1] {
            let mut k = i;
            while k + 1 < n && p[k + 1] == p[i] {
                k += 1;
            }
            if k + 1 < n && p[k + 1] < p[i] {
                let prom = p[i] - left_base(p, i).max(right_base(p, k));
                if prom >= prominence {
                    let mid = (i + k) / 2;
                    peaks.push(RevivalPeak { tau: taus[mid], height: p[mid], prominence: prom });
                }
            }
            i = k + 1;
        } else {
            i += 1;
        }
    }
    if peaks.is_empty() {
        return Err(Error::NoPeaks);
    }
    Ok(peaks)
}

/// Lowest value between `i` and the nearest strictly higher sample on the left.
fn left_base(p: &[f64], i: usize) -> f64 {
    let mut lo = p[i];
    for &v in p[..i].iter().rev() {
        if v > p[i] {
            break;
        }
        lo = lo.min(v);
    }
    lo
}

fn right_base(p: &[f64], k: usize) -> f64 {
    let mut lo = p[k];
    for &v in &p[k + 1..] {
        if v > p[k] {
            break;
        }
        lo = lo.min(v);
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// Amplitude c of P = c τ^exponent.
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Least-squares slope of ln P against ln τ.
pub fn fit_power_law_exponent(peaks: &[RevivalPeak]) -> Result<PowerLawFit> {
    let usable: Vec<(f64, f64)> =
        peaks.iter().filter(|pk| pk.tau > 0.0 && pk.height > 0.0).map(|pk| (pk.tau.ln(), pk.height.ln())).collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientPeaks { needed: 3, found: usable.len() });
    }
    let (a, b) = least_squares(usable.iter().copied());
    Ok(PowerLawFit { exponent: b, prefactor: a.exp(), r_squared: r_squared(&usable, |x| a + b * x) })
}

fn r_squared(pts: &[(f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|&(x, y)| (y - model(x)).powi(2)).sum();
    if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDecayFit {
    /// α of exp(−α τ²).
    pub alpha: f64,
    /// R² of the fitted curve against P over the fitted samples.
    pub r_squared: f64,
    pub samples: usize,
    /// Last τ of the fitted region.
    pub tau_end: f64,
}

/// Fits exp(−α τ²) to the leading run of samples with P > `p_min`
/// (least squares on ln P through the origin).
pub fn fit_initial_decay(taus: &[f64], p: &[f64], p_min: f64) -> Result<GaussianDecayFit> {
    if taus.len() != p.len() {
        return Err(Error::DimensionMismatch { expected: taus.len(), got: p.len() });
    }
    let run = p.iter().take_while(|&&v| v > p_min).count();
    if run < 3 {
        return Err(Error::InvalidParams(format!("only {run} samples above P = {p_min} at the start of the series")));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..run {
        let t2 = taus[i] * taus[i];
        num += -p[i].ln() * t2;
        den += t2 * t2;
    }
    if den == 0.0 {
        return Err(Error::InvalidParams("initial decay window has zero width".into()));
    }
    let alpha = num / den;
    let pts: Vec<(f64, f64)> = (0..run).map(|i| (taus[i], p[i])).collect();
    Ok(GaussianDecayFit {
        alpha,
        r_squared: r_squared(&pts, |t| (-alpha * t * t).exp()),
        samples: run,
        tau_end: taus[run - 1],
    })
}

/// First τ at which the series falls to or below `level`, linearly interpolated.
pub fn first_crossing(taus: &[f64], p: &[f64], level: f64) -> Option<f64> {
    let i = p.iter().position(|&v| v <= level)?;
    if i == 0 {
        return Some(taus[0]);
    }
    let (t0, t1, p0, p1) = (taus[i - 1], taus[i], p[i - 1], p[i]);
    Some(t0 + (t1 - t0) * (p0 - level) / (p0 - p1))
}

/// Index of the first interior local minimum.
pub fn first_local_minimum(p: &[f64]) -> Option<usize> {
    (1..p.len().saturating_sub(1)).find(|&i| p[i] <= p[i - 1] && p[i] < p[i + 1])
}

/// Checks recorded in a fit report.
#[derive(Debug, Clone, PartialEq)]
pub struct FitCheck {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

/// Model inputs, fitted values, residuals and pass/fail lines in key = value form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitReport {
    pub values: Vec<(String, String)>,
    pub checks: Vec<FitCheck>,
}

impl FitReport {
    pub fn value(&mut self, key: &str, v: impl ToString) {
        self.values.push((key.into(), v.to_string()));
    }

    pub fn model(&mut self, m: &DecayModelParams) {
        self.value("E0", m.e0);
        self.value("Vprime", m.vprime);
        self.value("sigma_x", m.sigma_x);
        self.value("sigma_p", m.sigma_p);
        self.value("beta", m.beta);
        self.value("tau0", m.tau0);
        self.value("normN", m.norm_n);
        self.value("energy_scale", m.energy_scale);
    }

    /// Records whether |value − target| ≤ rel·|target|.
    pub fn check_relative(&mut self, name: &str, value: f64, target: f64, rel: f64) -> bool {
        let pass = (value - target).abs() <= rel * target.abs();
        self.checks.push(FitCheck { name: name.into(), value, target: format!("{target} ± {}%", rel * 100.0), pass });
        pass
    }

    pub fn check_below(&mut self, name: &str, value: f64, limit: f64) -> bool {
        let pass = value < limit;
        self.checks.push(FitCheck { name: name.into(), value, target: format!("< {limit}"), pass });
        pass
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        for (k, v) in &self.values {
            writeln!(w, "{k} = {v}")?;
        }
        for c in &self.checks {
            writeln!(w, "check.{} = {} ({}) {}", c.name, c.value, c.target, if c.pass { "pass" } else { "fail" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> DecayModelParams {
        DecayModelParams {
            e0: 0.0,
            vprime: 1.0,
            sigma_x: 0.5f64.sqrt(),
            sigma_p: 0.5f64.sqrt(),
            beta: 3.0,
            tau0: 344.0,
            norm_n: 1.0 / PI,
            energy_scale: 1.0,
        }
    }

    #[test]
    fn unit_gaussian_decay() {
        let taus: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let p = predict_initial_decay(&model(), &taus).unwrap();
        for (t, v) in taus.iter().zip(p) {
            assert!((v - (-t * t / 2.0).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn stationary_centre_rejected() {
        let m = DecayModelParams { vprime: 0.0, ..model() };
        assert!(matches!(predict_initial_decay(&m, &[1.0]), Err(Error::StationaryCenter { .. })));
        assert!(matches!(predict_power_law(&m, &[10], VALIDITY_MARGIN), Err(Error::StationaryCenter { .. })));
    }

    #[test]
    fn power_law_halves_and_checks_validity() {
        let m = model();
        let p = predict_power_law(&m, &[20, 40], VALIDITY_MARGIN).unwrap();
        assert_eq!(p[0].height, 2.0 * p[1].height);
        assert_eq!(p[1].tau, 40.0 * 344.0);
        // threshold: n β > 5 · 2 → n > 3.33
        assert!(matches!(predict_power_law(&m, &[3, 10], VALIDITY_MARGIN), Err(Error::ValidityViolated { .. })));
        assert!(predict_power_law(&m, &[4, 10], VALIDITY_MARGIN).is_ok());
    }

    #[test]
    fn envelope_tends_to_power_law() {
        let m = model();
        let ns = [0, 1000];
        let env = predict_revival_envelope(&m, &ns).unwrap();
        assert!((env[0].height - 1.0).abs() < 1e-12);
        let pl = predict_power_law(&m, &ns[1..], VALIDITY_MARGIN).unwrap();
        assert!((env[1].height / pl[0].height - 1.0).abs() < 1e-6);
    }

    /// Direct quadrature of 2π∫∫ W_i(x,p) W_i(x, p + V'(t − nτ(x))) at t = nτ₀
    /// for a linear H and linear τ(E).
    #[test]
    fn envelope_matches_direct_integral() {
        let m = DecayModelParams {
            vprime: 1.3,
            sigma_x: 0.6,
            sigma_p: 0.9,
            beta: 0.7,
            norm_n: 1.0 / (2.0 * PI * 0.54),
            ..model()
        };
        let w = |x: f64, p: f64| {
            m.norm_n * (-x * x / (2.0 * m.sigma_x * m.sigma_x) - p * p / (2.0 * m.sigma_p * m.sigma_p)).exp()
        };
        for n in [1u32, 3, 8] {
            let (h, l) = (0.01, 8.0);
            let k = (2.0 * l / h) as i64;
            let mut sum = 0.0;
            for a in 0..=k {
                let x = -l + a as f64 * h;
                let shift = -m.vprime * n as f64 * m.beta * m.vprime * x;
                for b in 0..=k {
                    let p = -l + b as f64 * h;
                    sum += w(x, p) * w(x, p + shift);
                }
            }
            let direct = 2.0 * PI * sum * h * h;
            let env = predict_revival_envelope(&m, &[n]).unwrap()[0].height;
            assert!((direct - env).abs() < 1e-6, "n={n}: {direct} vs {env}");
        }
    }

    #[test]
    fn scale_covariance() {
        let m = DecayModelParams { vprime: 3.0, beta: 2.0, energy_scale: 7.0, ..model() };
        let c = 2.5;
        // energies ×c, scaled periods per energy ÷c, scale ×c
        let s = DecayModelParams {
            e0: m.e0 * c,
            vprime: m.vprime * c,
            beta: m.beta / c,
            energy_scale: m.energy_scale * c,
            ..m
        };
        let taus = [0.0, 0.3, 1.1];
        assert_eq!(predict_initial_decay(&m, &taus).unwrap(), predict_initial_decay(&s, &taus).unwrap());
        let a = predict_power_law(&m, &[50], 5.0).unwrap()[0].height;
        let b = predict_power_law(&s, &[50], 5.0).unwrap()[0].height;
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    fn synthetic_revivals(heights: impl Fn(f64) -> f64, count: usize) -> (Vec<f64>, Vec<f64>) {
        let taus: Vec<f64> = (0..=count * 344 + 200).map(|i| i as f64).collect();
        let p = taus
            .iter()
            .map(|&t| (1..=count).map(|n| heights(n as f64) * (-((t - 344.0 * n as f64) / 8.0).powi(2)).exp()).sum())
            .collect();
        (taus, p)
    }

    #[test]
    fn synthetic_peaks_recovered() {
        let (taus, p) = synthetic_revivals(|n| 1.0 / n, 6);
        let peaks = extract_revival_peaks(&taus, &p, PEAK_PROMINENCE).unwrap();
        assert_eq!(peaks.len(), 6);
        for (n, pk) in peaks.iter().enumerate() {
            let n = (n + 1) as f64;
            assert_eq!(pk.tau, 344.0 * n);
            assert!((pk.height * n - 1.0).abs() < 0.01);
        }
        let fit = fit_power_law_exponent(&peaks).unwrap();
        assert!((fit.exponent + 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_series_has_no_peaks() {
        let taus: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(matches!(extract_revival_peaks(&taus, &vec![1.0; 100], PEAK_PROMINENCE), Err(Error::NoPeaks)));
    }

    #[test]
    fn too_few_peaks() {
        let pk = RevivalPeak { tau: 1.0, height: 1.0, prominence: 1.0 };
        assert!(matches!(fit_power_law_exponent(&[pk, pk]), Err(Error::InsufficientPeaks { needed: 3, found: 2 })));
    }

    #[test]
    fn gaussian_decay_fit_exact() {
        let taus: Vec<f64> = (0..200).map(|i| 0.05 * i as f64).collect();
        let p: Vec<f64> = taus.iter().map(|t| (-0.3 * t * t).exp()).collect();
        let fit = fit_initial_decay(&taus, &p, 0.5).unwrap();
        assert!((fit.alpha - 0.3).abs() < 1e-12);
        assert!(fit.r_squared > 1.0 - 1e-12);
        let cross = first_crossing(&taus, &p, 0.5).unwrap();
        assert!((cross - (2f64.ln() / 0.3).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn harmonic_periods_are_isochronous() {
        let p = ModelParams::new(50.0, 2.0, 1.0, 75, 0.0).unwrap();
        let fit = fit_period_linearization(&p, (60.0, 90.0), 2.0, 7, ContourConfig::default()).unwrap();
        assert!(fit.beta.abs() < 1e-6);
        assert!((fit.tau0 - 2.0 * PI * 50.0).abs() < 1e-3 * 2.0 * PI * 50.0);
        assert!(!fit.nonlinear);
    }

    #[test]
    fn report_lines() {
        let mut r = FitReport::default();
        r.model(&model());
        assert!(r.check_relative("alpha", 1.1, 1.0, 0.2));
        assert!(!r.check_below("residual", 0.03, 0.02));
        let mut out = Vec::new();
        r.write(&mut out).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.contains("tau0 = 344\n"));
        assert!(s.contains("check.residual = 0.03 (< 0.02) fail"));
        assert!(!r.all_pass());
    }
}
