//! `key = value` run configuration. Energies are in units of ω₀ (default 1),
//! times in scaled τ = ω₀ j t.

use serde::Deserialize;
use tcquench::analytics::{PEAK_PROMINENCE, VALIDITY_MARGIN};
use tcquench::hilbert::ModelParams;
use tcquench::protocols::{tune_backward_critical, EvalGridConfig, QuenchSpec};
use tcquench::spectral::critical_coupling;
use tcquench::twa::{ContourConfig, SeedGridConfig};
use tcquench::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub j: Option<f64>,
    pub omega: Option<f64>,
    pub omega0: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<i64>,
    pub lambda_i: Option<f64>,
    pub lambda_i_over_lambda_c: Option<f64>,
    pub lambda_f: Option<f64>,
    pub lambda_f_over_lambda_c: Option<f64>,
    /// Pick λ_f with the backward critical tuner.
    pub tune_lambda_f: Option<bool>,
    pub identity_run: Option<bool>,
    pub tau_max: Option<f64>,
    pub tau_samples: Option<usize>,
    pub eval_nx: Option<usize>,
    pub eval_np: Option<usize>,
    pub eval_dx: Option<f64>,
    pub eval_dp: Option<f64>,
    pub seed_nx: Option<usize>,
    pub seed_np: Option<usize>,
    pub seed_dx: Option<f64>,
    pub seed_dp: Option<f64>,
    pub seed_box_sigmas: Option<f64>,
    pub seed_threshold: Option<f64>,
    pub working_grid: Option<usize>,
    pub g_min: Option<f64>,
    pub t_cap: Option<f64>,
    pub level_tol: Option<f64>,
    pub chord_tol: Option<f64>,
    pub snapshot_taus: Option<Vec<f64>>,
    pub snapshot_points: Option<usize>,
    pub sweep_min_over_lambda_c: Option<f64>,
    pub sweep_max_over_lambda_c: Option<f64>,
    pub sweep_steps: Option<usize>,
    pub peak_prominence: Option<f64>,
    pub validity_margin: Option<f64>,
}

/// Keys every run needs.
pub const REQUIRED: &[&str] = &["j", "omega", "M"];

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        msg: e.message().trim().to_string(),
    })?;
    let missing: Vec<&str> = REQUIRED
        .iter()
        .zip([raw.j.is_none(), raw.omega.is_none(), raw.m.is_none()])
        .filter_map(|(k, absent)| absent.then_some(*k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidParams(format!(
            "missing required keys: {} (plus lambda_i or lambda_i_over_lambda_c; lambda_f, \
             lambda_f_over_lambda_c or tune_lambda_f for quenches)",
            missing.join(", ")
        )));
    }
    Ok(raw)
}

/// What the command needs beyond the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    Model,
    Initial,
    Quench,
}

/// Resolved configuration with every default filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub params: ModelParams,
    pub lambda_c: f64,
    pub spec: Option<QuenchSpec>,
    pub sweep: (f64, f64, usize),
    pub prominence: f64,
    pub validity_margin: f64,
}

impl RunConfig {
    pub fn resolve(raw: RawConfig, needs: Needs) -> Result<Self> {
        let (j, omega, m) = (raw.j.unwrap_or(0.0), raw.omega.unwrap_or(0.0), raw.m.unwrap_or(0));
        let omega0 = raw.omega0.unwrap_or(1.0);
        let lambda_c = critical_coupling(omega, omega0);
        let lambda_i = pick("lambda_i", raw.lambda_i, raw.lambda_i_over_lambda_c, lambda_c)?;
        if needs != Needs::Model && lambda_i.is_none() {
            return Err(Error::InvalidParams("missing required key: lambda_i or lambda_i_over_lambda_c".into()));
        }
        let params = ModelParams::new(j, omega, omega0, m, lambda_i.unwrap_or(0.0))?;
        let spec = match needs {
            Needs::Quench => Some(quench_spec(&raw, params, lambda_c)?),
            _ => None,
        };
        let sweep = (
            raw.sweep_min_over_lambda_c.unwrap_or(0.0),
            raw.sweep_max_over_lambda_c.unwrap_or(10.0),
            raw.sweep_steps.unwrap_or(201),
        );
        if !(sweep.1 > sweep.0) || sweep.2 < 2 {
            return Err(Error::InvalidParams("sweep needs max > min and at least 2 steps".into()));
        }
        Ok(Self {
            params,
            lambda_c,
            spec,
            sweep,
            prominence: raw.peak_prominence.unwrap_or(PEAK_PROMINENCE),
            validity_margin: raw.validity_margin.unwrap_or(VALIDITY_MARGIN),
            raw,
        })
    }
}

fn pick(name: &str, direct: Option<f64>, ratio: Option<f64>, lambda_c: f64) -> Result<Option<f64>> {
    match (direct, ratio) {
        (Some(_), Some(_)) => Err(Error::InvalidParams(format!("give only one of {name} and {name}_over_lambda_c"))),
        (Some(l), None) => Ok(Some(l)),
        (None, Some(r)) => {
            if lambda_c <= 0.0 {
                return Err(Error::InvalidParams(format!("{name}_over_lambda_c needs lambda_c > 0 (omega > omega0)")));
            }
            Ok(Some(r * lambda_c))
        }
        (None, None) => Ok(None),
    }
}

fn quench_spec(raw: &RawConfig, params: ModelParams, lambda_c: f64) -> Result<QuenchSpec> {
    let explicit = pick("lambda_f", raw.lambda_f, raw.lambda_f_over_lambda_c, lambda_c)?;
    let lambda_f = match (explicit, raw.tune_lambda_f.unwrap_or(false)) {
        (Some(_), true) => {
            return Err(Error::InvalidParams("tune_lambda_f conflicts with an explicit lambda_f".into()))
        }
        (Some(l), false) => l,
        (None, true) => {
            if lambda_c <= 0.0 {
                return Err(Error::InvalidParams("critical protocols need lambda_c > 0 (omega > omega0)".into()));
            }
            tune_backward_critical(&params, params.lambda)?
        }
        (None, false) => {
            return Err(Error::InvalidParams(
                "missing required key: lambda_f, lambda_f_over_lambda_c or tune_lambda_f".into(),
            ))
        }
    };
    let mut spec = QuenchSpec::new(params, lambda_f);
    spec.identity_run = raw.identity_run.unwrap_or(false);
    spec.tau_max = raw.tau_max.unwrap_or(spec.tau_max);
    spec.tau_samples = raw.tau_samples.unwrap_or(spec.tau_samples);
    let e = EvalGridConfig::default();
    spec.eval_grid = EvalGridConfig {
        nx: raw.eval_nx.unwrap_or(e.nx),
        np: raw.eval_np.unwrap_or(e.np),
        dx: raw.eval_dx.unwrap_or(e.dx),
        dp: raw.eval_dp.unwrap_or(e.dp),
    };
    let s = SeedGridConfig::default();
    spec.seeds = SeedGridConfig {
        nx: raw.seed_nx.unwrap_or(s.nx),
        np: raw.seed_np.unwrap_or(s.np),
        box_sigmas: raw.seed_box_sigmas.unwrap_or(s.box_sigmas),
        dx: raw.seed_dx.or(s.dx),
        dp: raw.seed_dp.or(s.dp),
        threshold: raw.seed_threshold.unwrap_or(s.threshold),
    };
    let c = ContourConfig::default();
    spec.contour = ContourConfig {
        working_grid: raw.working_grid.unwrap_or(c.working_grid),
        g_min: raw.g_min.unwrap_or(c.g_min),
        t_cap: raw.t_cap.unwrap_or(c.t_cap),
        level_tol: raw.level_tol.unwrap_or(c.level_tol),
        chord_tol: raw.chord_tol.unwrap_or(c.chord_tol),
    };
    spec.snapshot_taus = raw.snapshot_taus.clone().unwrap_or_default();
    spec.snapshot_points = raw.snapshot_points.unwrap_or(spec.snapshot_points);
    spec.validate()?;
    Ok(spec)
}
