use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use tcquench::analytics::{
    extract_revival_peaks, fit_initial_decay, fit_power_law_exponent, measure_decay_model, predict_power_law,
    predict_revival_envelope, FitReport,
};
use tcquench::hilbert::{build_basis, build_hamiltonian, diagonalize, ground_state, scaled_jz};
use tcquench::io::{read_csv, write_csv, write_snapshot};
use tcquench::phase_space::state_moments;
use tcquench::protocols::{run_quench, tune_backward_critical, Manifest, QuenchSpec, RunArtifact};
use tcquench::spectral::{jz_slope_feature, sweep_spectrum, write_spectrum_csv, write_strength_csv};
use tcquench::{Error, Result};

use crate::config::{parse_config, Needs, RunConfig};
use crate::{Command, Common, OUT_DIR_ENV};

pub fn run(cmd: &Command, common: &Common) -> Result<()> {
    let needs = match cmd {
        Command::Spectrum | Command::JzScan => Needs::Model,
        Command::TuneCritical => Needs::Initial,
        Command::Fit { .. } => Needs::Initial,
        _ => Needs::Quench,
    };
    let mut cfg = load(common, needs)?;
    if let Some(spec) = cfg.spec.as_mut() {
        apply_flags(spec, common)?;
    }
    match cmd {
        Command::Spectrum => spectrum(&cfg, common),
        Command::JzScan => jz_scan(&cfg, common),
        Command::TuneCritical => tune(&cfg),
        Command::QuenchQm => quench(&cfg, common, true, false, "quench-qm"),
        Command::QuenchTwa => quench(&cfg, common, false, true, "quench-twa"),
        Command::Compare => quench(&cfg, common, true, true, "compare"),
        Command::Snapshot => snapshot(&cfg, common),
        Command::Fit { input, column } => fit(&cfg, common, input, column.as_deref()),
    }
}

fn load(common: &Common, needs: Needs) -> Result<RunConfig> {
    let path = common.config.as_ref().ok_or_else(|| Error::InvalidParams("--config is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidParams(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::resolve(parse_config(&text)?, needs)
}

fn grid_size(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidParams(format!("grid size {s:?} is not of the form NXxNP"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn apply_flags(spec: &mut QuenchSpec, c: &Common) -> Result<()> {
    if let Some(s) = &c.seed_grid {
        (spec.seeds.nx, spec.seeds.np) = grid_size(s)?;
    }
    if let Some(s) = &c.eval_grid {
        (spec.eval_grid.nx, spec.eval_grid.np) = grid_size(s)?;
    }
    if let Some(t) = c.tau_max {
        spec.tau_max = t;
    }
    if let Some(n) = c.tau_samples {
        spec.tau_samples = n;
    }
    if let Some(t) = &c.snapshot_taus {
        spec.snapshot_taus = t.clone();
    }
    spec.validate()
}

fn out_dir(common: &Common) -> Result<PathBuf> {
    let dir = common
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_manifest(dir: &Path, mut m: Manifest, command: &str, common: &Common) -> Result<()> {
    m.set("command", command);
    m.set("config", common.config.as_ref().map_or(String::new(), |p| p.display().to_string()));
    m.set("threads", rayon::current_num_threads());
    let mut f = create(dir, "manifest.txt")?;
    f.write_all(m.render().as_bytes())?;
    Ok(f.flush()?)
}

fn model_manifest(cfg: &RunConfig) -> Manifest {
    let mut m = Manifest::default();
    let p = &cfg.params;
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("j", p.j());
    m.set("omega", p.omega);
    m.set("omega0", p.omega0);
    m.set("M", p.m());
    m.set("lambda_c", cfg.lambda_c);
    m
}

fn spectrum(cfg: &RunConfig, common: &Common) -> Result<()> {
    let (lo, hi, n) = cfg.sweep;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let sweep = sweep_spectrum(&cfg.params, &grid)?;
    let dir = out_dir(common)?;
    let mut f = create(&dir, "spectrum.csv")?;
    write_spectrum_csv(&mut f, &sweep)?;
    f.flush()?;
    let mut m = model_manifest(cfg);
    m.set("sweep_lambda_over_lambda_c", format!("{lo}..{hi} in {n} steps"));
    write_manifest(&dir, m, "spectrum", common)?;
    println!("wrote {}", dir.join("spectrum.csv").display());
    Ok(())
}

fn jz_scan(cfg: &RunConfig, common: &Common) -> Result<()> {
    let raw = &cfg.raw;
    let lambda = match (raw.lambda_f, raw.lambda_f_over_lambda_c, raw.lambda_i, raw.lambda_i_over_lambda_c) {
        (Some(l), ..) => l,
        (None, Some(r), ..) => r * cfg.lambda_c,
        (None, None, Some(l), _) => l,
        (None, None, None, Some(r)) => r * cfg.lambda_c,
        _ => return Err(Error::InvalidParams("jz-scan needs lambda_f or lambda_i".into())),
    };
    let params = cfg.params.with_lambda(lambda);
    let es = diagonalize(&build_hamiltonian(&params))?;
    let basis = build_basis(&params);
    let eps = es.scaled_energies();
    let jz: Vec<f64> = (0..es.dim()).map(|k| scaled_jz(&es.state(k), &basis, params.j())).collect();
    let dir = out_dir(common)?;
    let rows: Vec<Vec<f64>> = eps.iter().zip(&jz).enumerate().map(|(k, (&e, &z))| vec![k as f64, e, z]).collect();
    let mut f = create(&dir, "jz_scan.csv")?;
    write_csv(&mut f, &["k", "epsilon_k", "jz_over_j_k"], &rows)?;
    f.flush()?;
    let mut m = model_manifest(cfg);
    m.set("lambda", lambda);
    if let Some(feat) = jz_slope_feature(&eps, &jz, None) {
        m.set("jz_feature_epsilon", feat.epsilon);
        m.set("jz_feature_slope", feat.slope);
        m.set("jz_feature_spacing", feat.spacing);
        println!("max |d<Jz>/d eps| = {} at eps = {}", feat.slope, feat.epsilon);
    }
    write_manifest(&dir, m, "jz-scan", common)
}

fn tune(cfg: &RunConfig) -> Result<()> {
    let lf = tune_backward_critical(&cfg.params, cfg.params.lambda)?;
    println!("lambda_f/lambda_c = {:.6}", lf / cfg.lambda_c);
    println!("lambda_f = {lf:.12}");
    Ok(())
}

fn run_spec(cfg: &RunConfig, quantum: bool, classical: bool) -> Result<RunArtifact> {
    let mut spec = cfg.spec.clone().expect("quench commands resolve a spec");
    spec.quantum = quantum;
    spec.classical = classical;
    run_quench(&spec)
}

/// Writes what finished and reports a failed stage as a numerical error.
fn finish(art: RunArtifact, dir: &Path, command: &str, common: &Common) -> Result<()> {
    write_manifest(dir, art.manifest, command, common)?;
    match art.failure {
        None => Ok(()),
        Some(f) => Err(Error::RunFailed(format!("stopped early ({f}); partial results in {}", dir.display()))),
    }
}

fn quench(cfg: &RunConfig, common: &Common, quantum: bool, classical: bool, command: &str) -> Result<()> {
    let art = run_spec(cfg, quantum, classical)?;
    let dir = out_dir(common)?;
    let mut header = vec!["tau"];
    let mut cols: Vec<&Vec<f64>> = Vec::new();
    if let Some(p) = &art.p_qm {
        header.push("p_qm");
        cols.push(p);
    }
    if let Some(p) = &art.p_cl {
        header.push("p_cl");
        cols.push(p);
    }
    if !cols.is_empty() {
        let rows: Vec<Vec<f64>> = art
            .taus
            .iter()
            .enumerate()
            .map(|(i, &t)| std::iter::once(t).chain(cols.iter().map(|c| c[i])).collect())
            .collect();
        let mut f = create(&dir, "survival.csv")?;
        write_csv(&mut f, &header, &rows)?;
        f.flush()?;
    }
    if let Some(sf) = &art.strength {
        let mut f = create(&dir, "strength.csv")?;
        write_strength_csv(&mut f, sf)?;
        f.flush()?;
    }
    if !art.trajectories.is_empty() {
        let rows: Vec<Vec<f64>> = art
            .trajectories
            .iter()
            .map(|t| {
                vec![
                    t.energy,
                    t.period_tau,
                    t.vertices as f64,
                    t.fixed_point as u8 as f64,
                    t.near_stationary as u8 as f64,
                ]
            })
            .collect();
        let mut f = create(&dir, "trajectories.csv")?;
        write_csv(&mut f, &["energy", "period_tau", "vertices", "fixed_point", "near_stationary"], &rows)?;
        f.flush()?;
    }
    if let Some(class) = art.class {
        println!("class = {}", class.name());
    }
    println!("wrote {}", dir.display());
    finish(art, &dir, command, common)
}

fn snapshot(cfg: &RunConfig, common: &Common) -> Result<()> {
    if cfg.spec.as_ref().is_some_and(|s| s.snapshot_taus.is_empty()) {
        return Err(Error::InvalidParams("no snapshot times: set snapshot_taus or --snapshot-taus".into()));
    }
    let art = run_spec(cfg, true, true)?;
    let dir = out_dir(common)?;
    for snap in &art.snapshots {
        for (name, field) in &snap.fields {
            let mut f = create(&dir, &format!("{name}_tau{}.dat", snap.tau))?;
            write_snapshot(&mut f, field)?;
            f.flush()?;
        }
    }
    println!("wrote {} snapshot times to {}", art.snapshots.len(), dir.display());
    finish(art, &dir, "snapshot", common)
}

fn fit(cfg: &RunConfig, common: &Common, input: &Path, column: Option<&str>) -> Result<()> {
    let (header, rows) = read_csv(BufReader::new(
        File::open(input).map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", input.display())))?,
    ))?;
    let find = |name: &str| header.iter().position(|h| h == name);
    let tau_col = find("tau").ok_or_else(|| Error::InvalidParams("survival CSV lacks a tau column".into()))?;
    let col = match column {
        Some(c) => find(c).ok_or_else(|| Error::InvalidParams(format!("column {c} not in {}", input.display())))?,
        None => find("p_qm").unwrap_or(if tau_col == 0 { 1 } else { 0 }),
    };
    if col >= header.len() {
        return Err(Error::InvalidParams("survival CSV has no data column".into()));
    }
    let taus: Vec<f64> = rows.iter().map(|r| r[tau_col]).collect();
    let p: Vec<f64> = rows.iter().map(|r| r[col]).collect();

    let mut report = FitReport::default();
    report.value("input", input.display());
    report.value("column", &header[col]);
    report.value("peak_prominence", cfg.prominence);
    report.value("validity_margin", cfg.validity_margin);
    match fit_initial_decay(&taus, &p, 0.5) {
        Ok(g) => {
            report.value("fitted_alpha", g.alpha);
            report.value("fitted_alpha_r_squared", g.r_squared);
            report.value("fitted_alpha_tau_end", g.tau_end);
        }
        Err(e) => report.value("fitted_alpha", format!("unavailable: {e}")),
    }
    let peaks = extract_revival_peaks(&taus, &p, cfg.prominence);
    match &peaks {
        Ok(pk) => {
            for (n, k) in pk.iter().enumerate() {
                report.value(&format!("peak_{}", n + 1), format!("{} {}", k.tau, k.height));
            }
            let first: Vec<_> = pk.iter().take(5).copied().collect();
            match fit_power_law_exponent(&first) {
                Ok(f) => {
                    report.value("power_law_exponent_first5", f.exponent);
                    report.value("power_law_r_squared", f.r_squared);
                }
                Err(e) => report.value("power_law_exponent_first5", format!("unavailable: {e}")),
            }
        }
        Err(e) => report.value("peaks", format!("unavailable: {e}")),
    }

    // model inputs measured from the final Hamiltonian and the initial packet
    let lambda_f = match (cfg.raw.lambda_f, cfg.raw.lambda_f_over_lambda_c) {
        (Some(l), _) => Some(l),
        (None, Some(r)) => Some(r * cfg.lambda_c),
        _ => None,
    };
    if let Some(lf) = lambda_f {
        let psi = ground_state(&diagonalize(&build_hamiltonian(&cfg.params))?);
        let packet = state_moments(&psi);
        match measure_decay_model(&cfg.params.with_lambda(lf), &packet, Default::default()) {
            Ok((model, period)) => {
                report.model(&model);
                report.value("period_fit_residual", period.residual);
                report.value("period_fit_nonlinear", period.nonlinear);
                report.value("predicted_alpha", model.initial_decay_rate());
                if let Ok(g) = fit_initial_decay(&taus, &p, 0.5) {
                    report.check_relative("alpha", g.alpha, model.initial_decay_rate(), 0.2);
                }
                report.check_below("period_fit_residual", period.residual, 0.02);
                let ns = [3, 4, 5];
                let measured: Vec<f64> =
                    peaks.as_ref().map(|pk| pk.iter().skip(2).take(3).map(|k| k.height).collect()).unwrap_or_default();
                for e in predict_revival_envelope(&model, &ns)? {
                    report.value(&format!("predicted_envelope_n{}", e.n), e.height);
                }
                match predict_power_law(&model, &ns, cfg.validity_margin) {
                    Ok(pl) => {
                        for (e, &h) in pl.iter().zip(&measured) {
                            report.check_relative(&format!("power_law_n{}", e.n), h, e.height, 0.3);
                        }
                    }
                    Err(e) => report.value("predicted_power_law", format!("unavailable: {e}")),
                }
            }
            Err(e) => report.value("decay_model", format!("unavailable: {e}")),
        }
    }
    let dir = out_dir(common)?;
    let mut f = create(&dir, "fit_report.txt")?;
    report.write(&mut f)?;
    f.flush()?;
    report.write(std::io::stdout())?;
    Ok(())
}
