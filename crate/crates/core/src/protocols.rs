//! Quench experiments: initial state preparation, critical/non-critical
//! classification, backward tuning onto the ESQPT energy, and full runs.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::hilbert::{build_hamiltonian, diagonalize, ground_state, EigenSystem, ModelParams, StateCoefficients};
use crate::phase_space::classical::bisect;
use crate::phase_space::{
    husimi_of_state, husimi_transform, state_moments, wigner_transform, wigner_values, ClassicalHamiltonian,
    GaussianSummary, PhaseField, PhaseGrid,
};
use crate::qdyn::{quantum_survival, tau_grid, Propagator};
use crate::spectral::{critical_coupling, strength_function, StrengthFunction};
use crate::twa::{
    deposit_wigner, seeds_from_field, ContourConfig, OverlapKernel, SeedGridConfig, TrajectoryEnsemble, TrajectoryInfo,
};

/// Evaluation grid for W_i and the classical overlap, centred on the W_i centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalGridConfig {
    pub nx: usize,
    pub np: usize,
    pub dx: f64,
    pub dp: f64,
}

impl Default for EvalGridConfig {
    fn default() -> Self {
        Self { nx: 400, np: 250, dx: 0.0375, dp: 0.04 }
    }
}

impl EvalGridConfig {
    pub fn grid_at(&self, centre: &GaussianSummary) -> Result<PhaseGrid> {
        PhaseGrid::centered(centre.x0, centre.p0, self.nx, self.np, self.dx, self.dp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchSpec {
    /// Shared parameters with λ = λ_i.
    pub initial: ModelParams,
    pub lambda_f: f64,
    pub tau_max: f64,
    pub tau_samples: usize,
    pub quantum: bool,
    pub classical: bool,
    /// Allows λ_i = λ_f.
    pub identity_run: bool,
    pub eval_grid: EvalGridConfig,
    pub seeds: SeedGridConfig,
    pub contour: ContourConfig,
    pub snapshot_taus: Vec<f64>,
    /// Snapshot grid points per side, spanning the domain box.
    pub snapshot_points: usize,
}

impl QuenchSpec {
    pub fn new(initial: ModelParams, lambda_f: f64) -> Self {
        Self {
            initial,
            lambda_f,
            tau_max: 2000.0,
            tau_samples: 2000,
            quantum: true,
            classical: true,
            identity_run: false,
            eval_grid: EvalGridConfig::default(),
            seeds: SeedGridConfig::default(),
            contour: ContourConfig::default(),
            snapshot_taus: Vec::new(),
            snapshot_points: 500,
        }
    }

    pub fn final_params(&self) -> ModelParams {
        self.initial.with_lambda(self.lambda_f)
    }

    pub fn lambda_c(&self) -> f64 {
        critical_coupling(self.initial.omega, self.initial.omega0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda_f.is_finite() {
            return Err(Error::InvalidParams("lambda_f must be finite".into()));
        }
        if self.initial.lambda == self.lambda_f && !self.identity_run {
            return Err(Error::InvalidParams("lambda_i equals lambda_f; set identity_run to allow it".into()));
        }
        if !(self.tau_max >= 0.0 && self.tau_max.is_finite()) || self.tau_samples == 0 {
            return Err(Error::InvalidParams("need tau_max ≥ 0 and at least one tau sample".into()));
        }
        if self.snapshot_taus.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidParams("snapshot times must be finite and non-negative".into()));
        }
        if self.snapshot_points < 2 {
            return Err(Error::InvalidParams("snapshot grid needs at least 2 points per side".into()));
        }
        Ok(())
    }

    pub fn taus(&self) -> Vec<f64> {
        tau_grid(self.tau_max, self.tau_samples)
    }

    pub fn snapshot_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::domain_box(self.initial.m(), self.snapshot_points, self.snapshot_points)
    }
}

/// Ground state of H(λ_i) with its Wigner function on the evaluation grid.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub psi: StateCoefficients,
    pub w_i: PhaseField,
    pub moments: GaussianSummary,
}

pub fn prepare_initial(spec: &QuenchSpec) -> Result<InitialState> {
    spec.validate()?;
    let psi = ground_state(&diagonalize(&build_hamiltonian(&spec.initial))?);
    let moments = state_moments(&psi);
    let grid = spec.eval_grid.grid_at(&moments)?;
    let mut w_i = wigner_transform(&psi, &grid)?;
    w_i.mask_domain(spec.initial.m());
    Ok(InitialState { psi, w_i, moments })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuenchClass {
    Critical,
    NonCritical,
}

impl QuenchClass {
    pub fn name(&self) -> &'static str {
        match self {
            QuenchClass::Critical => "critical",
            QuenchClass::NonCritical => "non_critical",
        }
    }
}

/// Half-width of the strength-function window in standard deviations.
pub const SUPPORT_SIGMAS: f64 = 3.0;

/// Critical iff M = 2j, λ_f > λ_c and ε_c = 1 lies within ε̄ ± 3σ_ε of S.
pub fn classify_strength(final_params: &ModelParams, strength: &StrengthFunction) -> QuenchClass {
    let lc = critical_coupling(final_params.omega, final_params.omega0);
    let mean = strength.mean_energy() / strength.energy_scale;
    let std = strength.energy_std() / strength.energy_scale;
    if final_params.is_critical_subspace() && final_params.lambda > lc && (mean - 1.0).abs() <= SUPPORT_SIGMAS * std {
        QuenchClass::Critical
    } else {
        QuenchClass::NonCritical
    }
}

pub fn classify_quench(spec: &QuenchSpec) -> Result<QuenchClass> {
    let psi = ground_state(&diagonalize(&build_hamiltonian(&spec.initial))?);
    let es_f = diagonalize(&build_hamiltonian(&spec.final_params()))?;
    Ok(classify_strength(&spec.final_params(), &strength_function(&psi, &es_f)?))
}

/// Depth E_c − v(x₀) (relative to ω₀ j) below which the tuner reports no root.
const MIN_WELL_DEPTH: f64 = 1e-9;

/// λ_f ∈ (λ_c, λ_i) for which the quasipotential of H(λ_f) at the minimum x₀ of
/// H(λ_i) equals the ESQPT energy ω₀ j.
pub fn tune_backward_critical(shared: &ModelParams, lambda_i: f64) -> Result<f64> {
    if !shared.is_critical_subspace() {
        return Err(Error::InvalidParams("backward tuning needs the critical subspace M = 2j".into()));
    }
    let lc = critical_coupling(shared.omega, shared.omega0);
    if lambda_i <= lc {
        return Err(Error::NoRootInBracket(format!("lambda_i = {lambda_i} does not exceed lambda_c = {lc}")));
    }
    let e_c = shared.energy_scale();
    let (x0, v0) = ClassicalHamiltonian::new(&shared.with_lambda(lambda_i)).quasipotential_minimum();
    if e_c - v0 <= MIN_WELL_DEPTH * e_c {
        return Err(Error::NoRootInBracket("initial minimum already sits at the ESQPT energy".into()));
    }
    let g = |l: f64| ClassicalHamiltonian::new(&shared.with_lambda(l)).value_clamped(x0, 0.0) - e_c;
    bisect(g, lc, lambda_i, 1e-15 * lambda_i)
        .filter(|&l| l > lc && l < lambda_i)
        .ok_or_else(|| Error::NoRootInBracket(format!("v(x0) = E_c has no solution in ({lc}, {lambda_i})")))
}

/// Ordered key = value record of everything that shaped a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Phase-space fields at one snapshot time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub tau: f64,
    pub fields: Vec<(String, PhaseField)>,
}

#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub taus: Vec<f64>,
    pub p_qm: Option<Vec<f64>>,
    pub p_cl: Option<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    pub class: Option<QuenchClass>,
    pub strength: Option<StrengthFunction>,
    pub initial: Option<InitialState>,
    pub trajectories: Vec<TrajectoryInfo>,
    pub manifest: Manifest,
    /// Set when a stage failed; earlier results are kept.
    pub failure: Option<String>,
}

/// Runs the requested engines on the spec's τ grid. Validation errors are
/// returned directly; numerical failures in a stage are recorded in the
/// artifact together with the results of the stages before it.
pub fn run_quench(spec: &QuenchSpec) -> Result<RunArtifact> {
    spec.validate()?;
    let started = Instant::now();
    let mut art = RunArtifact {
        taus: spec.taus(),
        p_qm: None,
        p_cl: None,
        snapshots: Vec::new(),
        class: None,
        strength: None,
        initial: None,
        trajectories: Vec::new(),
        manifest: Manifest::default(),
        failure: None,
    };
    describe(spec, &mut art.manifest);
    if let Err(e) = run_stages(spec, &mut art) {
        if e.is_validation() {
            return Err(e);
        }
        art.failure = Some(e.to_string());
    }
    let m = &mut art.manifest;
    m.set("wall_clock_seconds", format!("{:.3}", started.elapsed().as_secs_f64()));
    m.set("status", art.failure.as_deref().map_or("ok".to_string(), |f| format!("failed: {f}")));
    Ok(art)
}

fn describe(spec: &QuenchSpec, m: &mut Manifest) {
    let p = &spec.initial;
    m.set("version", env!("CARGO_PKG_VERSION"));
    m.set("j", p.j());
    m.set("omega", p.omega);
    m.set("omega0", p.omega0);
    m.set("M", p.m());
    m.set("lambda_c", spec.lambda_c());
    m.set("lambda_i", p.lambda);
    m.set("lambda_f", spec.lambda_f);
    m.set("lambda_i_over_lambda_c", p.lambda / spec.lambda_c());
    m.set("lambda_f_over_lambda_c", spec.lambda_f / spec.lambda_c());
    m.set("energy_scale", p.energy_scale());
    m.set("tau_max", spec.tau_max);
    m.set("t_max_unscaled", spec.tau_max / p.energy_scale());
    m.set("tau_samples", spec.tau_samples);
    m.set("engines", engines(spec));
    m.set("identity_run", spec.identity_run);
    let e = &spec.eval_grid;
    m.set("eval_grid", format!("{}x{} dx={} dp={} centred on W_i centroid", e.nx, e.np, e.dx, e.dp));
    let s = &spec.seeds;
    m.set("seed_grid", format!("{}x{} box={} sigma", s.nx, s.np, s.box_sigmas));
    if let Some(dx) = s.dx {
        m.set("seed_dx", dx);
    }
    if let Some(dp) = s.dp {
        m.set("seed_dp", dp);
    }
    m.set("seed_threshold", s.threshold);
    let c = &spec.contour;
    m.set("working_grid", format!("{0}x{0}", c.working_grid));
    m.set("g_min_over_omega0", c.g_min);
    m.set("t_cap_tau", c.t_cap);
    m.set("level_tol", c.level_tol);
    m.set("chord_tol", c.chord_tol);
    m.set("kernel_width", "sigma = seed spacing (dx_s, dp_s)");
    m.set("normalization", "N0 fixed by P_cl(0) = 1 on the eval grid");
    m.set("support_window_sigmas", SUPPORT_SIGMAS);
    m.set("snapshot_grid", format!("{0}x{0} over the domain box", spec.snapshot_points));
    m.set("snapshot_taus", spec.snapshot_taus.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","));
}

fn engines(spec: &QuenchSpec) -> &'static str {
    match (spec.quantum, spec.classical) {
        (true, true) => "quantum,classical",
        (true, false) => "quantum",
        (false, true) => "classical",
        (false, false) => "none",
    }
}

fn run_stages(spec: &QuenchSpec, art: &mut RunArtifact) -> Result<()> {
    let pf = spec.final_params();
    let init = prepare_initial(spec)?;
    let mom = init.moments;
    let m = &mut art.manifest;
    m.set("w_i_centroid", format!("{} {}", mom.x0, mom.p0));
    m.set("w_i_sigma", format!("{} {}", mom.sigma_x, mom.sigma_p));
    m.set("w_i_norm", init.w_i.integral());
    art.initial = Some(init.clone());

    let es_f = diagonalize(&build_hamiltonian(&pf))?;
    let sf = strength_function(&init.psi, &es_f)?;
    let class = classify_strength(&pf, &sf);
    let m = &mut art.manifest;
    m.set("strength_mean_epsilon", sf.mean_energy() / sf.energy_scale);
    m.set("strength_std_epsilon", sf.energy_std() / sf.energy_scale);
    m.set("class", class.name());
    art.class = Some(class);
    art.strength = Some(sf.clone());

    let snap_grid = spec.snapshot_grid()?;
    art.snapshots = spec.snapshot_taus.iter().map(|&tau| Snapshot { tau, fields: Vec::new() }).collect();

    if spec.quantum {
        art.p_qm = Some(quantum_survival(&sf, &art.taus));
        quantum_snapshots(&init, &es_f, &snap_grid, art)?;
    }
    if spec.classical {
        classical_stage(spec, &pf, &init, &snap_grid, art)?;
    }
    Ok(())
}

fn quantum_snapshots(init: &InitialState, es_f: &EigenSystem, grid: &PhaseGrid, art: &mut RunArtifact) -> Result<()> {
    if art.snapshots.is_empty() {
        return Ok(());
    }
    let prop = Propagator::new(&init.psi, es_f)?;
    let m = es_f.params.m();
    // pointwise fields: the snapshot grid need not resolve Fock structure up to n = M
    for snap in &mut art.snapshots {
        let psi = prop.at(snap.tau);
        let mut w = wigner_values(&psi, grid)?;
        w.mask_domain(m);
        let q = husimi_of_state(&psi, grid);
        snap.fields.push(("wigner_qm".into(), w));
        snap.fields.push(("husimi_qm".into(), q));
    }
    Ok(())
}

fn classical_stage(
    spec: &QuenchSpec,
    pf: &ModelParams,
    init: &InitialState,
    snap_grid: &PhaseGrid,
    art: &mut RunArtifact,
) -> Result<()> {
    let seed_grid = spec.seeds.grid_for(&init.moments)?;
    let w_seed = wigner_transform(&init.psi, &seed_grid)?;
    let seeds = seeds_from_field(&w_seed, spec.seeds.threshold, pf.m())?;
    let m = &mut art.manifest;
    m.set("seed_dx_resolved", seed_grid.dx());
    m.set("seed_dp_resolved", seed_grid.dp());
    m.set("seed_centre", format!("{} {}", init.moments.x0, init.moments.p0));
    m.set("seeds_retained", seeds.len());

    let ens = TrajectoryEnsemble::new(pf, seeds, spec.contour, false)?;
    let kernel = OverlapKernel::new(&init.w_i, ens.kernel, pf.m());
    let out = ens.run(&kernel, &art.taus, &spec.snapshot_taus)?;

    let m = &mut art.manifest;
    m.set("deposition_norm_n0", out.norm);
    m.set("fixed_points", out.infos.iter().filter(|i| i.fixed_point).count());
    m.set("near_stationary", out.infos.iter().filter(|i| i.near_stationary && !i.fixed_point).count());
    m.set("contour_vertices_total", out.infos.iter().map(|i| i.vertices).sum::<usize>());

    // snapshots: widen the kernel to the snapshot spacing where it is finer,
    // rescaling N0 so the deposited mass is unchanged
    let sigma = (ens.kernel.0.max(snap_grid.dx()), ens.kernel.1.max(snap_grid.dp()));
    let norm = out.norm * (ens.kernel.0 * ens.kernel.1) / (sigma.0 * sigma.1);
    if !art.snapshots.is_empty() {
        art.manifest.set("snapshot_kernel_width", format!("{} {}", sigma.0, sigma.1));
    }
    for (snap, pos) in art.snapshots.iter_mut().zip(&out.snapshots) {
        let mut w = deposit_wigner(pos, &ens.seeds.weights, sigma, norm, snap_grid);
        w.tau = snap.tau;
        let q = husimi_transform(&w, snap_grid)?;
        snap.fields.push(("wigner_cl".into(), w));
        snap.fields.push(("husimi_cl".into(), q));
    }
    art.p_cl = Some(out.survival);
    art.trajectories = out.infos;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shared(m: i64) -> ModelParams {
        ModelParams::new(200.0, 2.0, 1.0, m, 0.0).unwrap()
    }

    #[test]
    fn tuner_matches_closed_form() {
        let p = shared(400);
        let lf = tune_backward_critical(&p, 2.5).unwrap();
        // v_λ(x₀) is linear in λ: λ_f = (Δω/2)|x₀|√j / R(x₀)
        let (x0, _) = ClassicalHamiltonian::new(&p.with_lambda(2.5)).quasipotential_minimum();
        let u = p.m() as f64 - p.j() - 0.5 * x0 * x0;
        let r = (p.j() * p.j() - u * u).sqrt();
        let expected = 0.5 * p.detuning() * x0.abs() * p.j().sqrt() / r;
        assert!((lf - expected).abs() < 1e-9);
        // fixed point of its own output's initial point
        assert!((tune_backward_critical(&p, 2.5).unwrap() - lf).abs() < 1e-12);
    }

    #[test]
    fn tuner_limits() {
        let p = shared(400);
        assert!(matches!(tune_backward_critical(&p, 0.5), Err(Error::NoRootInBracket(_))));
        assert!(matches!(tune_backward_critical(&p, 0.5 * (1.0 + 1e-12)), Err(Error::NoRootInBracket(_))));
        assert!(tune_backward_critical(&shared(300), 2.5).is_err());
    }

    #[test]
    fn identity_is_non_critical_and_survives() {
        let p = ModelParams::new(20.0, 2.0, 1.0, 40, 2.5).unwrap();
        let mut spec = QuenchSpec::new(p, 2.5);
        assert!(spec.validate().is_err());
        spec.identity_run = true;
        spec.classical = false;
        spec.tau_max = 50.0;
        spec.tau_samples = 11;
        assert_eq!(classify_quench(&spec).unwrap(), QuenchClass::NonCritical);
        let art = run_quench(&spec).unwrap();
        assert!(art.failure.is_none());
        assert!(art.p_qm.unwrap().iter().all(|p| (p - 1.0).abs() < 1e-10));
        assert_eq!(art.manifest.get("status"), Some("ok"));
    }

    #[test]
    fn forward_initial_state_is_vacuum() {
        let spec = QuenchSpec::new(shared(300), 2.5);
        let init = prepare_initial(&spec).unwrap();
        let g = init.w_i.grid;
        for (v, (x, p)) in init.w_i.values.iter().zip(g.points()) {
            assert!((v - (-x * x - p * p).exp() / std::f64::consts::PI).abs() < 1e-6);
        }
        assert!((init.w_i.purity() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn classification_is_unit_invariant() {
        let p = ModelParams::new(20.0, 2.0, 1.0, 40, 0.0).unwrap();
        let spec = QuenchSpec::new(p, 2.5);
        let scaled = QuenchSpec::new(p.rescaled(3.0), 7.5);
        assert_eq!(classify_quench(&spec).unwrap(), classify_quench(&scaled).unwrap());
    }
}
