//! Python bindings: model parameters, spectra, exact and truncated-Wigner
//! quench runs, the backward critical tuner and the revival analytics.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tcquench::analytics;
use tcquench::hilbert::{self, build_hamiltonian, diagonalize, ground_state};
use tcquench::phase_space::{state_moments, wigner_transform, PhaseGrid};
use tcquench::protocols::{self, QuenchSpec};
use tcquench::spectral;
use tcquench::twa::SeedGridConfig;

fn to_py(e: tcquench::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Model parameters of one fixed-M subspace.
#[pyclass(frozen)]
#[derive(Clone)]
struct ModelParams {
    inner: hilbert::ModelParams,
}

#[pymethods]
impl ModelParams {
    #[new]
    #[pyo3(signature = (j, omega, m, lambda_, omega0 = 1.0))]
    fn new(j: f64, omega: f64, m: i64, lambda_: f64, omega0: f64) -> PyResult<Self> {
        Ok(Self { inner: hilbert::ModelParams::new(j, omega, omega0, m, lambda_).map_err(to_py)? })
    }

    #[getter]
    fn j(&self) -> f64 {
        self.inner.j()
    }

    #[getter]
    fn m(&self) -> u32 {
        self.inner.m()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega
    }

    #[getter]
    fn omega0(&self) -> f64 {
        self.inner.omega0
    }

    #[getter]
    fn lambda_(&self) -> f64 {
        self.inner.lambda
    }

    /// ω₀ j.
    #[getter]
    fn energy_scale(&self) -> f64 {
        self.inner.energy_scale()
    }

    #[getter]
    fn lambda_c(&self) -> f64 {
        spectral::critical_coupling(self.inner.omega, self.inner.omega0)
    }

    fn with_lambda(&self, lambda_: f64) -> Self {
        Self { inner: self.inner.with_lambda(lambda_) }
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("ModelParams(j={}, omega={}, M={}, lambda_={}, omega0={})", p.j(), p.omega, p.m(), p.lambda, p.omega0)
    }
}

/// Scaled eigenvalues ε_k = E_k/(ω₀ j), ascending.
#[pyfunction]
fn scaled_spectrum(params: &ModelParams) -> PyResult<Vec<f64>> {
    Ok(diagonalize(&build_hamiltonian(&params.inner)).map_err(to_py)?.scaled_energies())
}

/// Scaled ground-state energy on a grid of λ values.
#[pyfunction]
fn ground_energy_sweep(params: &ModelParams, lambdas: Vec<f64>) -> Vec<f64> {
    spectral::ground_energy_sweep(&params.inner, &lambdas)
}

/// Strength function of the quench λ_i → λ_f as (ε_k, w_k).
#[pyfunction]
fn strength_function(params: &ModelParams, lambda_f: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let psi = ground_state(&diagonalize(&build_hamiltonian(&params.inner)).map_err(to_py)?);
    let es_f = diagonalize(&build_hamiltonian(&params.inner.with_lambda(lambda_f))).map_err(to_py)?;
    let sf = spectral::strength_function(&psi, &es_f).map_err(to_py)?;
    Ok((sf.scaled_energies(), sf.weights))
}

/// λ_f placing the initial packet centre on the ESQPT energy.
#[pyfunction]
fn tune_backward_critical(params: &ModelParams, lambda_i: f64) -> PyResult<f64> {
    protocols::tune_backward_critical(&params.inner, lambda_i).map_err(to_py)
}

/// Runs a quench from the ground state of `params` to λ_f and returns a dict
/// with tau, p_qm, p_cl (when computed), class and the manifest entries.
#[pyfunction]
#[pyo3(signature = (params, lambda_f, tau_max = 2000.0, tau_samples = 2001, quantum = true, classical = false, seed_grid = None, identity_run = false))]
#[allow(clippy::too_many_arguments)]
fn run_quench<'py>(
    py: Python<'py>,
    params: &ModelParams,
    lambda_f: f64,
    tau_max: f64,
    tau_samples: usize,
    quantum: bool,
    classical: bool,
    seed_grid: Option<(usize, usize)>,
    identity_run: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = QuenchSpec::new(params.inner, lambda_f);
    spec.tau_max = tau_max;
    spec.tau_samples = tau_samples;
    spec.quantum = quantum;
    spec.classical = classical;
    spec.identity_run = identity_run;
    if let Some((nx, np)) = seed_grid {
        spec.seeds = SeedGridConfig { nx, np, ..spec.seeds };
    }
    let art = py.detach(|| protocols::run_quench(&spec)).map_err(to_py)?;
    if let Some(f) = &art.failure {
        return Err(PyRuntimeError::new_err(f.clone()));
    }
    let out = PyDict::new(py);
    out.set_item("tau", art.taus)?;
    out.set_item("p_qm", art.p_qm)?;
    out.set_item("p_cl", art.p_cl)?;
    out.set_item("class", art.class.map(|c| c.name()))?;
    let manifest = PyDict::new(py);
    for (k, v) in art.manifest.entries {
        manifest.set_item(k, v)?;
    }
    out.set_item("manifest", manifest)?;
    Ok(out)
}

/// Wigner function of the ground state of `params` on a regular grid, as a
/// row-major nested list `w[ix][ip]`.
#[pyfunction]
fn ground_state_wigner(params: &ModelParams, x: (f64, f64, usize), p: (f64, f64, usize)) -> PyResult<Vec<Vec<f64>>> {
    let psi = ground_state(&diagonalize(&build_hamiltonian(&params.inner)).map_err(to_py)?);
    let grid = PhaseGrid::new(x.0, x.1, x.2, p.0, p.1, p.2).map_err(to_py)?;
    let w = wigner_transform(&psi, &grid).map_err(to_py)?;
    Ok((0..grid.nx).map(|i| w.row(i).to_vec()).collect())
}

/// Centroid and widths (x0, p0, sigma_x, sigma_p) of the ground-state Wigner function.
#[pyfunction]
fn ground_state_moments(params: &ModelParams) -> PyResult<(f64, f64, f64, f64)> {
    let psi = ground_state(&diagonalize(&build_hamiltonian(&params.inner)).map_err(to_py)?);
    let s = state_moments(&psi);
    Ok((s.x0, s.p0, s.sigma_x, s.sigma_p))
}

/// Interior revival peaks as (tau, height) pairs.
#[pyfunction]
#[pyo3(signature = (tau, p, prominence = analytics::PEAK_PROMINENCE))]
fn revival_peaks(tau: Vec<f64>, p: Vec<f64>, prominence: f64) -> PyResult<Vec<(f64, f64)>> {
    Ok(analytics::extract_revival_peaks(&tau, &p, prominence)
        .map_err(to_py)?
        .into_iter()
        .map(|pk| (pk.tau, pk.height))
        .collect())
}

/// Log-log slope through (tau, height) peaks.
#[pyfunction]
fn power_law_exponent(peaks: Vec<(f64, f64)>) -> PyResult<f64> {
    let pk: Vec<analytics::RevivalPeak> =
        peaks.into_iter().map(|(tau, height)| analytics::RevivalPeak { tau, height, prominence: 0.0 }).collect();
    Ok(analytics::fit_power_law_exponent(&pk).map_err(to_py)?.exponent)
}

#[pymodule]
fn tcquench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ModelParams>()?;
    m.add_function(wrap_pyfunction!(scaled_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(ground_energy_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(strength_function, m)?)?;
    m.add_function(wrap_pyfunction!(tune_backward_critical, m)?)?;
    m.add_function(wrap_pyfunction!(run_quench, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state_wigner, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state_moments, m)?)?;
    m.add_function(wrap_pyfunction!(revival_peaks, m)?)?;
    m.add_function(wrap_pyfunction!(power_law_exponent, m)?)?;
    Ok(())
}
