//! Python bindings for `tfim-core`.
//!
//! Spins cross the boundary as `+1`/`-1` integers and matrices as nested
//! lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tfim_core::expansion::{self, PolymerGas};
use tfim_core::experiments::{run_scenario as run, Scenario};
use tfim_core::gibbs::{estimate_time_zero_observables, GibbsParams};
use tfim_core::quantum::{self, ChainParams, Hamiltonian};
use tfim_core::{rng, spinflip, Error, Spin};

fn py_err(e: Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn spin(v: i8) -> PyResult<Spin> {
    Spin::try_from(v).map_err(|_| PyValueError::new_err(format!("spin must be +1 or -1, got {v}")))
}

/// Open chain `H = -J Σ σ³σ³ - h Σ σ¹`.
#[pyclass(name = "Chain", frozen)]
struct PyChain {
    inner: Hamiltonian,
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (n_sites, j, h))]
    fn new(n_sites: usize, j: f64, h: f64) -> PyResult<Self> {
        Ok(PyChain { inner: Hamiltonian::new(n_sites, j, h).map_err(py_err)? })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    /// `(energy, gap, amplitudes)`.
    fn ground_state(&self) -> PyResult<(f64, f64, Vec<f64>)> {
        let gs = quantum::ground_state(&self.inner).map_err(py_err)?;
        Ok((gs.energy, gs.gap, gs.state.iter().copied().collect()))
    }

    /// Thermal `⟨σ³_x σ³_y⟩` at inverse temperature `beta`; `x == y` gives 1.
    fn thermal_zz(&self, beta: f64, x: usize, y: usize) -> PyResult<f64> {
        let sites = if x == y { vec![] } else { vec![x, y] };
        let diag = quantum::sigma_z_diagonal(self.inner.n_sites(), &sites);
        quantum::thermal_expectation_diagonal(&self.inner, beta, &diag).map_err(py_err)
    }

    /// Thermal `⟨σ³_x⟩`.
    fn thermal_z(&self, beta: f64, x: usize) -> PyResult<f64> {
        let diag = quantum::sigma_z_diagonal(self.inner.n_sites(), &[x]);
        quantum::thermal_expectation_diagonal(&self.inner, beta, &diag).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Chain(n_sites={}, j={}, h={})", self.inner.n_sites(), self.inner.j(), self.inner.h())
    }
}

fn block_density(m: usize, l: usize, j: f64, h: f64) -> PyResult<quantum::DensityMatrix> {
    let cp = ChainParams::new(m, l, j, h).map_err(py_err)?;
    let ham = cp.hamiltonian().map_err(py_err)?;
    let gs = quantum::ground_state(&ham).map_err(py_err)?;
    quantum::reduced_density(&gs.state, cp.n_sites(), cp.block()).map_err(py_err)
}

/// Ground-state reduced density matrix of the `L+1`-site block inside a
/// chain of `2m+L+1` sites.
#[pyfunction]
#[pyo3(signature = (m, l, j, h))]
fn reduced_density(m: usize, l: usize, j: f64, h: f64) -> PyResult<Vec<Vec<f64>>> {
    let rho = block_density(m, l, j, h)?;
    let a = rho.matrix();
    Ok((0..a.nrows()).map(|r| a.row(r).iter().copied().collect()).collect())
}

/// Von Neumann entropy (nats) of the block density matrix.
#[pyfunction]
#[pyo3(signature = (m, l, j, h))]
fn entanglement_entropy(m: usize, l: usize, j: f64, h: f64) -> PyResult<f64> {
    Ok(quantum::von_neumann_entropy(&block_density(m, l, j, h)?))
}

#[pyfunction]
fn transition_kernel(eta: i8, eta_prime: i8, dt: f64, h: f64) -> PyResult<f64> {
    spinflip::transition_kernel(spin(eta)?, spin(eta_prime)?, dt, h).map_err(py_err)
}

/// Bridge on `[lo, hi]` pinned at both ends; returns the flip times.
#[pyfunction]
#[pyo3(signature = (eta_lo, eta_hi, lo, hi, h, seed=0))]
fn sample_bridge(eta_lo: i8, eta_hi: i8, lo: f64, hi: f64, h: f64, seed: u64) -> PyResult<Vec<f64>> {
    let mut r = rng::from_seed(seed);
    let t = spinflip::sample_bridge(spin(eta_lo)?, spin(eta_hi)?, lo, hi, h, &mut r).map_err(py_err)?;
    Ok(t.flips().to_vec())
}

#[pyfunction]
fn a_of_h(j: f64, h: f64) -> f64 {
    expansion::a_of_h(j, h)
}

#[pyfunction]
fn bound_psi(c: f64) -> PyResult<f64> {
    expansion::bound_psi(c).map_err(py_err)
}

#[pyfunction]
fn bound_mext(c: f64, m: f64) -> PyResult<f64> {
    expansion::bound_mext(c, m).map_err(py_err)
}

/// `(log Z exact, Σ cluster coefficients up to max_size)` for a gas given by
/// its activities and incompatible pairs.
#[pyfunction]
#[pyo3(signature = (activities, incompatible, max_size=None))]
fn polymer_log_z(activities: Vec<f64>, incompatible: Vec<(usize, usize)>, max_size: Option<usize>) -> PyResult<(f64, f64)> {
    let n = activities.len();
    let gas = PolymerGas::from_incompatible_pairs(activities, &incompatible).map_err(py_err)?;
    let truncated = expansion::truncated_log_z(&gas, max_size.unwrap_or(n)).map_err(py_err)?;
    Ok((expansion::exact_partition_function(&gas).ln(), truncated))
}

/// Path-integral estimate of `⟨σ³_x σ³_y⟩` with periodic time b.c.;
/// returns `(mean, std_error, acceptance_rate)`.
#[pyfunction]
#[pyo3(signature = (n_sites, j, h, beta, x, y, n_sweeps=20_000, n_burn_in=2_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn mc_zz(
    n_sites: usize,
    j: f64,
    h: f64,
    beta: f64,
    x: usize,
    y: usize,
    n_sweeps: usize,
    n_burn_in: usize,
    seed: u64,
) -> PyResult<(f64, f64, f64)> {
    if x >= n_sites || y >= n_sites {
        return Err(PyValueError::new_err("site out of range"));
    }
    let params = GibbsParams::periodic(j, h, beta, n_sites).map_err(py_err)?;
    let mut r = rng::from_seed(seed);
    let f = move |s: &[Spin]| s[x].value() * s[y].value();
    let (est, stats) = estimate_time_zero_observables(&params, n_sweeps, n_burn_in, &mut r, &[&f]).map_err(py_err)?;
    Ok((est[0].mean, est[0].std_error, stats.acceptance_rate()))
}

/// Run a CLI scenario in-process and return its report as JSON text.
#[pyfunction]
#[pyo3(signature = (scenario, config_json="{}", seed=0))]
fn run_scenario(scenario: &str, config_json: &str, seed: u64) -> PyResult<String> {
    let s: Scenario = scenario.parse().map_err(py_err)?;
    let out = run(s, config_json, seed).map_err(py_err)?;
    serde_json::to_string(&out.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn tfim_rs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(reduced_density, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(transition_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(sample_bridge, m)?)?;
    m.add_function(wrap_pyfunction!(a_of_h, m)?)?;
    m.add_function(wrap_pyfunction!(bound_psi, m)?)?;
    m.add_function(wrap_pyfunction!(bound_mext, m)?)?;
    m.add_function(wrap_pyfunction!(polymer_log_z, m)?)?;
    m.add_function(wrap_pyfunction!(mc_zz, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
