//! Python bindings for `betagas`.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use betagas::equilibrium::{self, EquilibriumSolution, SolverConfig, DEFAULT_SPACING};
use betagas::error::Error;
use betagas::localstats;
use betagas::potential::{self, Grid, PotentialSpec};
use betagas::sampler::{self, BruteForceOracle, EnsembleConfig, McmcSettings, SampleBatch};
use betagas::validate::{Suite, ValidateOptions};

create_exception!(betagas_py, SolverError, PyException, "The equilibrium solver did not converge.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        e @ Error::NonConvergence { .. } => SolverError::new_err(e.to_string()),
        e @ (Error::Normalization(_) | Error::DivergentEntropy { .. }) => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

type PyRes<T> = PyResult<T>;

fn wrap<T>(r: betagas::error::Result<T>) -> PyRes<T> {
    r.map_err(to_py)
}

/// Serializes through JSON into plain Python dicts and lists.
fn to_python<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyRes<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// A confining potential `V`.
#[pyclass(name = "Potential", module = "betagas_py", frozen)]
struct PyPotential {
    spec: PotentialSpec,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn gaussian() -> Self {
        Self {
            spec: PotentialSpec::gaussian(),
        }
    }

    #[staticmethod]
    fn quartic() -> Self {
        Self {
            spec: PotentialSpec::quartic(),
        }
    }

    #[staticmethod]
    fn even_polynomial(coefficients: Vec<f64>) -> PyRes<Self> {
        Ok(Self {
            spec: wrap(PotentialSpec::even_polynomial(coefficients))?,
        })
    }

    #[staticmethod]
    fn tabulated(x: Vec<f64>, values: Vec<f64>) -> PyRes<Self> {
        Ok(Self {
            spec: wrap(PotentialSpec::tabulated(x, values))?,
        })
    }

    #[staticmethod]
    fn from_table_csv(path: PathBuf) -> PyRes<Self> {
        Ok(Self {
            spec: wrap(PotentialSpec::from_table_csv(&path))?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyRes<Self> {
        let spec: PotentialSpec = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        wrap(spec.validate())?;
        Ok(Self { spec })
    }

    fn to_json(&self) -> PyRes<String> {
        serde_json::to_string(&self.spec).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn with_shift(&self, shift: f64) -> Self {
        Self {
            spec: self.spec.clone().with_shift(shift),
        }
    }

    fn value(&self, x: f64) -> PyRes<f64> {
        wrap(potential::eval_potential(&self.spec, x))
    }

    fn derivative(&self, x: f64) -> PyRes<f64> {
        wrap(self.spec.derivative(x))
    }

    fn check_admissible(&self, lo: f64, hi: f64) -> PyRes<()> {
        wrap(self.spec.check_admissible(lo, hi))
    }

    /// `(lo, hi)` outside which the envelope with exponent `kappa` has mass below `eps`.
    fn truncation(&self, kappa: f64, eps: f64) -> PyRes<(f64, f64)> {
        wrap(potential::choose_truncation(&self.spec, kappa, eps))
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", serde_json::to_string(&self.spec).unwrap_or_default())
    }
}

/// Solution of the equilibrium problem at coupling `c`.
#[pyclass(name = "Equilibrium", module = "betagas_py", frozen)]
struct PyEquilibrium {
    sol: EquilibriumSolution,
    potential: PotentialSpec,
}

#[pymethods]
impl PyEquilibrium {
    #[getter]
    fn c(&self) -> f64 {
        self.sol.c
    }

    #[getter]
    fn z_c(&self) -> f64 {
        self.sol.z_c
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.sol.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.sol.residual
    }

    #[getter]
    fn free_energy(&self) -> f64 {
        self.sol.free_energy
    }

    #[getter]
    fn free_energy_history(&self) -> Vec<f64> {
        self.sol.free_energy_history.clone()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.sol.grid().nodes()
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.sol.rho.values().to_vec()
    }

    #[getter]
    fn log_potential(&self) -> Vec<f64> {
        self.sol.log_potential.clone()
    }

    fn density_at(&self, x: f64) -> f64 {
        self.sol.density_at(x)
    }

    fn log_potential_at(&self, x: f64) -> f64 {
        self.sol.log_potential_at(x)
    }

    fn moment(&self, k: i32) -> f64 {
        self.sol.rho.moment(k)
    }

    fn stieltjes(&self, z: Complex64) -> PyRes<Complex64> {
        wrap(equilibrium::stieltjes_transform(&self.sol.rho, z))
    }

    fn stieltjes_residual(&self, z: Complex64) -> PyRes<f64> {
        wrap(equilibrium::stieltjes_residual(&self.sol, &self.potential, z))
    }

    /// Relative entropy of `rho_c` with respect to `alpha` on the same grid.
    fn relative_entropy(&self) -> PyRes<f64> {
        let alpha = wrap(potential::reference_density(&self.potential, self.sol.grid()))?;
        wrap(equilibrium::relative_entropy(&self.sol.rho, &alpha.density))
    }

    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(c={}, z_c={:.10}, iterations={}, residual={:.2e})",
            self.sol.c, self.sol.z_c, self.sol.iterations, self.sol.residual
        )
    }
}

fn grid_for(v: &PotentialSpec, c: f64, lo: Option<f64>, hi: Option<f64>, spacing: f64) -> PyRes<Grid> {
    let default = wrap(equilibrium::default_grid(v, c))?;
    wrap(Grid::with_spacing(
        lo.unwrap_or(default.lo()),
        hi.unwrap_or(default.hi()),
        spacing,
    ))
}

#[pyfunction]
#[pyo3(signature = (potential, c, lo=None, hi=None, spacing=DEFAULT_SPACING, tol=1e-10, max_iter=10_000, damping=0.5))]
#[allow(clippy::too_many_arguments)]
fn solve_equilibrium(
    py: Python<'_>,
    potential: &PyPotential,
    c: f64,
    lo: Option<f64>,
    hi: Option<f64>,
    spacing: f64,
    tol: f64,
    max_iter: usize,
    damping: f64,
) -> PyRes<PyEquilibrium> {
    let v = potential.spec.clone();
    let grid = grid_for(&v, c, lo, hi, spacing)?;
    let cfg = SolverConfig { tol, max_iter, damping };
    let sol = py.detach(|| equilibrium::solve_equilibrium(&v, c, &grid, &cfg));
    Ok(PyEquilibrium {
        sol: wrap(sol)?,
        potential: v,
    })
}

/// `H_c` of an arbitrary density given on a uniform grid.
#[pyfunction]
fn free_energy(potential: &PyPotential, c: f64, lo: f64, hi: f64, rho: Vec<f64>) -> PyRes<f64> {
    let grid = wrap(Grid::new(lo, hi, rho.len()))?;
    let density = wrap(potential::DensityOnGrid::new(grid, rho))?;
    wrap(equilibrium::free_energy(&density, c, &potential.spec))
}

/// `(x, alpha)` with `alpha = exp(-V) / Z` on a uniform grid.
#[pyfunction]
#[pyo3(signature = (potential, lo, hi, spacing=DEFAULT_SPACING))]
fn reference_density(potential: &PyPotential, lo: f64, hi: f64, spacing: f64) -> PyRes<(Vec<f64>, Vec<f64>)> {
    let grid = wrap(Grid::with_spacing(lo, hi, spacing))?;
    let alpha = wrap(potential::reference_density(&potential.spec, &grid))?;
    Ok((grid.nodes(), alpha.density.values().to_vec()))
}

/// Replicas of the ensemble drawn by one sampler.
#[pyclass(name = "SampleBatch", module = "betagas_py", frozen)]
struct PyBatch {
    batch: SampleBatch,
}

#[pymethods]
impl PyBatch {
    fn __len__(&self) -> usize {
        self.batch.len()
    }

    #[getter]
    fn n_particles(&self) -> usize {
        self.batch.n_particles()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.batch.config.beta
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.batch.config.coupling()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.batch.config.seed
    }

    #[getter]
    fn acceptance_rate(&self) -> f64 {
        self.batch.diagnostics.acceptance_rate
    }

    #[getter]
    fn warning(&self) -> Option<String> {
        self.batch.diagnostics.warning.clone()
    }

    #[getter]
    fn provenance(&self, py: Python<'_>) -> PyRes<Py<PyAny>> {
        to_python(py, &self.batch.provenance())
    }

    /// Sorted coordinates of replica `index`.
    fn sample(&self, index: usize) -> PyRes<Vec<f64>> {
        self.batch
            .samples
            .get(index)
            .map(|s| s.lambdas().to_vec())
            .ok_or_else(|| PyValueError::new_err(format!("replica {index} out of range")))
    }

    fn samples(&self) -> Vec<Vec<f64>> {
        self.batch.samples.iter().map(|s| s.lambdas().to_vec()).collect()
    }

    fn pooled(&self) -> Vec<f64> {
        self.batch.pooled()
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> PyRes<Bound<'py, PyBytes>> {
        Ok(PyBytes::new(py, &wrap(sampler::encode_batch(&self.batch))?))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyRes<Self> {
        Ok(Self {
            batch: wrap(sampler::decode_batch(data))?,
        })
    }

    fn save(&self, path: PathBuf) -> PyRes<()> {
        wrap(sampler::write_batch(&path, &self.batch))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyRes<Self> {
        Ok(Self {
            batch: wrap(sampler::read_batch(&path))?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "SampleBatch(replicas={}, n_particles={}, beta={})",
            self.batch.len(),
            self.batch.n_particles(),
            self.batch.config.beta
        )
    }
}

#[pyfunction]
#[pyo3(signature = (potential, n_particles, c, count, seed=0, step_size=1.0, sweeps_burnin=2000, sweeps_between=10, chains=1))]
#[allow(clippy::too_many_arguments)]
fn mcmc_sample(
    py: Python<'_>,
    potential: &PyPotential,
    n_particles: usize,
    c: f64,
    count: usize,
    seed: u64,
    step_size: f64,
    sweeps_burnin: usize,
    sweeps_between: usize,
    chains: usize,
) -> PyRes<PyBatch> {
    let mcmc = McmcSettings {
        step_size,
        sweeps_burnin,
        sweeps_between,
        chains,
        ..McmcSettings::default()
    };
    let config = wrap(EnsembleConfig::high_temperature(
        n_particles,
        c,
        potential.spec.clone(),
        seed,
    ))?
    .with_mcmc(mcmc);
    let batch = py.detach(|| sampler::mcmc_sample(&config, count));
    Ok(PyBatch { batch: wrap(batch)? })
}

/// Exact samples for `V = x^2 / 2` from the tridiagonal matrix model.
#[pyfunction]
#[pyo3(signature = (n_particles, c, count, seed=0))]
fn tridiagonal_sample(py: Python<'_>, n_particles: usize, c: f64, count: usize, seed: u64) -> PyRes<PyBatch> {
    if n_particles == 0 {
        return Err(PyValueError::new_err("n_particles must be >= 1"));
    }
    let beta = 2.0 * c / n_particles as f64;
    let batch = py.detach(|| sampler::tridiagonal_gaussian_sample(n_particles, beta, seed, count));
    Ok(PyBatch { batch: wrap(batch)? })
}

/// One-point marginal of the `N <= 3` ensemble by quadrature, at each of `xs`.
#[pyfunction]
fn brute_force_marginal(potential: &PyPotential, n_particles: usize, beta: f64, xs: Vec<f64>) -> PyRes<Vec<f64>> {
    let oracle = wrap(BruteForceOracle::new(n_particles, beta, &potential.spec))?;
    Ok(xs.into_iter().map(|x| oracle.marginal1(x)).collect())
}

/// `Z_N / Z_{N-1}` by quadrature for `N <= 3`.
#[pyfunction]
fn brute_force_partition_ratio(potential: &PyPotential, n_particles: usize, beta: f64) -> PyRes<f64> {
    Ok(wrap(BruteForceOracle::new(n_particles, beta, &potential.spec))?.partition_ratio())
}

/// Rescaled points `N(lambda - E)` of replica `index` inside `[-W, W]`.
#[pyfunction]
fn local_points(batch: &PyBatch, index: usize, energy: f64, half_width: f64) -> PyRes<Vec<f64>> {
    let sample = batch
        .batch
        .samples
        .get(index)
        .ok_or_else(|| PyValueError::new_err(format!("replica {index} out of range")))?;
    Ok(wrap(localstats::local_statistics(sample, energy, half_width))?.points)
}

#[pyfunction]
fn window_counts(batch: &PyBatch, energy: f64, half_width: f64) -> PyRes<Vec<usize>> {
    wrap(localstats::window_counts(&batch.batch, energy, half_width))
}

/// Count and spacing tests against a Poisson process of intensity `rho_ref`, as a dict.
#[pyfunction]
fn poisson_report(py: Python<'_>, batch: &PyBatch, energy: f64, half_width: f64, rho_ref: f64) -> PyRes<Py<PyAny>> {
    let report = py.detach(|| localstats::counting_report(&batch.batch, energy, half_width, rho_ref));
    to_python(py, &wrap(report)?)
}

#[pyfunction]
#[pyo3(signature = (batch, energy, half_width, k, bins=localstats::DEFAULT_BINS))]
fn correlation_estimate(
    py: Python<'_>,
    batch: &PyBatch,
    energy: f64,
    half_width: f64,
    k: usize,
    bins: usize,
) -> PyRes<Py<PyAny>> {
    let estimate = wrap(localstats::correlation_estimate(&batch.batch, energy, half_width, k, bins))?;
    to_python(py, &estimate)
}

#[pyfunction]
#[pyo3(signature = (batch, energy, half_width, bins=localstats::DEFAULT_BINS))]
fn pair_factorization(py: Python<'_>, batch: &PyBatch, energy: f64, half_width: f64, bins: usize) -> PyRes<Py<PyAny>> {
    let cells = wrap(localstats::pair_factorization(&batch.batch, energy, half_width, bins))?;
    to_python(py, &cells)
}

#[pyfunction]
fn two_energy_independence(
    py: Python<'_>,
    batch: &PyBatch,
    energy: f64,
    energy_prime: f64,
    half_width: f64,
) -> PyRes<Py<PyAny>> {
    let test = wrap(localstats::two_energy_independence(
        &batch.batch,
        energy,
        energy_prime,
        half_width,
    ))?;
    to_python(py, &test)
}

#[pyfunction]
#[pyo3(signature = (intensity, energies, half_width, replicas, n_particles, seed=0))]
fn poisson_fixture(
    intensity: f64,
    energies: Vec<f64>,
    half_width: f64,
    replicas: usize,
    n_particles: usize,
    seed: u64,
) -> PyRes<PyBatch> {
    Ok(PyBatch {
        batch: wrap(localstats::poisson_fixture(
            intensity,
            &energies,
            half_width,
            replicas,
            n_particles,
            seed,
        ))?,
    })
}

/// Runs the acceptance criteria and returns one dict per criterion.
#[pyfunction]
#[pyo3(signature = (quick=true, only=None))]
fn validate(py: Python<'_>, quick: bool, only: Option<Vec<u8>>) -> PyRes<Py<PyAny>> {
    let outcomes = py.detach(|| {
        Suite::new(ValidateOptions {
            quick,
            fixtures: None,
            only,
        })
        .run(|_| {})
    });
    to_python(py, &outcomes)
}

#[pymodule]
pub fn betagas_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_class::<PyBatch>()?;
    m.add_function(wrap_pyfunction!(solve_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(reference_density, m)?)?;
    m.add_function(wrap_pyfunction!(mcmc_sample, m)?)?;
    m.add_function(wrap_pyfunction!(tridiagonal_sample, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_marginal, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_partition_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(local_points, m)?)?;
    m.add_function(wrap_pyfunction!(window_counts, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_report, m)?)?;
    m.add_function(wrap_pyfunction!(correlation_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(pair_factorization, m)?)?;
    m.add_function(wrap_pyfunction!(two_energy_independence, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_fixture, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
