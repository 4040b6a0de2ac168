use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use dissipative_chain::dynamics::{default_t_max, evolve as evolve_state, SectorState, DEFAULT_STEADY_TOL};
use dissipative_chain::experiments::{
    acceptance, full_liouvillian, run_preset as run_records, solve_full, solve_sector, to_csv_string, ExperimentConfig,
    Preset, CSV_HEADER,
};
use dissipative_chain::model::{self, Geometry, SectorModel, SiteMap};
use dissipative_chain::observables::{self as obs, ChainState};
use dissipative_chain::operator::DensityMatrix;
use dissipative_chain::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_geometry(name: &str) -> PyResult<Geometry> {
    match name {
        "A" | "a" => Ok(Geometry::A),
        "B" | "b" => Ok(Geometry::B),
        _ => Err(PyValueError::new_err(format!(
            "unknown geometry `{name}`, expected \"A\" or \"B\""
        ))),
    }
}

/// Chain geometry, size and rates.
#[pyclass(name = "ChainConfig", module = "dchain")]
#[derive(Clone)]
struct PyChainConfig {
    inner: model::ChainConfig,
}

#[pymethods]
impl PyChainConfig {
    #[new]
    #[pyo3(signature = (geometry, n, delta=1.0, kappa=0.2, theta=None, gamma_engineered=0.1, gamma_dephasing=0.0))]
    fn new(
        geometry: &str,
        n: usize,
        delta: f64,
        kappa: f64,
        theta: Option<f64>,
        gamma_engineered: f64,
        gamma_dephasing: f64,
    ) -> PyResult<Self> {
        let inner = model::ChainConfig {
            geometry: parse_geometry(geometry)?,
            n,
            delta,
            kappa,
            theta: theta.unwrap_or(kappa),
            gamma_engineered,
            gamma_dephasing,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn geometry(&self) -> String {
        self.inner.geometry.to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.inner.kappa
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn gamma_engineered(&self) -> f64 {
        self.inner.gamma_engineered
    }

    #[getter]
    fn gamma_dephasing(&self) -> f64 {
        self.inner.gamma_dephasing
    }

    /// Linear site indices of the two dissipatively coupled qubits.
    fn primary(&self) -> PyResult<(usize, usize)> {
        Ok(SiteMap::for_config(&self.inner).map_err(to_py)?.primary())
    }

    /// Mirror partner of a site, or None for geometry A.
    fn mirror(&self, site: usize) -> PyResult<Option<usize>> {
        Ok(SiteMap::for_config(&self.inner).map_err(to_py)?.mirror(site))
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "ChainConfig(geometry={:?}, n={}, delta={}, kappa={}, theta={}, gamma_engineered={}, gamma_dephasing={})",
            c.geometry.to_string(),
            c.n,
            c.delta,
            c.kappa,
            c.theta,
            c.gamma_engineered,
            c.gamma_dephasing
        )
    }
}

enum Repr {
    Full(DensityMatrix),
    Sector(SectorState),
}

/// Density matrix of a chain, stored in full or restricted to one excitation sector.
#[pyclass(name = "State", module = "dchain", frozen)]
struct PyState {
    repr: Repr,
}

impl PyState {
    fn chain(&self) -> &dyn ChainState {
        match &self.repr {
            Repr::Full(rho) => rho,
            Repr::Sector(s) => s,
        }
    }

    fn density(&self) -> &DensityMatrix {
        match &self.repr {
            Repr::Full(rho) => rho,
            Repr::Sector(s) => s.density(),
        }
    }
}

fn rows(rho: &DensityMatrix) -> Vec<Vec<C64>> {
    rho.as_array().outer_iter().map(|row| row.to_vec()).collect()
}

#[pymethods]
impl PyState {
    #[getter]
    fn n(&self) -> usize {
        self.chain().n_qubits()
    }

    #[getter]
    fn is_sector(&self) -> bool {
        matches!(self.repr, Repr::Sector(_))
    }

    /// Full-space indices spanned by the stored block.
    fn basis(&self) -> Vec<usize> {
        match &self.repr {
            Repr::Full(rho) => (0..rho.dim()).collect(),
            Repr::Sector(s) => s.basis().to_vec(),
        }
    }

    /// Stored block as nested lists of complex numbers.
    fn matrix(&self) -> Vec<Vec<C64>> {
        rows(self.density())
    }

    /// Full `2^n` density matrix.
    fn full_matrix(&self) -> PyResult<Vec<Vec<C64>>> {
        match &self.repr {
            Repr::Full(rho) => Ok(rows(rho)),
            Repr::Sector(s) => Ok(rows(&s.embed().map_err(to_py)?)),
        }
    }

    fn correlator(&self, i: usize, j: usize) -> PyResult<C64> {
        obs::correlator(self.chain(), i, j).map_err(to_py)
    }

    fn sigma_z(&self, site: usize) -> PyResult<f64> {
        obs::sigma_z(self.chain(), site).map_err(to_py)
    }

    fn negativity(&self, i: usize, j: usize) -> PyResult<f64> {
        obs::pair_negativity(self.chain(), i, j).map_err(to_py)
    }

    /// Reduced density matrix of the kept sites.
    fn reduced(&self, keep: Vec<usize>) -> PyResult<Vec<Vec<C64>>> {
        Ok(rows(&self.chain().reduced(&keep).map_err(to_py)?))
    }

    fn purity(&self) -> f64 {
        obs::purity(self.density())
    }

    /// `<psi|rho|psi>` for full-space amplitudes, normalized internally.
    fn fidelity(&self, amplitudes: Vec<C64>) -> PyResult<f64> {
        let dim = 1usize << self.n();
        if amplitudes.len() != dim {
            return Err(PyValueError::new_err(format!(
                "expected {dim} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm2 == 0.0 {
            return Err(PyValueError::new_err("zero state vector"));
        }
        let basis = self.basis();
        let rho = self.density().as_array();
        let mut acc = C64::new(0.0, 0.0);
        for (a, &p) in basis.iter().enumerate() {
            for (b, &q) in basis.iter().enumerate() {
                acc += amplitudes[p].conj() * rho[[a, b]] * amplitudes[q];
            }
        }
        Ok(acc.re / norm2)
    }

    fn __repr__(&self) -> String {
        format!(
            "State(n={}, {} block of dim {})",
            self.n(),
            if self.is_sector() { "sector" } else { "full" },
            self.density().dim()
        )
    }
}

/// Outcome of a steady-state search.
#[pyclass(name = "SteadyState", module = "dchain", frozen)]
struct PySteadyState {
    #[pyo3(get)]
    state: Py<PyState>,
    #[pyo3(get)]
    converged: bool,
    #[pyo3(get)]
    residual: f64,
    /// Simulated time at which the search stopped.
    #[pyo3(get)]
    time: f64,
}

/// Steady state reached from the chain's initial condition.
///
/// With `sector=True` the search runs in the single-excitation sector.
#[pyfunction]
#[pyo3(signature = (config, sector=true, tol=DEFAULT_STEADY_TOL, t_max=None))]
fn steady_state(
    py: Python<'_>,
    config: &PyChainConfig,
    sector: bool,
    tol: f64,
    t_max: Option<f64>,
) -> PyResult<PySteadyState> {
    let cfg = config.inner.clone();
    let t_max = t_max.unwrap_or_else(|| default_t_max(&cfg));
    let (repr, converged, residual, time) = py
        .detach(|| {
            if sector {
                solve_sector(&cfg, tol, t_max).map(|s| {
                    let r = s.result;
                    (Repr::Sector(s.state), r.converged, r.residual, r.elapsed_time)
                })
            } else {
                solve_full(&cfg, tol, t_max).map(|r| (Repr::Full(r.state), r.converged, r.residual, r.elapsed_time))
            }
        })
        .map_err(to_py)?;
    Ok(PySteadyState {
        state: Py::new(py, PyState { repr })?,
        converged,
        residual,
        time,
    })
}

/// Snapshots `(t, State)` of the evolution from the chain's initial condition.
#[pyfunction]
#[pyo3(signature = (config, t_end, dt_out, sector=false))]
fn evolve(
    py: Python<'_>,
    config: &PyChainConfig,
    t_end: f64,
    dt_out: f64,
    sector: bool,
) -> PyResult<Vec<(f64, PyState)>> {
    let cfg = config.inner.clone();
    let run = py
        .detach(|| -> dissipative_chain::Result<_> {
            if sector {
                let model = SectorModel::build(&cfg, 1)?;
                let run = evolve_state(&model.initial_state(&cfg)?, &model.liouvillian()?, t_end, dt_out)?;
                let states = run
                    .states
                    .into_iter()
                    .map(|rho| SectorState::from_model(&model, rho).map(Repr::Sector))
                    .collect::<dissipative_chain::Result<Vec<_>>>()?;
                Ok((run.times, states))
            } else {
                let l = full_liouvillian(&cfg)?;
                let rho0 = model::initial_state(&cfg, &SiteMap::for_config(&cfg)?)?;
                let run = evolve_state(&rho0, &l, t_end, dt_out)?;
                Ok((run.times, run.states.into_iter().map(Repr::Full).collect()))
            }
        })
        .map_err(to_py)?;
    Ok(run
        .0
        .into_iter()
        .zip(run.1)
        .map(|(t, repr)| (t, PyState { repr }))
        .collect())
}

/// Closed-form geometry A steady state as `2^n` amplitudes.
#[pyfunction]
fn reference_w_state(n: usize) -> PyResult<Vec<C64>> {
    Ok(model::reference_w_state(n).map_err(to_py)?.amplitudes().to_vec())
}

/// CSV text of a named preset.
#[pyfunction]
#[pyo3(signature = (name, n_max=None, gamma=None, kappa=None))]
fn run_preset(
    py: Python<'_>,
    name: &str,
    n_max: Option<usize>,
    gamma: Option<f64>,
    kappa: Option<f64>,
) -> PyResult<String> {
    let preset: Preset = name.parse().map_err(to_py)?;
    let mut cfg = ExperimentConfig::preset(preset);
    if let Some(k) = n_max {
        if preset.is_sweep() {
            cfg.n_list = Some((4..=k).step_by(2).collect());
        } else {
            cfg.n = Some(k);
        }
    }
    cfg.gamma_dephasing = gamma;
    cfg.kappa = kappa;
    cfg.theta = kappa;
    let records = py.detach(|| run_records(&cfg)).map_err(to_py)?;
    Ok(to_csv_string(&records))
}

/// CSV text of an experiment given as a JSON config string.
#[pyfunction]
fn run_config(py: Python<'_>, json: &str) -> PyResult<String> {
    let cfg = ExperimentConfig::from_json(json).map_err(to_py)?;
    let records = py.detach(|| run_records(&cfg)).map_err(to_py)?;
    Ok(to_csv_string(&records))
}

/// Runs one acceptance criterion; returns `(passed, report)`.
#[pyfunction]
fn verify(py: Python<'_>, criterion: usize) -> PyResult<(bool, String)> {
    if !(1..=acceptance::CRITERIA).contains(&criterion) {
        return Err(PyValueError::new_err(format!(
            "criterion must lie in 1..={}",
            acceptance::CRITERIA
        )));
    }
    let report = py.detach(|| acceptance::run(criterion));
    Ok((report.passed, report.to_string()))
}

#[pymodule]
fn dchain(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChainConfig>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PySteadyState>()?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(reference_w_state, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("CSV_HEADER", CSV_HEADER)?;
    Ok(())
}
