//! Python bindings. Vectors cross the boundary as lists of floats.

use maxent_core::diagnostics::{self, GapEstimate};
use maxent_core::{self as core, BasisKind, Error, MomentVector};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Range { .. } | Error::NonFinite { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> PyResult<T> {
    s.parse()
        .map_err(|_| PyValueError::new_err(format!("unknown {what} '{s}'")))
}

#[pyclass(name = "QuadratureRule", frozen)]
struct PyRule(core::QuadratureRule);

#[pymethods]
impl PyRule {
    /// Gauss-Legendre rule with `n` nodes on [0, 1].
    #[new]
    fn new(n: usize) -> PyResult<Self> {
        core::build_gauss_legendre(n).map(PyRule).map_err(to_py)
    }

    #[getter]
    fn size(&self) -> usize {
        self.0.size()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    fn integrate(&self, values: Vec<f64>) -> PyResult<f64> {
        self.0.integrate(&values).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("QuadratureRule({})", self.0.size())
    }
}

#[pyclass(name = "BasisMatrix", frozen)]
struct PyBasis(core::BasisMatrix);

#[pymethods]
impl PyBasis {
    #[new]
    #[pyo3(signature = (order, rule, basis = "chebyshev"))]
    fn new(order: usize, rule: &PyRule, basis: &str) -> PyResult<Self> {
        let kind: BasisKind = parse(basis, "basis")?;
        core::build_basis_matrix(kind, order, &rule.0)
            .map(PyBasis)
            .map_err(to_py)
    }

    #[getter]
    fn basis(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.0.rows() {
            return Err(PyValueError::new_err(format!("row {i} out of range")));
        }
        Ok(self.0.row(i).to_vec())
    }

    /// Moments `Σⱼ wⱼ t_ij fⱼ` of nodal values.
    fn moments(&self, values: Vec<f64>, rule: &PyRule) -> PyResult<Vec<f64>> {
        core::compute_moments(&values, &self.0, &rule.0)
            .map(MomentVector::into_values)
            .map_err(to_py)
    }
}

impl PyBasis {
    fn moment_vector(&self, mu: Vec<f64>) -> PyResult<MomentVector> {
        MomentVector::new(self.0.kind(), mu).map_err(to_py)
    }
}

#[pyclass(name = "TestFunction", frozen)]
struct PyFunction(core::TestFunction);

#[pymethods]
impl PyFunction {
    /// A corpus function by id; `x1`, `x2` apply to `double-parabola`.
    #[new]
    #[pyo3(signature = (id, x1 = None, x2 = None))]
    fn new(id: &str, x1: Option<f64>, x2: Option<f64>) -> PyResult<Self> {
        let f: core::TestFunction = parse(id, "function")?;
        match (f, x1, x2) {
            (_, None, None) => Ok(PyFunction(f)),
            (core::TestFunction::DoubleParabola { x1: d1, x2: d2 }, a, b) => {
                core::TestFunction::double_parabola(a.unwrap_or(d1), b.unwrap_or(d2))
                    .map(PyFunction)
                    .map_err(to_py)
            }
            _ => Err(PyValueError::new_err(format!("{id} takes no parameters"))),
        }
    }

    #[staticmethod]
    fn ids() -> Vec<&'static str> {
        core::TestFunction::IDS.to_vec()
    }

    #[getter]
    fn id(&self) -> &'static str {
        self.0.id()
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.0.eval(x).map_err(to_py)
    }

    fn sample(&self, rule: &PyRule) -> PyResult<Vec<f64>> {
        self.0.sample(&rule.0).map_err(to_py)
    }

    #[pyo3(signature = (order, basis = "chebyshev"))]
    fn analytic_moments(&self, order: usize, basis: &str) -> PyResult<Vec<f64>> {
        self.0
            .analytic_moments_in(parse(basis, "basis")?, order)
            .map(MomentVector::into_values)
            .map_err(to_py)
    }

    #[pyo3(signature = (order, rule, basis = "chebyshev"))]
    fn numeric_moments(&self, order: usize, rule: &PyRule, basis: &str) -> PyResult<Vec<f64>> {
        self.0
            .numeric_moments_in(parse(basis, "basis")?, order, &rule.0)
            .map(MomentVector::into_values)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("TestFunction('{}')", self.0)
    }
}

#[pyclass(name = "Reconstruction", frozen, get_all)]
struct PyReconstruction {
    lambda_: Vec<f64>,
    rho: Vec<f64>,
    rho_tilde: Vec<f64>,
    partition_value: f64,
    iterations: usize,
    delta1: f64,
    mu0_residual: f64,
    objective: f64,
    converged: bool,
    objective_history: Vec<f64>,
}

#[pymethods]
impl PyReconstruction {
    fn __repr__(&self) -> String {
        format!(
            "Reconstruction(M={}, iterations={}, delta1={:e}, converged={})",
            self.lambda_.len().saturating_sub(1),
            self.iterations,
            self.delta1,
            self.converged
        )
    }
}

impl From<core::Reconstruction> for PyReconstruction {
    fn from(r: core::Reconstruction) -> Self {
        PyReconstruction {
            lambda_: r.lambda,
            rho: r.rho,
            rho_tilde: r.rho_tilde,
            partition_value: r.partition_value,
            iterations: r.iterations_used,
            delta1: r.delta1_achieved,
            mu0_residual: r.mu0_residual,
            objective: r.objective,
            converged: r.converged,
            objective_history: r.objective_history,
        }
    }
}

/// Maximum-entropy density matching `mu` on the rule's nodes.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (
    mu, matrix, rule, *, max_iterations = core::solver::DEFAULT_MAX_ITERATIONS,
    delta1_target = core::solver::DEFAULT_DELTA1_TARGET, step_strategy = "hybrid",
    exponent_cap = core::solver::DEFAULT_EXPONENT_CAP
))]
fn solve(
    py: Python<'_>,
    mu: Vec<f64>,
    matrix: &PyBasis,
    rule: &PyRule,
    max_iterations: usize,
    delta1_target: f64,
    step_strategy: &str,
    exponent_cap: f64,
) -> PyResult<PyReconstruction> {
    let mu = matrix.moment_vector(mu)?;
    let cfg = core::SolverConfig {
        max_iterations,
        delta1_target,
        step_strategy: parse(step_strategy, "step strategy")?,
        exponent_cap,
        verbose_every: 0,
    };
    py.detach(|| core::solve(&mu, &matrix.0, &rule.0, &cfg))
        .map(PyReconstruction::from)
        .map_err(to_py)
}

#[pyfunction]
fn dual_objective(lam: Vec<f64>, mu: Vec<f64>, matrix: &PyBasis, rule: &PyRule) -> PyResult<f64> {
    let mu = matrix.moment_vector(mu)?;
    core::dual_objective(&lam, &matrix.0, &rule.0, &mu).map_err(to_py)
}

#[pyfunction]
fn dual_gradient(
    lam: Vec<f64>,
    mu: Vec<f64>,
    matrix: &PyBasis,
    rule: &PyRule,
) -> PyResult<Vec<f64>> {
    let mu = matrix.moment_vector(mu)?;
    core::dual_gradient(&lam, &matrix.0, &rule.0, &mu).map_err(to_py)
}

fn gap_dict<'py>(py: Python<'py>, g: &GapEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("left_edge", g.left_edge)?;
    d.set_item("right_edge", g.right_edge)?;
    d.set_item("width", g.width)?;
    d.set_item("epsilon", g.epsilon)?;
    d.set_item("nodes", g.nodes)?;
    d.set_item("node_width", g.node_width)?;
    d.set_item("cell_width", g.cell_width)?;
    Ok(d)
}

/// Every measure of one reconstruction, as a dict.
#[pyfunction]
#[pyo3(signature = (mu, f_exact, rho, matrix, rule, gap_epsilon = None))]
fn diagnose<'py>(
    py: Python<'py>,
    mu: Vec<f64>,
    f_exact: Vec<f64>,
    rho: Vec<f64>,
    matrix: &PyBasis,
    rule: &PyRule,
    gap_epsilon: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mu = matrix.moment_vector(mu)?;
    let r = diagnostics::diagnose(&mu, &f_exact, &rho, &matrix.0, &rule.0, gap_epsilon)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("delta1", r.delta1)?;
    d.set_item("delta2", r.delta2)?;
    d.set_item("entropy", r.entropy)?;
    d.set_item("d_kl", r.d_kl)?;
    d.set_item("d_v", r.d_v)?;
    d.set_item("kl_lower_bound", r.kl_lower_bound)?;
    d.set_item("bound_satisfied", r.bound_satisfied)?;
    match &r.gap {
        Some(g) => d.set_item("gap", gap_dict(py, g)?)?,
        None => d.set_item("gap", py.None())?,
    }
    Ok(d)
}

/// `(D_KL, D_v)` after rescaling both densities to unit mass.
#[pyfunction]
fn kl_and_variation(f_exact: Vec<f64>, rho: Vec<f64>, rule: &PyRule) -> PyResult<(f64, f64)> {
    diagnostics::kl_and_variation(&f_exact, &rho, &rule.0).map_err(to_py)
}

#[pyfunction]
fn kullback_bound(d_v: f64) -> f64 {
    diagnostics::kullback_bound(d_v)
}

#[pyfunction]
#[pyo3(signature = (rho, rule, epsilon = diagnostics::DEFAULT_GAP_EPSILON))]
fn estimate_gap<'py>(
    py: Python<'py>,
    rho: Vec<f64>,
    rule: &PyRule,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let g = diagnostics::estimate_gap(&rho, &rule.0, epsilon).map_err(to_py)?;
    gap_dict(py, &g)
}

#[pyclass(name = "LogisticConfig", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyLogisticConfig {
    gamma: f64,
    ensemble_size: usize,
    transient_steps: usize,
    sample_steps: usize,
    histogram_bins: usize,
    rng_seed: u64,
}

#[pymethods]
impl PyLogisticConfig {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let d = core::LogisticConfig::default();
        let mut cfg = PyLogisticConfig {
            gamma: d.gamma,
            ensemble_size: d.ensemble_size,
            transient_steps: d.transient_steps,
            sample_steps: d.sample_steps,
            histogram_bins: d.histogram_bins,
            rng_seed: d.rng_seed,
        };
        if let Some(overrides) = overrides {
            for (k, v) in overrides.iter() {
                let key: String = k.extract()?;
                match key.as_str() {
                    "gamma" => cfg.gamma = v.extract()?,
                    "ensemble_size" => cfg.ensemble_size = v.extract()?,
                    "transient_steps" => cfg.transient_steps = v.extract()?,
                    "sample_steps" => cfg.sample_steps = v.extract()?,
                    "histogram_bins" => cfg.histogram_bins = v.extract()?,
                    "rng_seed" => cfg.rng_seed = v.extract()?,
                    other => return Err(PyValueError::new_err(format!("unknown field '{other}'"))),
                }
            }
        }
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!(
            "LogisticConfig(gamma={}, ensemble_size={}, transient_steps={}, sample_steps={}, \
             histogram_bins={}, rng_seed={})",
            self.gamma,
            self.ensemble_size,
            self.transient_steps,
            self.sample_steps,
            self.histogram_bins,
            self.rng_seed
        )
    }
}

impl PyLogisticConfig {
    fn core(&self) -> core::LogisticConfig {
        core::LogisticConfig {
            gamma: self.gamma,
            ensemble_size: self.ensemble_size,
            transient_steps: self.transient_steps,
            sample_steps: self.sample_steps,
            histogram_bins: self.histogram_bins,
            rng_seed: self.rng_seed,
        }
    }
}

/// Shifted-Chebyshev moments of the logistic-map invariant density.
#[pyfunction]
fn logistic_moments(py: Python<'_>, cfg: &PyLogisticConfig, order: usize) -> PyResult<Vec<f64>> {
    let cfg = cfg.core();
    py.detach(|| core::generate_map_moments(&cfg, order))
        .map(MomentVector::into_values)
        .map_err(to_py)
}

/// `(bin_edges, densities)` of the logistic-map histogram.
#[pyfunction]
fn logistic_histogram(py: Python<'_>, cfg: &PyLogisticConfig) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = cfg.core();
    let h = py
        .detach(|| core::generate_histogram(&cfg))
        .map_err(to_py)?;
    Ok((h.bin_edges().to_vec(), h.densities().to_vec()))
}

/// `T*_n(x)`.
#[pyfunction]
fn shifted_chebyshev(n: usize, x: f64) -> PyResult<f64> {
    core::eval_shifted_chebyshev(n, x).map_err(to_py)
}

#[pymodule]
fn maxent(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRule>()?;
    m.add_class::<PyBasis>()?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyReconstruction>()?;
    m.add_class::<PyLogisticConfig>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(dual_objective, m)?)?;
    m.add_function(wrap_pyfunction!(dual_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(diagnose, m)?)?;
    m.add_function(wrap_pyfunction!(kl_and_variation, m)?)?;
    m.add_function(wrap_pyfunction!(kullback_bound, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gap, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_moments, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(shifted_chebyshev, m)?)?;
    Ok(())
}
