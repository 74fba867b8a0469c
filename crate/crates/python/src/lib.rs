//! Python bindings. Report-like results come back as plain dicts (via a JSON
//! round trip); sequences, functions, matrices and series are wrapped classes.

use carleman_lab::formal_series::{
    cauchy_product, classify_membership, classify_membership_matrix, hadamard_product, theta_series, weighted_norm,
};
use carleman_lab::matrices::{
    associated_matrix, build_example_matrix, check_matrix_condition, verify_dynkin_sandwich, verify_good_equivalence,
};
use carleman_lab::sequences::{check_sequence_condition, compare_sequences, validate_weight_sequence};
use carleman_lab::weight_functions::{check_function_condition, legendre_lower, legendre_upper};
use carleman_lab::witness::{build_exponent_basis, build_gap_sequence, build_witness, WitnessVariant, WitnessWeight};
use carleman_lab::{io, Error, LogGrid};
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn grid_of(omega: &carleman_lab::WeightFunction, grid: Option<(f64, f64, usize)>) -> PyResult<LogGrid> {
    match grid {
        Some((a, b, n)) => LogGrid::from_t(a, b, n).map_err(err),
        None => Ok(LogGrid::default_for(omega)),
    }
}

/// Log-convex weight sequence `M_0 = 1 <= M_1 <= ...` stored as `log M_j`.
#[pyclass(name = "WeightSequence", module = "carleman_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySequence(carleman_lab::WeightSequence);

#[pymethods]
impl PySequence {
    /// `family` is `factorial`, `gevrey:s`, `qgevrey:q` or `loglog:lambda`.
    #[new]
    #[pyo3(signature = (family, j_max = 512))]
    fn new(family: &str, j_max: usize) -> PyResult<Self> {
        Ok(Self(carleman_lab::WeightSequence::new(parse(family)?, j_max).map_err(err)?))
    }

    #[staticmethod]
    fn from_log_values(log_m: Vec<f64>) -> PyResult<Self> {
        Ok(Self(carleman_lab::WeightSequence::custom(log_m).map_err(err)?))
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        Ok(Self(io::read_sequence_csv(&path).map_err(err)?))
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        io::write_sequence_csv(&path, &self.0).map_err(err)
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.0.truncation()
    }

    #[getter]
    fn family(&self) -> String {
        self.0.family().to_string()
    }

    fn log_m(&self) -> Vec<f64> {
        self.0.log_m().to_vec()
    }

    fn log_mu(&self) -> Vec<f64> {
        self.0.log_mu().to_vec()
    }

    fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &validate_weight_sequence(&self.0))
    }

    /// Condition id such as `mg`, `nq`, `pointwise-square`, `mixed:2`.
    fn check(&self, py: Python<'_>, cond: &str) -> PyResult<Py<PyAny>> {
        to_py(py, &check_sequence_condition(&self.0, parse(cond)?).map_err(err)?)
    }

    fn compare(&self, py: Python<'_>, other: &PySequence) -> PyResult<Py<PyAny>> {
        to_py(py, &compare_sequences(&self.0, &other.0))
    }

    fn __len__(&self) -> usize {
        self.0.truncation() + 1
    }

    fn __repr__(&self) -> String {
        format!("WeightSequence('{}', J={})", self.0.family(), self.0.truncation())
    }
}

#[pyclass(name = "WeightFunction", module = "carleman_lab", frozen)]
struct PyFunction(carleman_lab::WeightFunction);

#[pymethods]
impl PyFunction {
    /// `omega(t) = t^alpha`.
    #[staticmethod]
    fn power(alpha: f64) -> PyResult<Self> {
        Ok(Self(carleman_lab::WeightFunction::power(alpha).map_err(err)?))
    }

    /// The associated function `omega_M`.
    #[staticmethod]
    fn associated(seq: &PySequence) -> Self {
        Self(carleman_lab::WeightFunction::associated(seq.0.clone()))
    }

    /// Samples `(t, omega)` from a CSV file.
    #[staticmethod]
    fn tabulated(path: PathBuf) -> PyResult<Self> {
        Ok(Self(carleman_lab::WeightFunction::Tabulated(io::read_tabulated_csv(&path).map_err(err)?)))
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.eval(t).value
    }

    fn upper(&self, py: Python<'_>, x: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &legendre_upper(&self.0, x).map_err(err)?)
    }

    fn lower(&self, py: Python<'_>, t: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &legendre_lower(&self.0, t).map_err(err)?)
    }

    /// `grid` is `(tmin, tmax, points)`.
    #[pyo3(signature = (cond, grid = None))]
    fn check(&self, py: Python<'_>, cond: &str, grid: Option<(f64, f64, usize)>) -> PyResult<Py<PyAny>> {
        let g = grid_of(&self.0, grid)?;
        to_py(py, &check_function_condition(&self.0, parse(cond)?, &g).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("WeightFunction({})", self.0.describe())
    }
}

#[pyclass(name = "WeightMatrix", module = "carleman_lab", frozen)]
struct PyMatrix(carleman_lab::WeightMatrix);

#[pymethods]
impl PyMatrix {
    /// Rows `log M_j = lambda^{-1} j log log j` past the base index.
    #[staticmethod]
    #[pyo3(signature = (lambdas, j_max = 1024))]
    fn example(lambdas: Vec<f64>, j_max: usize) -> PyResult<Self> {
        Ok(Self(build_example_matrix(&lambdas, j_max).map_err(err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (function, lambdas, j_max = 256))]
    fn associated(function: &PyFunction, lambdas: Vec<f64>, j_max: usize) -> PyResult<Self> {
        Ok(Self(associated_matrix(&function.0, &lambdas, j_max).map_err(err)?))
    }

    #[staticmethod]
    fn read_json(path: PathBuf) -> PyResult<Self> {
        Ok(Self(io::read_matrix_json(&path).map_err(err)?))
    }

    fn write_json(&self, path: PathBuf) -> PyResult<()> {
        io::write_matrix_json(&path, &self.0).map_err(err)
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.0.lambdas().to_vec()
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.0.truncation()
    }

    fn row(&self, lambda: f64) -> PyResult<PySequence> {
        self.0
            .row(lambda)
            .cloned()
            .map(PySequence)
            .ok_or_else(|| PyValueError::new_err(format!("no row with lambda = {lambda}")))
    }

    fn check(&self, py: Python<'_>, cond: &str) -> PyResult<Py<PyAny>> {
        to_py(py, &check_matrix_condition(&self.0, parse(cond)?).map_err(err)?)
    }

    #[pyo3(signature = (function, lam, grid = None))]
    fn good_equivalence(
        &self,
        py: Python<'_>,
        function: &PyFunction,
        lam: f64,
        grid: Option<(f64, f64, usize)>,
    ) -> PyResult<Py<PyAny>> {
        let g = grid_of(&function.0, grid)?;
        to_py(py, &verify_good_equivalence(&function.0, &self.0, lam, &g).map_err(err)?)
    }

    fn dynkin(&self, py: Python<'_>, kappa: f64, grid: (f64, f64, usize)) -> PyResult<Py<PyAny>> {
        let g = LogGrid::from_t(grid.0, grid.1, grid.2).map_err(err)?;
        to_py(py, &verify_dynkin_sandwich(&self.0, kappa, &g).map_err(err)?)
    }
}

/// Truncated power series `sum F_j z^j` with coefficients kept as phase and log-modulus.
#[pyclass(name = "PowerSeries", module = "carleman_lab", frozen)]
struct PySeries(carleman_lab::WeightedPowerSeries);

#[pymethods]
impl PySeries {
    #[new]
    fn new(values: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self(carleman_lab::WeightedPowerSeries::from_complex(&values).map_err(err)?))
    }

    /// theta_M truncated at `j_max`, summing `k_terms` terms.
    #[staticmethod]
    #[pyo3(signature = (seq, j_max, k_terms = None))]
    fn theta(seq: &PySequence, j_max: usize, k_terms: Option<usize>) -> PyResult<Self> {
        let k = k_terms.unwrap_or(j_max + 64);
        Ok(Self(theta_series(&seq.0, j_max, k).map_err(err)?.series))
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        Ok(Self(io::read_series_csv(&path).map_err(err)?))
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        io::write_series_csv(&path, &self.0).map_err(err)
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.0.truncation()
    }

    /// Coefficients as complex numbers (may overflow to inf).
    fn values(&self) -> Vec<Complex64> {
        self.0.coeffs().iter().map(|c| c.to_complex()).collect()
    }

    fn log_magnitudes(&self) -> Vec<f64> {
        self.0.coeffs().iter().map(|c| c.log_mag).collect()
    }

    fn support(&self) -> Vec<usize> {
        self.0.support()
    }

    fn cauchy(&self, other: &PySeries) -> PyResult<Self> {
        Ok(Self(cauchy_product(&self.0, &other.0).map_err(err)?))
    }

    fn hadamard(&self, other: &PySeries) -> PyResult<Self> {
        Ok(Self(hadamard_product(&self.0, &other.0).map_err(err)?))
    }

    /// `log |F|^M_h`.
    fn log_norm(&self, seq: &PySequence, h: f64) -> PyResult<f64> {
        weighted_norm(&self.0, &seq.0, h).map_err(err)
    }

    fn classify(&self, py: Python<'_>, seq: &PySequence) -> PyResult<Py<PyAny>> {
        to_py(py, &classify_membership(&self.0, &seq.0).map_err(err)?)
    }

    fn classify_matrix(&self, py: Python<'_>, mx: &PyMatrix) -> PyResult<Py<PyAny>> {
        to_py(py, &classify_membership_matrix(&self.0, &mx.0).map_err(err)?)
    }

    fn __len__(&self) -> usize {
        self.0.truncation() + 1
    }
}

fn with_weight<R>(weight: &Bound<'_, PyAny>, f: impl FnOnce(WitnessWeight<'_>) -> PyResult<R>) -> PyResult<R> {
    if let Ok(s) = weight.extract::<PyRef<'_, PySequence>>() {
        return f(WitnessWeight::Sequence(&s.0));
    }
    if let Ok(m) = weight.extract::<PyRef<'_, PyMatrix>>() {
        return f(WitnessWeight::Matrix(&m.0));
    }
    Err(PyValueError::new_err("weight must be a WeightSequence or WeightMatrix"))
}

/// Gap indices `k_1 < ... < k_P`; `thresholds` defaults to `T_p = p`.
#[pyfunction]
#[pyo3(signature = (weight, steps, variant = "cauchy", thresholds = None))]
fn gap_sequence(
    weight: &Bound<'_, PyAny>,
    steps: usize,
    variant: &str,
    thresholds: Option<Vec<f64>>,
) -> PyResult<Vec<usize>> {
    let variant: WitnessVariant = parse(variant)?;
    let t = thresholds.unwrap_or_else(|| (1..=steps).map(|p| p as f64).collect());
    let oracle = carleman_lab::SummationWeightOracle::Trivial;
    with_weight(weight, |w| Ok(build_gap_sequence(w, steps, variant, &oracle, Some(&t)).map_err(err)?.k))
}

#[pyfunction]
fn exponent_basis(py: Python<'_>, count: usize, lower: f64, upper: f64, degree: u32) -> PyResult<Py<PyAny>> {
    to_py(py, &build_exponent_basis(count, lower, upper, degree).map_err(err)?)
}

/// Generator series `g_b` supported on the gap.
#[pyfunction]
#[pyo3(signature = (b, gap, weight, j_max, variant = "cauchy"))]
fn witness(b: f64, gap: Vec<usize>, weight: &Bound<'_, PyAny>, j_max: usize, variant: &str) -> PyResult<PySeries> {
    let gap = carleman_lab::GapSequence::new(gap, parse(variant)?).map_err(err)?;
    with_weight(weight, |w| Ok(PySeries(build_witness(b, &gap, w, j_max).map_err(err)?)))
}

#[pymodule(name = "carleman_lab")]
fn carleman_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySequence>()?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PySeries>()?;
    m.add_function(wrap_pyfunction!(gap_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_basis, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    Ok(())
}
