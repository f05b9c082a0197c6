//! Python bindings (`import sturmpy`).
//!
//! Words cross the boundary as `"0101"` strings and energies as Python
//! `complex` (or `float`). Structured results come back as plain dicts and
//! lists built from the core crate's serde representation.

use num_bigint::BigInt;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use sturmian::partition as part;
use sturmian::spectral::{growth, lyapunov, spectrum};
use sturmian::{sturmian as words, transfer, verify};
use sturmian::{ErrorClass, Phase, RotationParams, Word};

fn to_py_err(e: sturmian::Error) -> PyErr {
    let msg = e.to_string();
    match e.class() {
        ErrorClass::Config => PyValueError::new_err(msg),
        ErrorClass::Precision => PyArithmeticError::new_err(msg),
        ErrorClass::Resource => PyMemoryError::new_err(msg),
        ErrorClass::Other => PyRuntimeError::new_err(msg),
    }
}

trait IntoPyResult<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPyResult<T> for sturmian::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py_err)
    }
}

/// Converts any serde value to Python objects through `json.loads`.
fn to_object<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_word(w: &str) -> PyResult<Word> {
    w.parse().py()
}

/// A continued-fraction expansion `α = [0; a_1, a_2, …]`.
#[pyclass(name = "ContinuedFraction", module = "sturmpy", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyContinuedFraction(sturmian::ContinuedFraction);

#[pymethods]
impl PyContinuedFraction {
    #[new]
    fn new(coefficients: Vec<u64>) -> PyResult<Self> {
        sturmian::ContinuedFraction::new(coefficients).py().map(Self)
    }

    /// `fibonacci`, `silver` or `one-two`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        sturmian::ContinuedFraction::preset(name).py().map(Self)
    }

    /// Expands a decimal or ratio string to `depth` coefficients.
    #[staticmethod]
    #[pyo3(signature = (value, depth = 64))]
    fn from_value(value: &str, depth: usize) -> PyResult<Self> {
        sturmian::ContinuedFraction::expand_str(value, depth).py().map(Self)
    }

    #[getter]
    fn coefficients(&self) -> Vec<u64> {
        self.0.coefficients().to_vec()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    /// `(p_n, q_n)` for `n = 0..=depth`, as Python ints.
    fn convergents(&self) -> Vec<(BigInt, BigInt)> {
        self.0.convergents()
    }

    fn __float__(&self) -> f64 {
        self.0.to_f64()
    }

    fn __len__(&self) -> usize {
        self.0.depth()
    }

    fn __repr__(&self) -> String {
        format!("ContinuedFraction({})", self.0)
    }
}

/// `M(λ, E, w)` in factored form `e^{log_scale} · m`.
#[pyclass(name = "TransferProduct", module = "sturmpy", frozen)]
struct PyTransferProduct(transfer::TransferProduct);

#[pymethods]
impl PyTransferProduct {
    #[getter]
    fn log_norm(&self) -> f64 {
        self.0.log_norm()
    }

    #[getter]
    fn log_scale(&self) -> f64 {
        self.0.log_scale()
    }

    #[getter]
    fn length(&self) -> u64 {
        self.0.length()
    }

    #[getter]
    fn error_bound(&self) -> f64 {
        self.0.error_bound()
    }

    #[getter]
    fn det_defect(&self) -> f64 {
        self.0.det_defect()
    }

    /// The scaled factor `m` as `[[m00, m01], [m10, m11]]`.
    #[getter]
    fn scaled(&self) -> [[Complex64; 2]; 2] {
        let m = self.0.scaled().0;
        [[m[0], m[1]], [m[2], m[3]]]
    }

    /// The full matrix, or `None` if it overflows a double.
    fn matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        self.0.matrix().map(|m| [[m.0[0], m.0[1]], [m.0[2], m.0[3]]])
    }

    fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &self.0.to_record())
    }

    fn __repr__(&self) -> String {
        format!(
            "TransferProduct(length={}, log_norm={})",
            self.0.length(),
            self.0.log_norm()
        )
    }
}

#[pyfunction]
fn build_sn(cf: &PyContinuedFraction, n: i64) -> PyResult<String> {
    Ok(words::build_sn(&cf.0, n).py()?.to_string())
}

#[pyfunction]
fn c_prefix(cf: &PyContinuedFraction, length: usize) -> PyResult<String> {
    Ok(words::c_prefix(&cf.0, length).py()?.to_string())
}

/// `v_{α,θ}(first) ⋯ v_{α,θ}(last)`; `theta` is a decimal or ratio string.
#[pyfunction]
#[pyo3(signature = (cf, first, last, theta = "0"))]
fn rotation_word(cf: &PyContinuedFraction, first: i64, last: i64, theta: &str) -> PyResult<String> {
    let params = RotationParams::new(cf.0.clone(), Phase::parse(theta).py()?, 0.0);
    Ok(words::rotation_word(&params, first, last).py()?.to_string())
}

/// Sorted length-`ell` subwords of `c_α`.
#[pyfunction]
fn subwords(cf: &PyContinuedFraction, ell: usize) -> PyResult<Vec<String>> {
    Ok(words::subwords(&cf.0, ell).py()?.iter().map(Word::to_string).collect())
}

#[pyfunction]
fn is_member(word: &str, cf: &PyContinuedFraction) -> PyResult<bool> {
    part::is_member(&parse_word(word)?, &cf.0).py()
}

/// `{level, a, blocks: [{tag, start, end}], b}`; `level` defaults to the
/// coarsest valid one.
#[pyfunction]
#[pyo3(signature = (word, cf, level = None))]
fn standard_partition<'py>(
    py: Python<'py>,
    word: &str,
    cf: &PyContinuedFraction,
    level: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let w = parse_word(word)?;
    let level = match level {
        Some(n) => n,
        None => part::coarsest_level(&w, &cf.0)
            .py()?
            .ok_or_else(|| PyValueError::new_err(format!("{w} has no standard partition")))?,
    };
    let p = part::standard_partition(&w, &cf.0, level).py()?;
    p.validate(&w, &cf.0).py()?;
    to_object(py, &p)
}

/// `(t, x, y)` with `x` a suffix of `s_t` or `s_{t−1}` and `y` a prefix of `s_{t+1}`.
#[pyfunction]
fn two_block_decomposition(word: &str, cf: &PyContinuedFraction) -> PyResult<(usize, String, String)> {
    let split = part::two_block_decomposition(&parse_word(word)?, &cf.0).py()?;
    Ok((split.t, split.x.to_string(), split.y.to_string()))
}

#[pyfunction]
fn word_product(lambda_: f64, energy: Complex64, word: &str) -> PyResult<PyTransferProduct> {
    transfer::word_product(lambda_, sturmian::Energy(energy), &parse_word(word)?)
        .py()
        .map(PyTransferProduct)
}

/// `M(s_n)` through the recursion `M(s_n) = M(s_{n−2}) M(s_{n−1})^{a_n}`.
#[pyfunction]
fn sn_product(lambda_: f64, energy: Complex64, cf: &PyContinuedFraction, n: usize) -> PyResult<PyTransferProduct> {
    transfer::sn_product(lambda_, sturmian::Energy(energy), &cf.0, n)
        .py()
        .map(PyTransferProduct)
}

/// Bands `[(lo, hi), …]` of the level-`n` approximant.
#[pyfunction]
#[pyo3(signature = (lambda_, cf, n, tol = spectrum::DEFAULT_TOL))]
fn approximate_spectrum(lambda_: f64, cf: &PyContinuedFraction, n: usize, tol: f64) -> PyResult<Vec<(f64, f64)>> {
    let spec = spectrum::approximate_spectrum(lambda_, &cf.0, n, None, tol).py()?;
    Ok(spec.bands.iter().map(|b| (b.lo, b.hi)).collect())
}

#[pyfunction]
#[pyo3(signature = (lambda_, energy, cf, max_level, tol = lyapunov::DEFAULT_CERT_TOL))]
fn lyapunov_estimate<'py>(
    py: Python<'py>,
    lambda_: f64,
    energy: Complex64,
    cf: &PyContinuedFraction,
    max_level: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let est = lyapunov::lyapunov_estimate_with_tol(lambda_, sturmian::Energy(energy), &cf.0, max_level, tol).py()?;
    to_object(py, &est)
}

#[pyfunction]
#[pyo3(signature = (lambda_, cf, energies, max_len, samples = 16, seed = 0))]
fn growth_fit<'py>(
    py: Python<'py>,
    lambda_: f64,
    cf: &PyContinuedFraction,
    energies: Vec<Complex64>,
    max_len: usize,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let energies: Vec<sturmian::Energy> = energies.into_iter().map(sturmian::Energy).collect();
    let fit = py
        .detach(|| growth::growth_fit(lambda_, &cf.0, &energies, max_len, samples, seed))
        .py()?;
    to_object(py, &fit)
}

/// Two-block bound for `word`, fitting the envelope up to `max_len` first.
#[pyfunction]
#[pyo3(signature = (lambda_, energy, word, cf, max_len = None, samples = 8, seed = 0))]
fn certified_bound<'py>(
    py: Python<'py>,
    lambda_: f64,
    energy: Complex64,
    word: &str,
    cf: &PyContinuedFraction,
    max_len: Option<usize>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let w = parse_word(word)?;
    let e = sturmian::Energy(energy);
    let max_len = max_len.unwrap_or_else(|| w.len().max(16));
    let fit = growth::growth_fit(lambda_, &cf.0, &[e], max_len, samples, seed).py()?;
    to_object(py, &growth::certified_bound(lambda_, e, &w, &cf.0, &fit).py()?)
}

/// Runs one acceptance criterion (1–8) and returns `(passed, summary line)`.
#[pyfunction]
#[pyo3(signature = (criterion, seed = None))]
fn run_criterion(py: Python<'_>, criterion: u8, seed: Option<u64>) -> (bool, String) {
    let mut cfg = verify::VerifyConfig::default();
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = py.detach(|| verify::run_criterion(criterion, &cfg));
    (report.passed, report.line())
}

#[pymodule]
fn sturmpy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyContinuedFraction>()?;
    m.add_class::<PyTransferProduct>()?;
    m.add_function(wrap_pyfunction!(build_sn, m)?)?;
    m.add_function(wrap_pyfunction!(c_prefix, m)?)?;
    m.add_function(wrap_pyfunction!(rotation_word, m)?)?;
    m.add_function(wrap_pyfunction!(subwords, m)?)?;
    m.add_function(wrap_pyfunction!(is_member, m)?)?;
    m.add_function(wrap_pyfunction!(standard_partition, m)?)?;
    m.add_function(wrap_pyfunction!(two_block_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(word_product, m)?)?;
    m.add_function(wrap_pyfunction!(sn_product, m)?)?;
    m.add_function(wrap_pyfunction!(approximate_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(growth_fit, m)?)?;
    m.add_function(wrap_pyfunction!(certified_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
