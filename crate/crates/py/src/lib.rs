//! Python bindings. Specs go in as dicts or JSON strings; reports and results
//! come back as plain dicts.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;
use qvar_core::inequalities;
use qvar_core::scenario::{Family, Scenario, StateSpec, TupleKind, TupleSpec};
use qvar_core::search::{self, SearchProblem};
use qvar_core::Error;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

fn err(e: Error) -> PyErr {
    match e {
        Error::UnknownInequality(_) => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = obj.cast::<PyString>() {
        s.to_string()
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Mean vector, covariance matrix `x` and commutator matrix `y` of a tuple.
#[pyclass(name = "MomentSet", module = "qvar", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMomentSet {
    inner: qvar_core::MomentSet,
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[pymethods]
impl PyMomentSet {
    #[new]
    #[pyo3(signature = (means, x, y, hbar = 1.0, labels = None))]
    fn new(means: Vec<f64>, x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, hbar: f64, labels: Option<Vec<String>>) -> PyResult<Self> {
        let n = means.len();
        let mat = |rows: &[Vec<f64>], name: &str| -> PyResult<nalgebra::DMatrix<f64>> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(PyValueError::new_err(format!("{name} must be {n}x{n}")));
            }
            Ok(nalgebra::DMatrix::from_fn(n, n, |j, k| rows[j][k]))
        };
        let mut ms = qvar_core::MomentSet::new(means, mat(&x, "x")?, mat(&y, "y")?, hbar).map_err(err)?;
        if let Some(l) = labels {
            if l.len() != n {
                return Err(PyValueError::new_err(format!("expected {n} labels")));
            }
            ms = ms.with_labels(l);
        }
        Ok(PyMomentSet { inner: ms })
    }

    /// Resolve a state spec and tuple spec.
    #[staticmethod]
    fn from_scenario(state: &Bound<'_, PyAny>, tuple: &Bound<'_, PyAny>) -> PyResult<Self> {
        let scenario = Scenario::new(from_py(state)?, from_py(tuple)?);
        Ok(PyMomentSet {
            inner: scenario.moments().map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyMomentSet { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar
    }

    #[getter]
    fn means(&self) -> Vec<f64> {
        self.inner.means.clone()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    #[getter]
    fn x(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.x)
    }

    #[getter]
    fn y(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.y)
    }

    /// Tuple permuted by a 1-based order.
    fn reordered(&self, order: Vec<usize>) -> PyResult<Self> {
        let zero: Vec<usize> = order.iter().map(|k| k.wrapping_sub(1)).collect();
        Ok(PyMomentSet {
            inner: self.inner.reordered(&zero).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!("MomentSet(n={}, labels={:?}, hbar={})", self.inner.n(), self.inner.labels, self.inner.hbar)
    }
}

/// Moment set of a state spec and tuple spec.
#[pyfunction]
fn moments(state: &Bound<'_, PyAny>, tuple: &Bound<'_, PyAny>) -> PyResult<PyMomentSet> {
    PyMomentSet::from_scenario(state, tuple)
}

/// Evaluate one catalog relation; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (id, ms, params = None))]
fn evaluate<'py>(py: Python<'py>, id: &str, ms: &PyMomentSet, params: Option<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
    let r = inequalities::evaluate(id, &ms.inner, &params.unwrap_or_default()).map_err(err)?;
    to_py(py, &r)
}

/// Every relation applicable to the tuple size.
#[pyfunction]
fn applicable_suite<'py>(py: Python<'py>, ms: &PyMomentSet) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &inequalities::applicable_suite(&ms.inner).map_err(err)?)
}

#[pyfunction]
fn catalog(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &inequalities::catalog())
}

/// Multistart minimisation of a search problem.
#[pyfunction]
fn minimize<'py>(py: Python<'py>, problem: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let p: SearchProblem = from_py(problem)?;
    let r = py.detach(|| search::minimize(&p)).map_err(err)?;
    to_py(py, &r)
}

/// Full-factorial sweep, last parameter fastest.
#[pyfunction]
fn sweep<'py>(py: Python<'py>, problem: &Bound<'py, PyAny>, counts: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    let p: SearchProblem = from_py(problem)?;
    let t = py.detach(|| search::sweep(&p, &counts)).map_err(err)?;
    to_py(py, &t)
}

/// L, R and R/L of the covariance-free bound on the default CCS triple.
#[pyfunction]
#[pyo3(signature = (hbar = 1.0, fock_dim = None))]
fn counterexample(py: Python<'_>, hbar: f64, fock_dim: Option<usize>) -> PyResult<Bound<'_, PyAny>> {
    let mut state = StateSpec::new(Family::Ccs, json!({}));
    state.hbar = Some(hbar);
    state.dim = fock_dim;
    let ms = Scenario::new(state, TupleSpec::new(TupleKind::Xpxi)).moments().map_err(err)?;
    let r = inequalities::eval_false5(&ms).map_err(err)?;
    to_py(py, &json!({"L": r.lhs, "R": r.rhs, "R_over_L": r.rhs / r.lhs}))
}

#[pymodule]
fn qvar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMomentSet>()?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(applicable_suite, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    Ok(())
}
