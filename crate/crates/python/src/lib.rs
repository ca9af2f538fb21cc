//! Python bindings. Matrices cross the boundary as lists of rows of complex
//! numbers; reports come back as plain dicts.

use entanglecone_core::choi::BipartiteState;
use entanglecone_core::definite::decompose_separable;
use entanglecone_core::io::{self, StateInput};
use entanglecone_core::parallel::Parallelism;
use entanglecone_core::positivity::{builtin_map, classify_map, BlockBudget, WitnessLibrary};
use entanglecone_core::search::{search_ppt_entangled, SearchBudget};
use entanglecone_core::separability::{
    ppt_check as core_ppt_check, witness_battery, SeparabilityCertificate,
};
use entanglecone_core::{self as core, Error, Matrix, Side, Tolerances};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

type Rows = Vec<Vec<Complex64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn matrix(rows: Rows) -> PyResult<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    Matrix::new(r, c, rows.into_iter().flatten().collect()).map_err(to_py)
}

fn rows(x: &Matrix) -> Rows {
    (0..x.rows())
        .map(|i| (0..x.cols()).map(|j| x[(i, j)]).collect())
        .collect()
}

fn tolerances(tol_psd: Option<f64>) -> PyResult<Tolerances> {
    match tol_psd {
        Some(s) => Tolerances::default().with_psd_slack(s).map_err(to_py),
        None => Ok(Tolerances::default()),
    }
}

fn dict<'py, T: Serialize>(py: Python<'py>, report: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A linear map `M_n → M_m`, stored through its Choi matrix.
#[pyclass(name = "MatrixMap", module = "entanglecone")]
struct PyMatrixMap {
    inner: core::MatrixMap,
}

#[pymethods]
impl PyMatrixMap {
    #[staticmethod]
    #[pyo3(signature = (dim_in, dim_out, choi, tol_psd=None))]
    fn from_choi(
        dim_in: usize,
        dim_out: usize,
        choi: Rows,
        tol_psd: Option<f64>,
    ) -> PyResult<Self> {
        let inner =
            core::MatrixMap::from_choi(dim_in, dim_out, matrix(choi)?, &tolerances(tol_psd)?)
                .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_kraus(kraus: Vec<Rows>) -> PyResult<Self> {
        let ops = kraus
            .into_iter()
            .map(matrix)
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: core::MatrixMap::from_kraus(ops).map_err(to_py)?,
        })
    }

    /// `identity{n}`, `transpose{n}` or `choi3`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: builtin_map(name).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::parse_map(text, &Tolerances::default()).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        io::to_json(&io::map_to_json(&self.inner))
    }

    #[getter]
    fn dim_in(&self) -> usize {
        self.inner.dim_in()
    }

    #[getter]
    fn dim_out(&self) -> usize {
        self.inner.dim_out()
    }

    fn choi(&self) -> Rows {
        rows(self.inner.choi())
    }

    fn apply(&self, a: Rows) -> PyResult<Rows> {
        Ok(rows(&self.inner.apply(&matrix(a)?).map_err(to_py)?))
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    /// `Tr(φ(a)·bᵀ)`.
    fn pairing(&self, a: Rows, b: Rows) -> PyResult<Complex64> {
        self.inner.pairing(&matrix(a)?, &matrix(b)?).map_err(to_py)
    }

    /// Density `C_φᵀ` of the dual functional; fails unless the map is CP.
    fn state_density(&self) -> PyResult<Rows> {
        let s = self.inner.to_state(&Tolerances::default()).map_err(to_py)?;
        Ok(rows(s.density()))
    }

    fn __repr__(&self) -> String {
        format!(
            "MatrixMap(M_{} -> M_{})",
            self.inner.dim_in(),
            self.inner.dim_out()
        )
    }
}

/// Eigenvalues (descending) and eigenvector columns of a Hermitian matrix.
#[pyfunction]
fn hermitian_eigen(x: Rows) -> PyResult<(Vec<f64>, Rows)> {
    let eig = core::hermitian_eigen(&matrix(x)?, &Tolerances::default()).map_err(to_py)?;
    Ok((eig.values, rows(&eig.vectors)))
}

#[pyfunction]
#[pyo3(signature = (x, dims, side="second"))]
fn partial_transpose(x: Rows, dims: (usize, usize), side: &str) -> PyResult<Rows> {
    let side = match side {
        "first" => Side::First,
        "second" => Side::Second,
        other => {
            return Err(PyValueError::new_err(format!(
                "side must be 'first' or 'second', got '{other}'"
            )))
        }
    };
    Ok(rows(
        &core::partial_transpose(&matrix(x)?, dims, side).map_err(to_py)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (f, seed=0, restarts=None, iterations=None, threads=0, tol_psd=None))]
fn classify<'py>(
    py: Python<'py>,
    f: &PyMatrixMap,
    seed: u64,
    restarts: Option<usize>,
    iterations: Option<usize>,
    threads: usize,
    tol_psd: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut budget = BlockBudget::default();
    budget.restarts = restarts.unwrap_or(budget.restarts);
    budget.iterations = iterations.unwrap_or(budget.iterations);
    let tol = tolerances(tol_psd)?;
    let report = classify_map(&f.inner, &budget, seed, Parallelism::threads(threads), &tol)
        .map_err(to_py)?;
    dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (dims, density, tol_psd=None))]
fn ppt_check<'py>(
    py: Python<'py>,
    dims: (usize, usize),
    density: Rows,
    tol_psd: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol_psd)?;
    let s = BipartiteState::new(dims, matrix(density)?, &tol).map_err(to_py)?;
    dict(py, &core_ppt_check(&s, 0, &tol).map_err(to_py)?)
}

/// Full state report for a state given as state JSON (density or ensemble).
#[pyfunction]
#[pyo3(signature = (state_json, seed=0, threads=0, tol_psd=None))]
fn analyze_state<'py>(
    py: Python<'py>,
    state_json: &str,
    seed: u64,
    threads: usize,
    tol_psd: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = tolerances(tol_psd)?;
    let input = io::parse_state(state_json, &tol).map_err(to_py)?;
    let s = input.state(&tol).map_err(to_py)?;
    let certificate = match input {
        StateInput::Ensemble(ensemble) => Some(SeparabilityCertificate::Ensemble { ensemble }),
        StateInput::Density(_) => None,
    };
    let lib = WitnessLibrary::standard(s.dims().1, seed, Parallelism::threads(threads), &tol)
        .map_err(to_py)?;
    dict(
        py,
        &witness_battery(&s, &lib, certificate, seed, &tol).map_err(to_py)?,
    )
}

#[pyfunction]
fn decompose<'py>(py: Python<'py>, ensemble_json: &str) -> PyResult<Bound<'py, PyAny>> {
    let tol = Tolerances::default();
    match io::parse_state(ensemble_json, &tol).map_err(to_py)? {
        StateInput::Ensemble(ens) => dict(py, &decompose_separable(&ens, &tol).map_err(to_py)?),
        StateInput::Density(_) => Err(PyValueError::new_err(
            "expected a state with \"repr\": \"ensemble\"",
        )),
    }
}

#[pyfunction]
#[pyo3(signature = (witness, seed=0, restarts=None, iterations=None, threads=0))]
fn search<'py>(
    py: Python<'py>,
    witness: &str,
    seed: u64,
    restarts: Option<usize>,
    iterations: Option<usize>,
    threads: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let f = builtin_map(witness).map_err(to_py)?;
    let mut budget = SearchBudget::default();
    budget.restarts = restarts.unwrap_or(budget.restarts);
    budget.iterations = iterations.unwrap_or(budget.iterations);
    let tol = Tolerances::default();
    let result = py
        .detach(|| {
            search_ppt_entangled(
                &f,
                witness,
                f.dim_in(),
                &budget,
                seed,
                Parallelism::threads(threads),
                &tol,
            )
        })
        .map_err(to_py)?;
    dict(py, &result)
}

#[pymodule]
fn entanglecone(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrixMap>()?;
    m.add_function(wrap_pyfunction!(hermitian_eigen, m)?)?;
    m.add_function(wrap_pyfunction!(partial_transpose, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(ppt_check, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_state, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    Ok(())
}
