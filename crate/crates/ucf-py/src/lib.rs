//! Python bindings: instances, formulations, solves and polyhedral reports.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use ucf::builder::{build_formulation, piecewise_linearize, resolve_windows, BuildOptions, ModelKind, WindowChoice};
use ucf::cli::{verify_unit_window, VerifyRequest};
use ucf::polylab::PolytopeKind;
use ucf::solver::{write_mps, SolverConfig};
use ucf::UcInstance;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solver_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// A validated unit-commitment instance.
#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: UcInstance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        ucf::load_instance(path).map(|inner| PyInstance { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        UcInstance::from_json_str(text).map(|inner| PyInstance { inner }).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (seed, units, horizon))]
    fn synthetic(seed: u64, units: usize, horizon: usize) -> PyResult<Self> {
        if units == 0 || horizon < 2 {
            return Err(value_err("need at least one unit and two periods"));
        }
        Ok(PyInstance { inner: ucf::cli::generate_synthetic(seed, units, horizon) })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn horizon(&self) -> i64 {
        self.inner.t()
    }

    #[getter]
    fn n_units(&self) -> usize {
        self.inner.units.len()
    }

    /// Facet reports for one unit and window as JSON lines.
    #[pyo3(signature = (unit, start, window, polytope = "q"))]
    fn verify(&self, unit: usize, start: i64, window: i64, polytope: &str) -> PyResult<String> {
        let kind = match polytope.to_ascii_lowercase().as_str() {
            "b" => PolytopeKind::B,
            "p" => PolytopeKind::P,
            "q" => PolytopeKind::Q,
            "bt" => PolytopeKind::BTilde,
            "pt" => PolytopeKind::PTilde,
            "qt" => PolytopeKind::QTilde,
            other => return Err(value_err(format!("unknown polytope {other}"))),
        };
        verify_unit_window(&self.inner, &VerifyRequest { unit, m: start, size: window, kind }).map_err(value_err)
    }
}

#[pyclass(name = "LpResult", frozen, get_all)]
struct PyLpResult {
    status: String,
    objective: f64,
    values: Vec<f64>,
}

#[pyclass(name = "MipResult", frozen, get_all)]
struct PyMipResult {
    status: String,
    objective: f64,
    bound: f64,
    gap: f64,
    nodes: usize,
    values: Vec<f64>,
}

/// A linearized formulation ready to solve or export.
#[pyclass(name = "Formulation", frozen)]
struct PyFormulation {
    inner: ucf::Formulation,
}

#[pymethods]
impl PyFormulation {
    #[new]
    #[pyo3(signature = (instance, model = "mp3", window = "H", pieces = 4))]
    fn new(instance: &PyInstance, model: &str, window: &str, pieces: usize) -> PyResult<Self> {
        let kind: ModelKind = model.parse().map_err(value_err)?;
        let choice: WindowChoice = window.parse().map_err(value_err)?;
        let windows =
            if kind.uses_windows() { resolve_windows(&instance.inner, choice).map_err(value_err)? } else { Vec::new() };
        let f = build_formulation(&instance.inner, kind, &windows, BuildOptions::default()).map_err(value_err)?;
        Ok(PyFormulation { inner: piecewise_linearize(&f, pieces) })
    }

    #[getter]
    fn model(&self) -> String {
        self.inner.kind.to_string()
    }

    /// `(vars, binaries, rows, nonzeros)`.
    fn stats(&self) -> (usize, usize, usize, usize) {
        let s = self.inner.stats();
        (s.vars, s.binaries, s.rows, s.nonzeros)
    }

    fn write_mps(&self, path: &str) -> PyResult<()> {
        write_mps(&self.inner, path).map(|_| ()).map_err(value_err)
    }

    fn solve_lp(&self, py: Python<'_>) -> PyResult<PyLpResult> {
        let s = py.detach(|| ucf::solve_lp(&self.inner, &SolverConfig::default())).map_err(solver_err)?;
        Ok(PyLpResult { status: format!("{:?}", s.status), objective: s.objective, values: s.values })
    }

    #[pyo3(signature = (mip_gap = 1e-4))]
    fn solve_mip(&self, py: Python<'_>, mip_gap: f64) -> PyResult<PyMipResult> {
        let cfg = SolverConfig { mip_gap, ..SolverConfig::default() };
        let s = py.detach(|| ucf::solve_mip(&self.inner, &cfg)).map_err(solver_err)?;
        Ok(PyMipResult {
            status: format!("{:?}", s.status),
            objective: s.objective,
            bound: s.bound,
            gap: s.gap,
            nodes: s.nodes,
            values: s.values,
        })
    }
}

/// Closed-form `(n1, n2, ub_rows, ramp_rows)` for one window size.
#[pyfunction]
fn count_model_size(size: i64, horizon: i64, t_on: i64) -> (i64, i64, i64, i64) {
    let s = ucf::windows::count_model_size(size, horizon, t_on);
    (s.n1, s.n2, s.ub_rows, s.ramp_rows)
}

#[pyfunction]
fn redundancy_ratio(size: i64, up_gate: i64, down_gate: i64) -> PyResult<f64> {
    ucf::bounds::redundancy_ratio(size, up_gate, down_gate).map_err(value_err)
}

#[pymodule]
fn ucf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyFormulation>()?;
    m.add_class::<PyLpResult>()?;
    m.add_class::<PyMipResult>()?;
    m.add_function(wrap_pyfunction!(count_model_size, m)?)?;
    m.add_function(wrap_pyfunction!(redundancy_ratio, m)?)?;
    Ok(())
}
