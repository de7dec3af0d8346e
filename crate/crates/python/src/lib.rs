//! Python bindings for the `msmaxwell` crate.

use std::path::{Path, PathBuf};

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use msmaxwell::cli::{self, SimulationConfig};
use msmaxwell::em_core::{self, Grid1D, MediumSpec};
use msmaxwell::schemes::SchemeKind;
use msmaxwell::Error;

create_exception!(msmaxwell_py, ValidationError, PyValueError);
create_exception!(msmaxwell_py, NumericalError, PyArithmeticError);

/// Same classes as the command-line exit codes: 1 validation, 2 numerical,
/// 3 I/O.
fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        1 => ValidationError::new_err(msg),
        3 => PyOSError::new_err(msg),
        _ => NumericalError::new_err(msg),
    }
}

type Fields = [f64; 6];

/// Uniform space-time grid.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
struct PyGrid(Grid1D);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(x0: f64, length: f64, nx: usize, dt: f64, nt: usize) -> PyResult<Self> {
        Grid1D::new(x0, length, nx, dt, nt).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn nx(&self) -> usize {
        self.0.nx()
    }

    #[getter]
    fn nt(&self) -> usize {
        self.0.nt()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt()
    }

    /// Node coordinates, `nx + 1` of them.
    fn x(&self) -> Vec<f64> {
        (0..self.0.nodes()).map(|i| self.0.node_x(i)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(nx={}, dx={}, dt={}, nt={})", self.0.nx(), self.0.dx(), self.0.dt(), self.0.nt())
    }
}

/// Medium description: `vacuum` or `eps=<coef>;mu=<coef>`.
#[pyclass(name = "Medium", frozen, skip_from_py_object)]
struct PyMedium(MediumSpec);

#[pymethods]
impl PyMedium {
    #[new]
    #[pyo3(signature = (spec = "vacuum"))]
    fn new(spec: &str) -> PyResult<Self> {
        let m: MediumSpec = spec.parse().map_err(to_py)?;
        m.validate().map_err(to_py)?;
        Ok(PyMedium(m))
    }

    #[getter]
    fn is_constant(&self) -> bool {
        self.0.is_constant()
    }

    /// `(eps, mu)` at the `nx` cell midpoints of `grid`.
    fn sample(&self, grid: &PyGrid) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = self.0.sample(&grid.0).map_err(to_py)?;
        Ok((p.eps().to_vec(), p.mu().to_vec()))
    }
}

/// Simulation configuration, the same JSON document the CLI reads.
#[pyclass(name = "Config", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig(SimulationConfig);

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let cfg = cli::load_config(&path).map_err(to_py)?;
        cfg.validate().map_err(to_py)?;
        Ok(PyConfig(cfg))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg = cli::parse_config(text, Path::new("<string>")).map_err(to_py)?;
        cfg.validate().map_err(to_py)?;
        Ok(PyConfig(cfg))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(|e| ValidationError::new_err(e.to_string()))
    }

    #[getter]
    fn nx(&self) -> usize {
        self.0.nx
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.0.dt
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.0.t_end
    }

    #[getter]
    fn scheme(&self) -> String {
        self.0.scheme.to_string()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }

    /// Copy with other time settings or scheme; the result is revalidated.
    #[pyo3(signature = (*, t_end = None, dt = None, nx = None, scheme = None))]
    fn replace(&self, t_end: Option<f64>, dt: Option<f64>, nx: Option<usize>, scheme: Option<&str>) -> PyResult<Self> {
        let mut cfg = self.0.clone();
        cfg.t_end = t_end.unwrap_or(cfg.t_end);
        cfg.dt = dt.unwrap_or(cfg.dt);
        cfg.nx = nx.unwrap_or(cfg.nx);
        if let Some(s) = scheme {
            cfg.scheme = s.parse::<SchemeKind>().map_err(to_py)?;
        }
        cfg.validate().map_err(to_py)?;
        Ok(PyConfig(cfg))
    }

    fn grid(&self) -> PyResult<PyGrid> {
        self.0.grid().map(PyGrid).map_err(to_py)
    }
}

/// Summary of a finished run.
#[pyclass(name = "RunReport", frozen, get_all, skip_from_py_object)]
struct PyRunReport {
    scheme: String,
    steps: usize,
    final_time: f64,
    linf: Option<f64>,
    l2: Option<f64>,
    linf_h2: Option<f64>,
    energy_initial: f64,
    energy_final: f64,
    wall_time_s: f64,
    snapshots: Vec<PathBuf>,
}

#[pymethods]
impl PyRunReport {
    fn __repr__(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("None".to_string(), |v| v.to_string());
        format!(
            "RunReport(scheme={}, steps={}, linf={}, linf_h2={})",
            self.scheme,
            self.steps,
            opt(self.linf),
            opt(self.linf_h2)
        )
    }
}

impl From<cli::RunReport> for PyRunReport {
    fn from(r: cli::RunReport) -> Self {
        PyRunReport {
            scheme: r.scheme.to_string(),
            steps: r.steps,
            final_time: r.final_time,
            linf: r.linf,
            l2: r.l2,
            linf_h2: r.linf_h2,
            energy_initial: r.energy_initial,
            energy_final: r.energy_final,
            wall_time_s: r.wall_time_s,
            snapshots: r.snapshots,
        }
    }
}

/// Runs a configuration; writes snapshots only when `out` is given.
#[pyfunction]
#[pyo3(signature = (config, out = None))]
fn run(py: Python<'_>, config: &PyConfig, out: Option<PathBuf>) -> PyResult<PyRunReport> {
    let cfg = config.0.clone();
    py.detach(|| cli::run(&cfg, out.as_deref())).map(Into::into).map_err(to_py)
}

/// Field levels `(step, t, [[H1, H2, H3, E1, E2, E3], ...])` every `stride`
/// steps, plus the final level.
#[pyfunction]
#[pyo3(signature = (config, stride = 1))]
fn simulate(py: Python<'_>, config: &PyConfig, stride: usize) -> PyResult<Vec<(usize, f64, Vec<Fields>)>> {
    if stride == 0 {
        return Err(ValidationError::new_err("stride must be at least 1"));
    }
    let cfg = config.0.clone();
    let total = cfg.steps();
    py.detach(|| {
        let mut levels = Vec::new();
        cli::simulate(&cfg, |step, t, f| {
            if step % stride == 0 || step == total {
                levels.push((step, t, f.iter().map(|p| p.to_array()).collect()));
            }
            Ok(())
        })
        .map(|_| levels)
    })
    .map_err(to_py)
}

/// Travelling plane wave `(H1, H2, H3, E1, E2, E3)` at `(x, t)`.
#[pyfunction]
#[pyo3(signature = (x, t, eps = 1.0, mu = 1.0))]
fn exact_plane_wave(x: f64, t: f64, eps: f64, mu: f64) -> PyResult<Fields> {
    em_core::exact_plane_wave(x, t, eps, mu).map(|f| f.to_array()).map_err(to_py)
}

/// One dict per refinement level.
#[pyfunction]
fn convergence<'py>(py: Python<'py>, config: &PyConfig, levels: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = config.0.clone();
    let rows = py.detach(|| cli::convergence_study(&cfg, levels)).map_err(to_py)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("nx", r.nx)?;
            d.set_item("dx", r.dx)?;
            d.set_item("dt", r.dt)?;
            d.set_item("linf", r.linf)?;
            d.set_item("l2", r.l2)?;
            d.set_item("order_linf", r.order_linf)?;
            d.set_item("order_l2", r.order_l2)?;
            Ok(d)
        })
        .collect()
}

/// Discrete conservation residual for two seeded tangent fields.
#[pyfunction]
fn msc_check<'py>(py: Python<'py>, config: &PyConfig, seed_a: u64, seed_b: u64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.0.clone();
    let rep = py.detach(|| cli::msc_check(&cfg, [seed_a, seed_b])).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("max_abs", rep.max_abs)?;
    d.set_item("scale", rep.scale)?;
    d.set_item("relative", rep.relative)?;
    d.set_item("max_cell_relative", rep.max_cell_relative())?;
    d.set_item("residual", rep.residual)?;
    Ok(d)
}

/// Vainberg defect of `G`, `G1` or `G2` at sizes `n` and `2n`.
#[pyfunction]
#[pyo3(signature = (op, medium = "vacuum", n = 16))]
fn adjoint_check<'py>(py: Python<'py>, op: &str, medium: &str, n: usize) -> PyResult<Bound<'py, PyDict>> {
    let spec: MediumSpec = medium.parse().map_err(to_py)?;
    let op = op.to_string();
    let rep = py.detach(|| cli::adjoint_check(&op, &spec, n)).map_err(to_py)?;
    let rows = rep
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("n", r.n)?;
            d.set_item("h", r.h)?;
            d.set_item("defect", r.defect)?;
            d.set_item("scale", r.scale)?;
            d.set_item("relative", r.relative)?;
            d.set_item("ab_form", r.ab_form)?;
            d.set_item("mismatch", r.mismatch())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("operator", &rep.kind)?;
    d.set_item("medium", &rep.medium)?;
    d.set_item("rows", rows)?;
    d.set_item("mismatch_ratio", rep.mismatch_ratio())?;
    Ok(d)
}

#[pymodule]
fn msmaxwell_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyMedium>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyRunReport>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(exact_plane_wave, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(msc_check, m)?)?;
    m.add_function(wrap_pyfunction!(adjoint_check, m)?)?;
    Ok(())
}
