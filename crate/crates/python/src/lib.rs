//! Python bindings: enclosures, the ω table, term evaluation, aggregates,
//! reports and the oracles.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;

use buchstab_bounds::enclosure::EnclosureError;
use buchstab_bounds::report::{self, BoundsReport};
use buchstab_bounds::sieve::aggregate::{self, FixedSum};
use buchstab_bounds::sieve::{self as core_sieve, Mode, QuadratureConfig};
use buchstab_bounds::{oracle, BuchstabTable, Enclosure, Error, TermId, TermResult};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Enclosure(EnclosureError::DivisionByZero(..)) => PyZeroDivisionError::new_err(e.to_string()),
        Error::Infeasible(_) | Error::InconsistentEnclosure(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn term_id(name: &str) -> PyResult<TermId> {
    name.parse().map_err(to_py)
}

/// Certified interval `[lo, hi]`.
#[pyclass(name = "Enclosure", frozen, from_py_object)]
#[derive(Clone, Copy)]
pub struct PyEnclosure(pub Enclosure);

#[pymethods]
impl PyEnclosure {
    #[new]
    #[pyo3(signature = (lo, hi=None))]
    fn new(lo: f64, hi: Option<f64>) -> PyResult<Self> {
        Ok(PyEnclosure(Enclosure::new(lo, hi.unwrap_or(lo)).map_err(|e| to_py(e.into()))?))
    }

    /// Exact rational `num/den`, rounded outward.
    #[staticmethod]
    fn ratio(num: i64, den: i64) -> PyResult<Self> {
        if den == 0 {
            return Err(PyZeroDivisionError::new_err("zero denominator"));
        }
        Ok(PyEnclosure(Enclosure::ratio(num, den)))
    }

    /// Enclosure of a decimal string such as `"1.317"`.
    #[staticmethod]
    fn decimal(s: &str) -> PyResult<Self> {
        Ok(PyEnclosure(Enclosure::from_decimal(s).map_err(|e| to_py(e.into()))?))
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.0.lo()
    }
    #[getter]
    fn hi(&self) -> f64 {
        self.0.hi()
    }
    #[getter]
    fn width(&self) -> f64 {
        self.0.width()
    }
    #[getter]
    fn mid(&self) -> f64 {
        self.0.mid()
    }

    fn contains(&self, x: f64) -> bool {
        self.0.contains(x)
    }

    fn hull(&self, other: &PyEnclosure) -> Self {
        PyEnclosure(self.0.hull(&other.0))
    }

    fn log(&self) -> PyResult<Self> {
        Ok(PyEnclosure(self.0.ln().map_err(|e| to_py(e.into()))?))
    }

    fn sqrt(&self) -> PyResult<Self> {
        Ok(PyEnclosure(self.0.sqrt().map_err(|e| to_py(e.into()))?))
    }

    fn __add__(&self, o: &PyEnclosure) -> Self {
        PyEnclosure(self.0 + o.0)
    }
    fn __sub__(&self, o: &PyEnclosure) -> Self {
        PyEnclosure(self.0 - o.0)
    }
    fn __mul__(&self, o: &PyEnclosure) -> Self {
        PyEnclosure(self.0 * o.0)
    }
    fn __truediv__(&self, o: &PyEnclosure) -> PyResult<Self> {
        Ok(PyEnclosure(self.0.try_div(o.0).map_err(|e| to_py(e.into()))?))
    }
    fn __neg__(&self) -> Self {
        PyEnclosure(-self.0)
    }
    fn __eq__(&self, o: &PyEnclosure) -> bool {
        self.0 == o.0
    }
    fn __repr__(&self) -> String {
        format!("Enclosure({:e}, {:e})", self.0.lo(), self.0.hi())
    }
}

/// Certified table of Buchstab's ω on `[1, u_max]`.
#[pyclass(name = "BuchstabTable", frozen)]
pub struct PyTable(Arc<BuchstabTable>);

#[pymethods]
impl PyTable {
    #[new]
    #[pyo3(signature = (u_max=10.0, h=1e-4))]
    fn new(py: Python<'_>, u_max: f64, h: f64) -> PyResult<Self> {
        let t = py.detach(|| BuchstabTable::build(u_max, h)).map_err(to_py)?;
        Ok(PyTable(Arc::new(t)))
    }

    #[getter]
    fn u_max(&self) -> f64 {
        self.0.u_max()
    }

    /// Enclosure of ω over `[lo, hi]` (a point if `hi` is omitted).
    #[pyo3(signature = (lo, hi=None))]
    fn omega(&self, lo: f64, hi: Option<f64>) -> PyResult<PyEnclosure> {
        let u = Enclosure::new(lo, hi.unwrap_or(lo)).map_err(|e| to_py(e.into()))?;
        Ok(PyEnclosure(self.0.omega(u).map_err(to_py)?))
    }

    #[getter]
    fn guard_hits(&self) -> u64 {
        self.0.guard_hits()
    }
}

/// Result of evaluating one term.
#[pyclass(name = "TermResult", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyTermResult(pub TermResult);

#[pymethods]
impl PyTermResult {
    #[getter]
    fn id(&self) -> String {
        self.0.id.to_string()
    }
    #[getter]
    fn enclosure(&self) -> PyEnclosure {
        PyEnclosure(self.0.enclosure)
    }
    #[getter]
    fn cells(&self) -> u64 {
        self.0.cells
    }
    #[getter]
    fn seconds(&self) -> f64 {
        self.0.seconds
    }
    #[getter]
    fn certified(&self) -> bool {
        self.0.certified
    }
    #[getter]
    fn budget_exceeded(&self) -> bool {
        self.0.budget_exceeded
    }
    fn __repr__(&self) -> String {
        format!("TermResult({}, {}, cells={})", self.0.id, self.0.enclosure, self.0.cells)
    }
}

fn config(mode: &str, width: Option<f64>, width_4d: Option<f64>, max_cells: Option<u64>, tau: f64) -> PyResult<QuadratureConfig> {
    let d = QuadratureConfig::default();
    let c = QuadratureConfig {
        mode: mode.parse::<Mode>().map_err(to_py)?,
        target_width_2d: width.unwrap_or(d.target_width_2d),
        target_width_4d: width_4d.unwrap_or(d.target_width_4d),
        max_cells: max_cells.unwrap_or(d.max_cells),
        tau,
        ..d
    };
    c.validate().map_err(to_py)?;
    Ok(c)
}

/// Evaluates a term such as `"G1"` or `"G4p"`.
#[pyfunction]
#[pyo3(signature = (id, table, mode="rigorous", width=None, width_4d=None, max_cells=None, tau=1.317))]
#[allow(clippy::too_many_arguments)]
fn compute_term(
    py: Python<'_>,
    id: &str,
    table: &PyTable,
    mode: &str,
    width: Option<f64>,
    width_4d: Option<f64>,
    max_cells: Option<u64>,
    tau: f64,
) -> PyResult<PyTermResult> {
    let id = term_id(id)?;
    let c = config(mode, width, width_4d, max_cells, tau)?;
    let t = table.0.clone();
    let r = py.detach(move || core_sieve::compute_term(id, &c, &t)).map_err(to_py)?;
    Ok(PyTermResult(r))
}

fn unwrap_results(rs: Vec<PyTermResult>) -> Vec<TermResult> {
    rs.into_iter().map(|r| r.0).collect()
}

/// `S(τ)` from results containing `G0..G6`.
#[pyfunction]
fn total_s(tau: f64, results: Vec<PyTermResult>) -> PyResult<PyEnclosure> {
    Ok(PyEnclosure(aggregate::total_s(tau, &unwrap_results(results)).map_err(to_py)?))
}

/// `ρ(x)/x` coefficient from results containing `G0p..G6p`.
#[pyfunction]
fn rho_coefficient(tau: f64, results: Vec<PyTermResult>) -> PyResult<PyEnclosure> {
    Ok(PyEnclosure(aggregate::rho_coefficient(tau, &unwrap_results(results)).map_err(to_py)?))
}

/// `(τ* enclosure, admissible τ string)` from results containing `G0..G6`.
#[pyfunction]
fn solve_tau(results: Vec<PyTermResult>) -> PyResult<(PyEnclosure, String)> {
    let fixed = FixedSum::from_results(&unwrap_results(results), false).map_err(to_py)?;
    let sol = aggregate::solve_tau(&fixed).map_err(to_py)?;
    Ok((PyEnclosure(sol.tau), sol.admissible))
}

/// Full report as a JSON string.
#[pyfunction]
#[pyo3(signature = (results, tau=1.317, legacy=false))]
fn report_json(results: Vec<PyTermResult>, tau: f64, legacy: bool) -> PyResult<String> {
    let rep: BoundsReport = report::build_report(&unwrap_results(results), tau, legacy).map_err(to_py)?;
    rep.to_json().map_err(to_py)
}

/// Monte Carlo estimate `(mean, stderr)`.
#[pyfunction]
#[pyo3(signature = (id, samples, seed, tau=1.317))]
fn mc_term(py: Python<'_>, id: &str, samples: u64, seed: u64, tau: f64) -> PyResult<(f64, f64)> {
    let id = term_id(id)?;
    let e = py.detach(|| oracle::mc_term(id, samples, seed, tau)).map_err(to_py)?;
    Ok((e.mean, e.stderr))
}

/// Number of `n ∈ [2, x_max]` whose `n² + 1` has a primitive divisor.
#[pyfunction]
fn empirical_rho(py: Python<'_>, x_max: u64) -> PyResult<u64> {
    Ok(py.detach(|| oracle::empirical_rho(x_max)).map_err(to_py)?.count)
}

/// Names of all sixteen terms.
#[pyfunction]
fn term_ids() -> Vec<String> {
    TermId::ALL.iter().map(|t| t.to_string()).collect()
}

#[pymodule]
pub fn buchstab_bounds_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnclosure>()?;
    m.add_class::<PyTable>()?;
    m.add_class::<PyTermResult>()?;
    m.add_function(wrap_pyfunction!(compute_term, m)?)?;
    m.add_function(wrap_pyfunction!(total_s, m)?)?;
    m.add_function(wrap_pyfunction!(rho_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(solve_tau, m)?)?;
    m.add_function(wrap_pyfunction!(report_json, m)?)?;
    m.add_function(wrap_pyfunction!(mc_term, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_rho, m)?)?;
    m.add_function(wrap_pyfunction!(term_ids, m)?)?;
    Ok(())
}
