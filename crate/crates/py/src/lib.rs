//! Python bindings: models, isotopies, lengths, fixed points and the
//! scenario runner.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cokinetic::cli::{run, run_suites, Scenario};
use cokinetic::fields::{CoIsotopy, Generator, Isotopy as _, Kind, ReebComponent, TimeFourier, TimeTerm};
use cokinetic::fixpoints::{find_fixed_points, FixOptions};
use cokinetic::manifold::{Coords, FourierScalar, FourierTerm, ModelSpec, ZTopology};
use cokinetic::norms::{co_hofer_length, almost_length, aco_length, Flavor, LengthReport, QuadratureOptions};
use cokinetic::reparam::kind_distance;

/// `(k, a, b)`: frequency vector and ascending polynomial coefficients in `t`.
pub type Term = (Vec<i32>, Vec<f64>, Vec<f64>);

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

pub fn parse_kind(s: &str) -> Result<Kind, String> {
    match s {
        "co-hamiltonian" => Ok(Kind::CoHamiltonian),
        "almost-co-hamiltonian" => Ok(Kind::AlmostCoHamiltonian),
        "cosymplectic" => Ok(Kind::Cosymplectic),
        other => Err(format!("unknown kind '{other}'")),
    }
}

pub fn parse_flavor(s: &str) -> Result<Flavor, String> {
    match s {
        "L1inf" => Ok(Flavor::L1Inf),
        "Linf" => Ok(Flavor::Linf),
        other => Err(format!("unknown flavor '{other}' (L1inf or Linf)")),
    }
}

fn series(dim: usize, terms: Vec<Term>) -> cokinetic::Result<TimeFourier> {
    TimeFourier::from_terms(dim, terms.into_iter().map(|(k, a, b)| TimeTerm { k, a, b }))
}

/// Runs a scenario given as JSON text; returns the report as JSON.
pub fn run_scenario_json(text: &str, only: Option<&str>) -> Result<(bool, String), String> {
    let s = Scenario::from_json(text).map_err(|e| e.to_string())?;
    if let Some(o) = only {
        if !s.selects(o) {
            return Err(format!("no task or command named '{o}'"));
        }
    }
    let r = run(&s, only);
    Ok((r.pass, r.to_json()))
}

#[pyclass(name = "ModelSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel(ModelSpec);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (n, z_topology = "circle"))]
    fn new(n: usize, z_topology: &str) -> PyResult<Self> {
        let z = match z_topology {
            "circle" => ZTopology::Circle,
            "line" => ZTopology::Line,
            other => return Err(err(format!("unknown z topology '{other}'"))),
        };
        ModelSpec::new(n, z).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn is_circle(&self) -> bool {
        self.0.is_circle()
    }

    fn __repr__(&self) -> String {
        format!("ModelSpec(n={}, z_topology={:?})", self.0.n, self.0.z_topology)
    }
}

#[pyclass(name = "LengthReport", frozen)]
pub struct PyLength(LengthReport);

#[pymethods]
impl PyLength {
    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    #[getter]
    fn lower(&self) -> f64 {
        self.0.lower
    }

    #[getter]
    fn upper(&self) -> f64 {
        self.0.upper
    }

    /// `(t, osc, osc_lo, osc_hi, reeb)` per time node.
    fn nodes(&self) -> Vec<(f64, f64, f64, f64, f64)> {
        self.0.nodes.iter().map(|n| (n.t, n.osc, n.osc_lo, n.osc_hi, n.reeb)).collect()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("report serializes")
    }

    fn __repr__(&self) -> String {
        format!("LengthReport(value={}, lower={}, upper={})", self.0.value, self.0.lower, self.0.upper)
    }
}

/// An isotopy of a flat model, given by its generator (and Reeb component).
#[pyclass(name = "Isotopy", frozen)]
pub struct PyIsotopy(CoIsotopy);

#[pymethods]
impl PyIsotopy {
    #[new]
    #[pyo3(signature = (model, generator, kind = "co-hamiltonian", reeb = None, steps = 1024))]
    fn new(model: &PyModel, generator: Vec<Term>, kind: &str, reeb: Option<Vec<Term>>, steps: usize) -> PyResult<Self> {
        let m = model.0;
        let f = series(m.dim(), generator).map_err(err)?;
        let reeb = reeb
            .map(|r| series(1, r).and_then(ReebComponent::new))
            .transpose()
            .map_err(err)?;
        let kind = parse_kind(kind).map_err(err)?;
        CoIsotopy::new(m, kind, Generator::raw(f), reeb, None, steps)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }

    fn map(&self, point: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        self.check(&point)?;
        Ok(self.0.map(&Coords::from_slice(&point), t).to_vec())
    }

    fn inverse_map(&self, point: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
        self.check(&point)?;
        Ok(self.0.inverse_map(&Coords::from_slice(&point), t).to_vec())
    }

    fn generator_value(&self, point: Vec<f64>, t: f64) -> PyResult<f64> {
        self.check(&point)?;
        Ok(self.0.generator_value(&Coords::from_slice(&point), t))
    }

    /// Length for the isotopy's kind (co-Hofer, almost, or `aco`).
    #[pyo3(signature = (flavor = "L1inf", panels = 128, osc_resolution = 256))]
    fn length(&self, py: Python<'_>, flavor: &str, panels: usize, osc_resolution: usize) -> PyResult<PyLength> {
        let flavor = parse_flavor(flavor).map_err(err)?;
        let q = QuadratureOptions {
            panels,
            osc_resolution,
            ..Default::default()
        };
        let iso = &self.0;
        py.detach(|| match iso.kind() {
            Kind::CoHamiltonian => co_hofer_length(iso, flavor, &q),
            Kind::AlmostCoHamiltonian => almost_length(iso, flavor, &q),
            Kind::Cosymplectic => aco_length(iso, flavor, &q),
        })
        .map(PyLength)
        .map_err(err)
    }

    #[pyo3(signature = (other, flavor = "L1inf", panels = 128))]
    fn distance(&self, py: Python<'_>, other: &PyIsotopy, flavor: &str, panels: usize) -> PyResult<PyLength> {
        let flavor = parse_flavor(flavor).map_err(err)?;
        let q = QuadratureOptions {
            panels,
            ..Default::default()
        };
        py.detach(|| kind_distance(&self.0, &other.0, flavor, &q))
            .map(PyLength)
            .map_err(err)
    }

    /// Representatives of the fixed-point components of the time-one map.
    #[pyo3(signature = (grid = 16))]
    fn fixed_points(&self, py: Python<'_>, grid: usize) -> Vec<Vec<f64>> {
        let opts = FixOptions {
            grid_resolution: grid,
            ..Default::default()
        };
        let set = py.detach(|| find_fixed_points(&self.0, &opts));
        set.components.iter().map(|c| c.representative.to_vec()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Isotopy(kind={}, steps={})", self.0.kind(), self.0.steps())
    }
}

impl PyIsotopy {
    fn check(&self, p: &[f64]) -> PyResult<()> {
        let d = self.0.model().dim();
        if p.len() != d {
            return Err(err(format!("point must have {d} coordinates")));
        }
        Ok(())
    }
}

/// `(lo, value, hi)`: certified enclosure of `max F − min F`.
#[pyfunction]
#[pyo3(signature = (dim, terms, resolution = 256))]
fn osc(dim: usize, terms: Vec<(Vec<i32>, f64, f64)>, resolution: usize) -> PyResult<(f64, f64, f64)> {
    let f = FourierScalar::from_terms(dim, terms.into_iter().map(|(k, a, b)| FourierTerm { k, a, b })).map_err(err)?;
    let e = f.osc(resolution).map_err(err)?;
    Ok((e.lo, e.value, e.hi))
}

/// Checks a scenario (JSON text); raises `ValueError` with the schema or
/// reference error.
#[pyfunction]
fn validate_scenario(text: &str) -> PyResult<usize> {
    Scenario::from_json(text).map(|s| s.tasks.len()).map_err(err)
}

/// Runs a scenario (JSON text); returns `(pass, report_json)`.
#[pyfunction]
#[pyo3(signature = (text, only = None))]
fn run_scenario(py: Python<'_>, text: &str, only: Option<&str>) -> PyResult<(bool, String)> {
    py.detach(|| run_scenario_json(text, only)).map_err(err)
}

/// Runs a packaged suite; returns `(pass, report_json)`.
#[pyfunction]
#[pyo3(signature = (name, quick = true, seed = 0xC04A))]
fn run_suite(py: Python<'_>, name: &str, quick: bool, seed: u64) -> PyResult<(bool, String)> {
    if cokinetic::cli::expand_suite(name).is_none() {
        return Err(err(format!("unknown suite '{name}'")));
    }
    let r = py.detach(|| run_suites(&[name], quick, seed));
    Ok((r.pass, r.to_json()))
}

#[pymodule]
fn cokinetic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyIsotopy>()?;
    m.add_class::<PyLength>()?;
    m.add_function(wrap_pyfunction!(osc, m)?)?;
    m.add_function(wrap_pyfunction!(validate_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("SCENARIO_SCHEMA", cokinetic::cli::SCHEMA_VERSION)?;
    Ok(())
}
