//! Python bindings: system files, analysis reports, Newton diagrams and the corpus fixtures.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use centerfocus_core::classify::{
    self, emit_report, to_json_value, AnalysisReport, ReportFormat, Rho0Grid, SystemFile, VerdictKind,
};
use centerfocus_core::diagram::{newton_diagram, remove_common_factor, Weight};
use centerfocus_core::flow::{eta1_estimate, Axis, Cylinder, FlowOptions};
use centerfocus_core::blowup::{polar_components, PolarOptions};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A planar polynomial system `x' = P, y' = Q` with parameter bindings.
#[pyclass(name = "System", module = "centerfocus", skip_from_py_object)]
#[derive(Clone)]
struct PySystem {
    inner: SystemFile,
}

#[pymethods]
impl PySystem {
    /// Parses a TOML system description.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        SystemFile::parse(text).map(|inner| PySystem { inner }).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        SystemFile::load(std::path::Path::new(path)).map(|inner| PySystem { inner }).map_err(value_err)
    }

    /// Bundled corpus entry by name.
    #[staticmethod]
    fn corpus(name: &str) -> PyResult<Self> {
        match classify::corpus_system(name) {
            Some(r) => r.map(|inner| PySystem { inner }).map_err(value_err),
            None => Err(PyKeyError::new_err(name.to_string())),
        }
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name.clone()
    }

    #[getter]
    fn params(&self) -> BTreeMap<String, String> {
        self.inner.params.clone()
    }

    /// Copy with some parameters rebound; values are rational strings such as `"-31/25"`.
    fn with_params(&self, params: BTreeMap<String, String>) -> PyResult<Self> {
        let pairs: Vec<(&str, &str)> = params.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
        self.inner.with_params(pairs).map(|inner| PySystem { inner }).map_err(value_err)
    }

    /// `(P, Q)` as strings after parameter substitution.
    fn field(&self) -> PyResult<(String, String)> {
        let f = self.inner.field().map_err(value_err)?;
        Ok((f.p.to_string(), f.q.to_string()))
    }

    /// Newton diagram as a dict with `vertices` and `edges`.
    fn diagram<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let f = self.inner.field().map_err(value_err)?;
        let reduced = remove_common_factor(&f).map_err(value_err)?;
        let d = newton_diagram(&reduced.field).map_err(value_err)?;
        json_to_py(py, &serde_json::to_string(&d).map_err(value_err)?)
    }

    /// Numerical η₁ on the positive y half-axis for weight `(p, q)` over a geometric grid.
    #[pyo3(signature = (p, q, rho_min, rho_max, count = 8))]
    fn eta1(&self, py: Python<'_>, p: u32, q: u32, rho_min: f64, rho_max: f64, count: usize) -> PyResult<(f64, f64)> {
        let f = self.inner.field().map_err(value_err)?;
        let w = Weight::new(p, q).map_err(value_err)?;
        py.detach(|| {
            let ps = polar_components(&f, w, PolarOptions::default()).map_err(|e| e.to_string())?;
            let grid = Rho0Grid { min: rho_min, max: rho_max, count }.points();
            eta1_estimate(&Cylinder::new(&ps), &grid, Axis::PositiveY, &FlowOptions::default())
                .map(|e| (e.value, e.error))
                .map_err(|e| e.to_string())
        })
        .map_err(PyValueError::new_err)
    }

    /// Runs the full analysis. Keyword arguments override the file's `[config]` table.
    #[pyo3(signature = (weights = None, rho0_grid = None, bautin_order = None, branch_order = None))]
    fn analyze(
        &self,
        py: Python<'_>,
        weights: Option<(u32, u32)>,
        rho0_grid: Option<(f64, f64, usize)>,
        bautin_order: Option<usize>,
        branch_order: Option<usize>,
    ) -> PyResult<PyReport> {
        let mut cfg = self.inner.config().map_err(value_err)?;
        if let Some((p, q)) = weights {
            cfg.weights = Some(Weight::new(p, q).map_err(value_err)?);
        }
        if let Some((min, max, count)) = rho0_grid {
            cfg.rho0_grid = Rho0Grid { min: min.min(max), max: min.max(max), count };
        }
        if let Some(k) = bautin_order {
            cfg.bautin_order = k;
        }
        if let Some(m) = branch_order {
            cfg.branch_order = m;
        }
        cfg.validate().map_err(value_err)?;
        let sys = self.inner.clone();
        let report = py.detach(move || classify::analyze(&sys, &cfg)).map_err(value_err)?;
        Ok(PyReport { inner: report })
    }

    fn __repr__(&self) -> String {
        format!("System({})", self.inner.display_name())
    }
}

/// Result of an analysis.
#[pyclass(name = "Report", module = "centerfocus")]
struct PyReport {
    inner: AnalysisReport,
}

#[pymethods]
impl PyReport {
    /// `"center"`, `"focus"` or `"inconclusive"`.
    #[getter]
    fn verdict(&self) -> &'static str {
        match self.inner.verdict.kind {
            VerdictKind::Center => "center",
            VerdictKind::Focus => "focus",
            VerdictKind::Inconclusive => "inconclusive",
        }
    }

    /// `"stable"`, `"unstable"` or `None`.
    #[getter]
    fn stability(&self) -> Option<String> {
        self.inner.verdict.stability.map(|s| to_json_value(&s).as_str().unwrap_or_default().to_string())
    }

    #[getter]
    fn rule(&self) -> String {
        to_json_value(&self.inner.verdict.rule).as_str().unwrap_or_default().to_string()
    }

    #[getter]
    fn summary(&self) -> String {
        self.inner.verdict.summary.clone()
    }

    /// `(index, value, method)` for every Poincaré–Lyapunov quantity reported.
    #[getter]
    fn eta(&self) -> Vec<(usize, f64, String)> {
        self.inner.eta.iter().map(|e| (e.index, e.value, e.method.clone())).collect()
    }

    #[getter]
    fn invariant_violations(&self) -> Vec<String> {
        self.inner.invariant_violations.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        String::from_utf8(emit_report(&self.inner, ReportFormat::Json)).map_err(value_err)
    }

    fn to_text(&self) -> PyResult<String> {
        String::from_utf8(emit_report(&self.inner, ReportFormat::Text)).map_err(value_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.to_json()?)
    }

    fn __repr__(&self) -> String {
        format!("Report({}, {:?})", self.verdict(), self.inner.verdict.rule)
    }
}

/// Names of the bundled corpus systems.
#[pyfunction]
fn corpus_names() -> Vec<&'static str> {
    classify::corpus_names().collect()
}

/// Runs the corpus fixtures; returns `{name: [(label, passed, detail), ...]}`.
#[pyfunction]
#[pyo3(signature = (name = None))]
fn run_corpus<'py>(py: Python<'py>, name: Option<String>) -> PyResult<Bound<'py, PyDict>> {
    let outcomes = py.detach(move || classify::run_corpus(name.as_deref())).map_err(value_err)?;
    let out = PyDict::new(py);
    for o in outcomes {
        let rows: Vec<(String, bool, String)> = o.checks.into_iter().map(|c| (c.label, c.passed, c.detail)).collect();
        out.set_item(o.name, rows)?;
    }
    Ok(out)
}

/// Parses `text` as a TOML system and analyzes it with its own configuration.
#[pyfunction]
fn analyze_toml(py: Python<'_>, text: &str) -> PyResult<PyReport> {
    PySystem::from_toml(text)?.analyze(py, None, None, None, None)
}

#[pymodule]
fn centerfocus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(corpus_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_toml, m)?)?;
    m.add("SCHEMA_VERSION", classify::SCHEMA_VERSION)?;
    Ok(())
}
