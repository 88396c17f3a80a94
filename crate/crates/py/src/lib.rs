//! Python bindings.
//!
//! Errors raise `BreakglassError` (a `ValueError`) whose message starts
//! with the error code; `.field` is set for domain errors.

use breakglass::cost_model::{self, CostBreakdown as CoreBreakdown};
use breakglass::incidents;
use breakglass::loss_tail::{self, PowerLawFit as CoreFit, Xmin};
use breakglass::scenario::ScenarioDocument;
use breakglass::sentiment;
use breakglass::simulator::{self, SimConfig};
use breakglass::taxonomy::{self, Cell};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(pybreakglass, BreakglassError, PyValueError);

fn err(e: breakglass::Error) -> PyErr {
    let py_err = BreakglassError::new_err(format!("{}: {e}", e.code()));
    Python::attach(|py| {
        let value = py_err.value(py);
        let _ = value.setattr("code", e.code());
        let _ = value.setattr("field", e.field());
    });
    py_err
}

fn cell(s: &str) -> PyResult<Cell> {
    s.parse().map_err(err)
}

fn json_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(frozen, skip_from_py_object, module = "pybreakglass")]
#[derive(Clone)]
pub struct Calibration {
    inner: taxonomy::Calibration,
}

#[pymethods]
impl Calibration {
    #[new]
    fn new() -> Self {
        Calibration {
            inner: taxonomy::Calibration::default(),
        }
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Calibration {
            inner: taxonomy::Calibration::from_toml_str(text).map_err(err)?,
        })
    }

    #[getter]
    fn version(&self) -> String {
        self.inner.version.clone()
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    fn architecture(&self, cell_name: &str) -> PyResult<Architecture> {
        Ok(Architecture {
            inner: self.inner.architecture(cell(cell_name)?),
        })
    }

    fn design_space(&self) -> Vec<Architecture> {
        self.inner
            .design_space()
            .into_iter()
            .map(|inner| Architecture { inner })
            .collect()
    }

    /// List of (key, value, provenance) tuples.
    fn entries(&self) -> Vec<(String, f64, String)> {
        self.inner
            .entries()
            .into_iter()
            .map(|e| (e.key.to_string(), e.value, e.provenance.to_string()))
            .collect()
    }
}

#[pyclass(frozen, skip_from_py_object, module = "pybreakglass")]
#[derive(Clone)]
pub struct Architecture {
    inner: taxonomy::Architecture,
}

#[pymethods]
impl Architecture {
    #[getter]
    fn cell(&self) -> String {
        self.inner.cell().to_string()
    }

    #[getter]
    fn scope(&self) -> &'static str {
        self.inner.scope.as_str()
    }

    #[getter]
    fn authority(&self) -> &'static str {
        self.inner.authority.as_str()
    }

    #[getter]
    fn containment_time_min(&self) -> f64 {
        self.inner.containment_time_min
    }

    #[getter]
    fn discount_rate(&self) -> f64 {
        self.inner.discount_rate
    }

    #[getter]
    fn scope_fraction(&self) -> f64 {
        self.inner.scope_fraction
    }

    fn __repr__(&self) -> String {
        format!(
            "Architecture('{}', time={}, discount={}, scope_fraction={})",
            self.inner.cell(),
            self.inner.containment_time_min,
            self.inner.discount_rate,
            self.inner.scope_fraction
        )
    }
}

#[pyclass(frozen, skip_from_py_object, module = "pybreakglass")]
#[derive(Clone)]
pub struct CostBreakdown {
    inner: CoreBreakdown,
}

#[pymethods]
impl CostBreakdown {
    #[getter]
    fn standing_cost_usd(&self) -> f64 {
        self.inner.standing_cost_usd
    }

    #[getter]
    fn expected_containment_loss_usd(&self) -> f64 {
        self.inner.expected_containment_loss_usd
    }

    #[getter]
    fn expected_blast_cost_usd(&self) -> f64 {
        self.inner.expected_blast_cost_usd
    }

    #[getter]
    fn total_usd(&self) -> f64 {
        self.inner.total_usd
    }

    fn __repr__(&self) -> String {
        format!("CostBreakdown(total_usd={})", self.inner.total_usd)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "pybreakglass")]
#[derive(Clone)]
pub struct Scenario {
    inner: ScenarioDocument,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn fixture() -> Self {
        Scenario {
            inner: ScenarioDocument::fixture(),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: ScenarioDocument::from_json(text).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Scenario {
            inner: ScenarioDocument::from_toml(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// Design space sorted cheapest first, as (architecture, cost) pairs.
    #[pyo3(signature = (calibration = None))]
    fn rank(&self, calibration: Option<&Calibration>) -> PyResult<Vec<(Architecture, CostBreakdown)>> {
        let cal = calibration.map(|c| c.inner.clone()).unwrap_or_default();
        let space = self.inner.design_space(&cal).map_err(err)?;
        let d = &self.inner;
        let ranked = cost_model::rank_design_space(&space, &d.threat, &d.market, d.mode()).map_err(err)?;
        Ok(ranked
            .into_iter()
            .map(|r| (Architecture { inner: r.architecture }, CostBreakdown { inner: r.breakdown }))
            .collect())
    }

    #[pyo3(signature = (cell_name, calibration = None))]
    fn expected_cost(&self, cell_name: &str, calibration: Option<&Calibration>) -> PyResult<CostBreakdown> {
        let cal = calibration.map(|c| c.inner.clone()).unwrap_or_default();
        let d = &self.inner;
        let arch = d.architecture(&cal, cell(cell_name)?).map_err(err)?;
        let inner = cost_model::expected_cost(&arch, &d.threat, &d.market, d.mode()).map_err(err)?;
        Ok(CostBreakdown { inner })
    }

    /// Mean sentiment at which the two cells cost the same, or None.
    #[pyo3(signature = (a, b, calibration = None))]
    fn breakeven(&self, a: &str, b: &str, calibration: Option<&Calibration>) -> PyResult<Option<f64>> {
        let cal = calibration.map(|c| c.inner.clone()).unwrap_or_default();
        let d = &self.inner;
        let arch_a = d.architecture(&cal, cell(a)?).map_err(err)?;
        let arch_b = d.architecture(&cal, cell(b)?).map_err(err)?;
        cost_model::breakeven_sentiment(&arch_a, &arch_b, &d.threat, &d.market, d.mode()).map_err(err)
    }

    /// Monte Carlo result as a dict.
    #[pyo3(signature = (cell_name, n_trials, seed, time_jitter = 0.0, partitions = simulator::DEFAULT_PARTITIONS, calibration = None))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        cell_name: &str,
        n_trials: usize,
        seed: u64,
        time_jitter: f64,
        partitions: usize,
        calibration: Option<&Calibration>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let cal = calibration.map(|c| c.inner.clone()).unwrap_or_default();
        let d = &self.inner;
        let arch = d.architecture(&cal, cell(cell_name)?).map_err(err)?;
        let cfg = SimConfig {
            n_trials,
            seed,
            time_jitter,
            blast_on_trigger_only: d.blast_on_trigger_only,
            partitions,
        };
        let result = py
            .detach(|| simulator::simulate(&arch, &d.threat, &d.market, &cfg))
            .map_err(err)?;
        json_to_py(py, &result)
    }
}

#[pyclass(frozen, skip_from_py_object, module = "pybreakglass")]
#[derive(Clone)]
pub struct PowerLawFit {
    inner: CoreFit,
}

#[pymethods]
impl PowerLawFit {
    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn xmin(&self) -> f64 {
        self.inner.xmin
    }

    #[getter]
    fn n_tail(&self) -> usize {
        self.inner.n_tail
    }

    #[getter]
    fn ks_statistic(&self) -> f64 {
        self.inner.ks_statistic
    }

    #[getter]
    fn p_value(&self) -> Option<f64> {
        self.inner.p_value
    }

    fn __repr__(&self) -> String {
        format!(
            "PowerLawFit(alpha={}, xmin={}, n_tail={}, ks_statistic={})",
            self.inner.alpha, self.inner.xmin, self.inner.n_tail, self.inner.ks_statistic
        )
    }
}

/// Fits a power law; `xmin=None` selects the threshold automatically.
#[pyfunction]
#[pyo3(signature = (losses, xmin = None))]
fn fit_power_law(py: Python<'_>, losses: Vec<f64>, xmin: Option<f64>) -> PyResult<PowerLawFit> {
    let mode = xmin.map_or(Xmin::Auto, Xmin::Fixed);
    let inner = py.detach(|| loss_tail::fit_power_law(&losses, mode)).map_err(err)?;
    Ok(PowerLawFit { inner })
}

#[pyfunction]
fn bootstrap_p_value(py: Python<'_>, losses: Vec<f64>, fit: &PowerLawFit, n_boot: usize, seed: u64) -> PyResult<f64> {
    py.detach(|| loss_tail::bootstrap_p_value(&losses, &fit.inner, n_boot, seed))
        .map_err(err)
}

#[pyfunction]
fn tail_expected_loss(fit: &PowerLawFit, cap: f64) -> PyResult<f64> {
    loss_tail::tail_expected_loss(&fit.inner, cap).map_err(err)
}

#[pyfunction]
fn score_post(text: &str) -> PyResult<f64> {
    sentiment::score_post(text).map_err(err)
}

#[pyfunction]
fn aggregate_sentiment(scores: Vec<f64>) -> PyResult<f64> {
    sentiment::aggregate(&scores).map_err(err)
}

#[pyfunction]
fn cost_multiplier(mean_sentiment: f64) -> PyResult<f64> {
    sentiment::cost_multiplier(mean_sentiment).map_err(err)
}

/// Layer totals of an incident dataset as a dict of {count, loss_usd}.
#[pyfunction]
fn stratify<'py>(py: Python<'py>, path: &str) -> PyResult<Bound<'py, PyDict>> {
    let report = incidents::ingest(path).map_err(err)?;
    if let Some(e) = report.errors.first() {
        return Err(err(breakglass::Error::domain(
            e.field.clone(),
            format!("row {}: {}", e.row, e.reason),
        )));
    }
    let s = incidents::stratify(&report.records);
    let out = PyDict::new(py);
    for (name, l) in [
        ("systemic", s.systemic),
        ("non_addressable", s.non_addressable),
        ("eligible", s.eligible),
        ("intervened", s.intervened),
        ("total", s.total),
    ] {
        let d = PyDict::new(py);
        d.set_item("count", l.count)?;
        d.set_item("loss_usd", l.loss_usd)?;
        out.set_item(name, d)?;
    }
    Ok(out)
}

#[pymodule]
fn pybreakglass(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BreakglassError", m.py().get_type::<BreakglassError>())?;
    m.add("CALIBRATION_VERSION", taxonomy::CALIBRATION_VERSION)?;
    m.add_class::<Calibration>()?;
    m.add_class::<Architecture>()?;
    m.add_class::<CostBreakdown>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<PowerLawFit>()?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_p_value, m)?)?;
    m.add_function(wrap_pyfunction!(tail_expected_loss, m)?)?;
    m.add_function(wrap_pyfunction!(score_post, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_sentiment, m)?)?;
    m.add_function(wrap_pyfunction!(cost_multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(stratify, m)?)?;
    Ok(())
}
