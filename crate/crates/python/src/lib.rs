//! Python bindings for `qkdrate_core`.
//!
//! Parameter objects are immutable; the `with_*` methods return copies.
//! Model errors surface as `ValueError` (bad input) or `RuntimeError`
//! (a solver did not converge).

use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qkdrate_core as core;
use qkdrate_core::numerics::Bracket;
use qkdrate_core::optimize::{DEFAULT_MU_BRACKET, DEFAULT_TOL};
use qkdrate_core::QkdError;

fn py_err(e: QkdError) -> PyErr {
    match e {
        QkdError::Convergence(_) => PyRuntimeError::new_err(e.to_string()),
        QkdError::AtPoint { ref source, .. } if matches!(**source, QkdError::Convergence(_)) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_named<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

#[pyclass(
    name = "LinkParameters",
    module = "qkdrate",
    frozen,
    eq,
    skip_from_py_object
)]
#[derive(Clone, PartialEq)]
pub struct PyLink(core::LinkParameters);

#[pymethods]
impl PyLink {
    /// Keyword arguments override the `mark2-jan2004` preset.
    #[new]
    #[pyo3(signature = (*, pulse_rate=None, duty_cycle=None, mean_photon_number=None,
        fiber_length=None, fiber_loss=None, rx_loss=None, resid_phase=None,
        det_eff=None, det_leak=None, p_dark=None, p_after=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        pulse_rate: Option<f64>,
        duty_cycle: Option<f64>,
        mean_photon_number: Option<f64>,
        fiber_length: Option<f64>,
        fiber_loss: Option<f64>,
        rx_loss: Option<f64>,
        resid_phase: Option<f64>,
        det_eff: Option<[f64; 2]>,
        det_leak: Option<[f64; 2]>,
        p_dark: Option<[f64; 2]>,
        p_after: Option<[f64; 2]>,
    ) -> PyResult<Self> {
        let mut b = core::LinkParameters::builder();
        if let Some(v) = pulse_rate {
            b = b.pulse_rate(v);
        }
        if let Some(v) = duty_cycle {
            b = b.duty_cycle(v);
        }
        if let Some(v) = mean_photon_number {
            b = b.mean_photon_number(v);
        }
        if let Some(v) = fiber_length {
            b = b.fiber_length(v);
        }
        if let Some(v) = fiber_loss {
            b = b.fiber_loss(v);
        }
        if let Some(v) = rx_loss {
            b = b.rx_loss(v);
        }
        if let Some(v) = resid_phase {
            b = b.resid_phase(v);
        }
        if let Some(v) = det_eff {
            b = b.det_eff(v);
        }
        if let Some(v) = det_leak {
            b = b.det_leak(v);
        }
        if let Some(v) = p_dark {
            b = b.p_dark(v);
        }
        if let Some(v) = p_after {
            b = b.p_after(v);
        }
        b.build().map(PyLink).map_err(py_err)
    }

    fn with_mean_photon_number(&self, mu: f64) -> PyResult<Self> {
        self.0
            .with_mean_photon_number(mu)
            .map(PyLink)
            .map_err(py_err)
    }

    fn with_fiber_length(&self, km: f64) -> PyResult<Self> {
        self.0.with_fiber_length(km).map(PyLink).map_err(py_err)
    }

    #[getter]
    fn pulse_rate(&self) -> f64 {
        self.0.pulse_rate()
    }
    #[getter]
    fn duty_cycle(&self) -> f64 {
        self.0.duty_cycle()
    }
    #[getter]
    fn mean_photon_number(&self) -> f64 {
        self.0.mean_photon_number()
    }
    #[getter]
    fn fiber_length(&self) -> f64 {
        self.0.fiber_length()
    }
    #[getter]
    fn fiber_loss(&self) -> f64 {
        self.0.fiber_loss()
    }
    #[getter]
    fn rx_loss(&self) -> f64 {
        self.0.rx_loss()
    }
    #[getter]
    fn resid_phase(&self) -> f64 {
        self.0.resid_phase()
    }
    #[getter]
    fn det_eff(&self) -> [f64; 2] {
        self.0.det_eff()
    }
    #[getter]
    fn det_leak(&self) -> [f64; 2] {
        self.0.det_leak()
    }
    #[getter]
    fn p_dark(&self) -> [f64; 2] {
        self.0.p_dark()
    }
    #[getter]
    fn p_after(&self) -> [f64; 2] {
        self.0.p_after()
    }

    fn __repr__(&self) -> String {
        format!(
            "LinkParameters(mean_photon_number={}, fiber_length={})",
            self.0.mean_photon_number(),
            self.0.fiber_length()
        )
    }
}

#[pyclass(
    name = "ProtocolParameters",
    module = "qkdrate",
    frozen,
    eq,
    skip_from_py_object
)]
#[derive(Clone, PartialEq)]
pub struct PyProtocol(core::ProtocolParameters);

#[pymethods]
impl PyProtocol {
    #[new]
    #[pyo3(signature = (*, block_size=None, n_edac_sets=None, entropy_estimator=None, confidence=None))]
    fn new(
        block_size: Option<u32>,
        n_edac_sets: Option<u32>,
        entropy_estimator: Option<&str>,
        confidence: Option<f64>,
    ) -> PyResult<Self> {
        let d = core::ProtocolParameters::mark2_jan2004();
        let est = match entropy_estimator {
            Some(s) => parse_named(s)?,
            None => d.entropy_estimator(),
        };
        core::ProtocolParameters::new(
            block_size.unwrap_or(d.block_size()),
            n_edac_sets.unwrap_or(d.n_edac_sets()),
            est,
            d.sift_type(),
            confidence.unwrap_or(d.confidence()),
        )
        .map(PyProtocol)
        .map_err(py_err)
    }

    fn with_entropy_estimator(&self, name: &str) -> PyResult<Self> {
        Ok(PyProtocol(
            self.0.with_entropy_estimator(parse_named(name)?),
        ))
    }

    #[getter]
    fn block_size(&self) -> u32 {
        self.0.block_size()
    }
    #[getter]
    fn n_edac_sets(&self) -> u32 {
        self.0.n_edac_sets()
    }
    #[getter]
    fn entropy_estimator(&self) -> &'static str {
        self.0.entropy_estimator().name()
    }
    #[getter]
    fn sift_type(&self) -> &'static str {
        self.0.sift_type().name()
    }
    #[getter]
    fn confidence(&self) -> f64 {
        self.0.confidence()
    }

    fn __repr__(&self) -> String {
        format!(
            "ProtocolParameters(block_size={}, entropy_estimator='{}', confidence={})",
            self.0.block_size(),
            self.0.entropy_estimator().name(),
            self.0.confidence()
        )
    }
}

#[pyclass(
    name = "EavesdropperModel",
    module = "qkdrate",
    frozen,
    eq,
    skip_from_py_object
)]
#[derive(Clone, PartialEq)]
pub struct PyEve(core::EavesdropperModel);

#[pymethods]
impl PyEve {
    #[new]
    #[pyo3(signature = (*, pns_estimator=None, eve_chan=None, confidence=None))]
    fn new(
        pns_estimator: Option<&str>,
        eve_chan: Option<f64>,
        confidence: Option<f64>,
    ) -> PyResult<Self> {
        let d = core::EavesdropperModel::mark2_jan2004();
        let pns = match pns_estimator {
            Some(s) => parse_named(s)?,
            None => d.pns_estimator(),
        };
        core::EavesdropperModel::new(
            pns,
            eve_chan.unwrap_or(d.eve_chan()),
            confidence.unwrap_or(d.confidence()),
        )
        .map(PyEve)
        .map_err(py_err)
    }

    fn with_pns_estimator(&self, name: &str) -> PyResult<Self> {
        Ok(PyEve(self.0.with_pns_estimator(parse_named(name)?)))
    }

    #[getter]
    fn pns_estimator(&self) -> &'static str {
        self.0.pns_estimator().name()
    }
    #[getter]
    fn eve_chan(&self) -> f64 {
        self.0.eve_chan()
    }
    #[getter]
    fn confidence(&self) -> f64 {
        self.0.confidence()
    }

    fn __repr__(&self) -> String {
        format!(
            "EavesdropperModel(pns_estimator='{}', eve_chan={}, confidence={})",
            self.0.pns_estimator().name(),
            self.0.eve_chan(),
            self.0.confidence()
        )
    }
}

#[pyclass(name = "RateBreakdown", module = "qkdrate", frozen, get_all)]
pub struct PyBreakdown {
    sifted_rate: f64,
    qber: f64,
    edac_overhead: f64,
    entropy_per_bit: f64,
    pns_discount: f64,
    distilled_rate: f64,
}

#[pymethods]
impl PyBreakdown {
    fn __repr__(&self) -> String {
        format!(
            "RateBreakdown(sifted_rate={}, qber={}, distilled_rate={})",
            self.sifted_rate, self.qber, self.distilled_rate
        )
    }
}

#[pyclass(name = "OptimalMu", module = "qkdrate", frozen, get_all)]
pub struct PyOptimum {
    distance: f64,
    mu_opt: Option<f64>,
    rate_opt: f64,
    kind: &'static str,
}

impl From<core::OptimalMuPoint> for PyOptimum {
    fn from(p: core::OptimalMuPoint) -> Self {
        PyOptimum {
            distance: p.distance,
            mu_opt: p.mu_opt,
            rate_opt: p.rate_opt,
            kind: p.kind.name(),
        }
    }
}

#[pymethods]
impl PyOptimum {
    fn __repr__(&self) -> String {
        format!(
            "OptimalMu(distance={}, mu_opt={}, rate_opt={}, kind='{}')",
            self.distance,
            self.mu_opt.map_or("None".to_string(), |m| m.to_string()),
            self.rate_opt,
            self.kind
        )
    }
}

#[pyclass(name = "SimulationResult", module = "qkdrate", frozen, get_all)]
pub struct PySimulation {
    n_pulses: u64,
    sifted_count: u64,
    error_count: u64,
    estimated_rate: f64,
    estimated_qber: f64,
    seed: u64,
    analytic_rate: f64,
    analytic_qber: f64,
    rate_sigmas: f64,
    qber_sigmas: f64,
}

#[pymethods]
impl PySimulation {
    fn __repr__(&self) -> String {
        format!(
            "SimulationResult(n_pulses={}, estimated_rate={}, estimated_qber={})",
            self.n_pulses, self.estimated_rate, self.estimated_qber
        )
    }
}

#[pyclass(name = "ScenarioConfig", module = "qkdrate", frozen)]
pub struct PyScenario(core::cli::ScenarioConfig);

#[pymethods]
impl PyScenario {
    #[getter]
    fn link(&self) -> PyLink {
        PyLink(self.0.link)
    }
    #[getter]
    fn protocol(&self) -> PyProtocol {
        PyProtocol(self.0.proto)
    }
    #[getter]
    fn eavesdropper(&self) -> PyEve {
        PyEve(self.0.eve)
    }
    fn to_config_string(&self) -> String {
        self.0.to_config_string()
    }
}

fn or_default_proto(p: Option<PyRef<'_, PyProtocol>>) -> core::ProtocolParameters {
    p.map(|p| p.0).unwrap_or_default()
}

fn or_default_eve(e: Option<PyRef<'_, PyEve>>) -> core::EavesdropperModel {
    e.map(|e| e.0).unwrap_or_default()
}

/// Sifted bits/s and QBER as a `(rate, qber)` tuple.
#[pyfunction]
fn sifted_rate(link: PyRef<'_, PyLink>) -> (f64, f64) {
    let s = core::sifted_rate(&link.0);
    (s.rate, s.qber)
}

#[pyfunction]
#[pyo3(signature = (link, protocol=None, eavesdropper=None))]
fn distilled_rate(
    link: PyRef<'_, PyLink>,
    protocol: Option<PyRef<'_, PyProtocol>>,
    eavesdropper: Option<PyRef<'_, PyEve>>,
) -> PyResult<f64> {
    core::distilled_rate(
        &link.0,
        &or_default_proto(protocol),
        &or_default_eve(eavesdropper),
    )
    .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (link, protocol=None, eavesdropper=None))]
fn distill(
    link: PyRef<'_, PyLink>,
    protocol: Option<PyRef<'_, PyProtocol>>,
    eavesdropper: Option<PyRef<'_, PyEve>>,
) -> PyResult<PyBreakdown> {
    let b = core::distill(
        &link.0,
        &or_default_proto(protocol),
        &or_default_eve(eavesdropper),
    )
    .map_err(py_err)?;
    Ok(PyBreakdown {
        sifted_rate: b.sifted.rate,
        qber: b.sifted.qber,
        edac_overhead: b.overhead,
        entropy_per_bit: b.entropy.reported_per_bit(),
        pns_discount: b.pns.bits_per_second,
        distilled_rate: b.distilled,
    })
}

/// Distilled rate at each μ; `None` where the evaluation failed.
#[pyfunction]
#[pyo3(signature = (link, mu_grid, protocol=None, eavesdropper=None))]
fn sweep_mu(
    link: PyRef<'_, PyLink>,
    mu_grid: Vec<f64>,
    protocol: Option<PyRef<'_, PyProtocol>>,
    eavesdropper: Option<PyRef<'_, PyEve>>,
) -> PyResult<Vec<Option<f64>>> {
    core::optimize::sweep_mu(
        &link.0,
        &or_default_proto(protocol),
        &or_default_eve(eavesdropper),
        &mu_grid,
    )
    .map(|c| c.rates)
    .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (link, protocol=None, eavesdropper=None, mu_lo=DEFAULT_MU_BRACKET.0,
    mu_hi=DEFAULT_MU_BRACKET.1, tol=DEFAULT_TOL))]
fn optimal_mu(
    link: PyRef<'_, PyLink>,
    protocol: Option<PyRef<'_, PyProtocol>>,
    eavesdropper: Option<PyRef<'_, PyEve>>,
    mu_lo: f64,
    mu_hi: f64,
    tol: f64,
) -> PyResult<PyOptimum> {
    let bracket = Bracket::new(mu_lo, mu_hi).map_err(py_err)?;
    core::optimize::optimal_mu(
        &link.0,
        &or_default_proto(protocol),
        &or_default_eve(eavesdropper),
        bracket,
        tol,
    )
    .map(PyOptimum::from)
    .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (link, distance_grid, protocol=None, eavesdropper=None,
    mu_lo=DEFAULT_MU_BRACKET.0, mu_hi=DEFAULT_MU_BRACKET.1, tol=DEFAULT_TOL))]
fn optimal_mu_vs_distance(
    link: PyRef<'_, PyLink>,
    distance_grid: Vec<f64>,
    protocol: Option<PyRef<'_, PyProtocol>>,
    eavesdropper: Option<PyRef<'_, PyEve>>,
    mu_lo: f64,
    mu_hi: f64,
    tol: f64,
) -> PyResult<Vec<PyOptimum>> {
    let bracket = Bracket::new(mu_lo, mu_hi).map_err(py_err)?;
    core::optimize::optimal_mu_vs_distance(
        &link.0,
        &or_default_proto(protocol),
        &or_default_eve(eavesdropper),
        &distance_grid,
        bracket,
        tol,
    )
    .map(|v| v.into_iter().map(PyOptimum::from).collect())
    .map_err(py_err)
}

/// Rate curves keyed by multi-photon estimator name.
#[pyfunction]
#[pyo3(signature = (link, mu_grid, protocol=None, eavesdropper=None))]
fn compare_estimates(
    link: PyRef<'_, PyLink>,
    mu_grid: Vec<f64>,
    protocol: Option<PyRef<'_, PyProtocol>>,
    eavesdropper: Option<PyRef<'_, PyEve>>,
) -> PyResult<HashMap<&'static str, Vec<Option<f64>>>> {
    let curves = core::optimize::compare_estimates(
        &link.0,
        &or_default_proto(protocol),
        &or_default_eve(eavesdropper),
        &mu_grid,
    )
    .map_err(py_err)?;
    Ok(core::PnsEstimator::ALL
        .iter()
        .zip(curves)
        .map(|(e, c)| (e.name(), c.rates))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (link, n_pulses, seed=1))]
fn simulate_link(
    py: Python<'_>,
    link: PyRef<'_, PyLink>,
    n_pulses: u64,
    seed: u64,
) -> PyResult<PySimulation> {
    let link = link.0;
    let (sim, a) = py
        .detach(|| {
            core::montecarlo::simulate_link(&link, n_pulses, seed)
                .map(|s| (s, core::montecarlo::compare_with_analytic(&s, &link)))
        })
        .map_err(py_err)?;
    Ok(PySimulation {
        n_pulses: sim.n_pulses,
        sifted_count: sim.sifted_count,
        error_count: sim.error_count,
        estimated_rate: sim.estimated_rate,
        estimated_qber: sim.estimated_qber,
        seed: sim.seed,
        analytic_rate: a.analytic.rate,
        analytic_qber: a.analytic.qber,
        rate_sigmas: a.rate_sigmas,
        qber_sigmas: a.qber_sigmas,
    })
}

/// Probability that a non-empty Poisson(μ) pulse holds two or more photons.
#[pyfunction]
fn multiphoton_fraction(mu: f64) -> PyResult<f64> {
    core::distill::multiphoton_fraction(mu).map_err(py_err)
}

#[pyfunction]
fn erf_inv(x: f64) -> PyResult<f64> {
    core::numerics::erf_inv(x).map_err(py_err)
}

#[pyfunction]
fn inv_beta_approx(a: f64, b: f64, p: f64) -> PyResult<f64> {
    core::numerics::inv_beta_approx(a, b, p).map_err(py_err)
}

#[pyfunction]
fn parse_config(text: &str) -> PyResult<PyScenario> {
    core::cli::parse_config(text)
        .map(PyScenario)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn qkdrate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PRESET_NAME", core::PRESET_NAME)?;
    m.add_class::<PyLink>()?;
    m.add_class::<PyProtocol>()?;
    m.add_class::<PyEve>()?;
    m.add_class::<PyBreakdown>()?;
    m.add_class::<PyOptimum>()?;
    m.add_class::<PySimulation>()?;
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(sifted_rate, m)?)?;
    m.add_function(wrap_pyfunction!(distilled_rate, m)?)?;
    m.add_function(wrap_pyfunction!(distill, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_mu, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_mu, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_mu_vs_distance, m)?)?;
    m.add_function(wrap_pyfunction!(compare_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_link, m)?)?;
    m.add_function(wrap_pyfunction!(multiphoton_fraction, m)?)?;
    m.add_function(wrap_pyfunction!(erf_inv, m)?)?;
    m.add_function(wrap_pyfunction!(inv_beta_approx, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    Ok(())
}
