//! Python bindings for the `ipgg` crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ipgg::analytic::{self, AnalysisError};
use ipgg::cli::verify;
use ipgg::dynamics;
use ipgg::game::{self as core, BriberyParams, CoreParams, GroupComposition, Strategy, ZeroCountRule};
use ipgg::oracle::{self, RngSeed};
use ipgg::presets;
use ipgg::sweep::{self, Classified, SweepParameter};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn strategy(name: &str) -> PyResult<Strategy> {
    match name.to_ascii_lowercase().as_str() {
        "c" | "cooperate" => Ok(Strategy::Cooperate),
        "d" | "defect" => Ok(Strategy::Defect),
        _ => Err(value_error(format!("strategy must be 'C' or 'D' (got {name:?})"))),
    }
}

fn rule(name: &str) -> PyResult<ZeroCountRule> {
    match name.to_ascii_lowercase().as_str() {
        "vanish" => Ok(ZeroCountRule::Vanish),
        "cancel" => Ok(ZeroCountRule::Cancel),
        _ => Err(value_error(format!("rule must be 'vanish' or 'cancel' (got {name:?})"))),
    }
}

type SweepRow = (f64, String, Option<f64>, Option<f64>);

/// A game: the plain punishment game or its bribery extension.
#[pyclass(name = "Model", frozen, skip_from_py_object, module = "pyipgg")]
#[derive(Clone)]
struct PyModel {
    inner: core::Model,
}

#[pymethods]
impl PyModel {
    /// Plain institutional-punishment game.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn ipgg(n: u32, b: f64, c: f64, tau: f64, f: f64, alpha: f64, beta: f64, r_p: f64) -> PyResult<Self> {
        let core = CoreParams::new(n, b, c, tau, f, alpha, beta, r_p).map_err(value_error)?;
        Ok(Self {
            inner: core::Model::Ipgg(core),
        })
    }

    /// Game with a leader who may accept bribes.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn bribery(
        n: u32,
        b: f64,
        c: f64,
        tau: f64,
        f: f64,
        alpha: f64,
        beta: f64,
        r_p: f64,
        h: f64,
        gamma: f64,
        p: f64,
        q: f64,
    ) -> PyResult<Self> {
        let core = CoreParams::new(n, b, c, tau, f, alpha, beta, r_p).map_err(value_error)?;
        let bp = BriberyParams::new(core, h, gamma, p, q).map_err(value_error)?;
        Ok(Self {
            inner: core::Model::Bribery(bp),
        })
    }

    /// Named parameter sets: fig1a, fig1b, fig1c, fig2a, fig2b, fig2c.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let inner = match name {
            "fig1a" => core::Model::Ipgg(presets::fig1a()),
            "fig1b" => core::Model::Ipgg(presets::fig1b()),
            "fig1c" => core::Model::Ipgg(presets::fig1c()),
            "fig2a" => core::Model::Bribery(presets::fig2a()),
            "fig2b" => core::Model::Bribery(presets::fig2b()),
            "fig2c" => core::Model::Bribery(presets::fig2c()),
            _ => return Err(value_error(format!("unknown preset {name:?}"))),
        };
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn f(&self) -> f64 {
        self.inner.core().f()
    }

    #[getter]
    fn r_p(&self) -> f64 {
        self.inner.core().r_p()
    }

    fn with_f(&self, f: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_f(f).map_err(value_error)?,
        })
    }

    fn with_r_p(&self, r_p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_r_p(r_p).map_err(value_error)?,
        })
    }

    fn warnings(&self) -> Vec<String> {
        self.inner.warnings().iter().map(ToString::to_string).collect()
    }

    /// Expected payoff of a focal player facing `n_c` cooperating and `n_d`
    /// defecting co-players.
    fn payoff(&self, focal: &str, n_c: u32, n_d: u32) -> PyResult<f64> {
        let comp = GroupComposition::new(n_c, n_d, self.inner.n()).map_err(value_error)?;
        Ok(self.inner.payoff(strategy(focal)?, comp))
    }

    fn avg_payoff(&self, x: f64, focal: &str) -> PyResult<f64> {
        analytic::avg_payoff(&self.inner, x, strategy(focal)?).map_err(value_error)
    }

    #[pyo3(signature = (x, focal, rule_name = "vanish"))]
    fn binomial_avg_payoff(&self, x: f64, focal: &str, rule_name: &str) -> PyResult<f64> {
        analytic::binomial_avg_payoff(&self.inner, x, strategy(focal)?, rule(rule_name)?).map_err(value_error)
    }

    fn q(&self, x: f64) -> PyResult<f64> {
        analytic::q_function(&self.inner, x).map_err(value_error)
    }

    fn gradient(&self, x: f64) -> PyResult<f64> {
        analytic::gradient_of_selection(&self.inner, x).map_err(value_error)
    }

    /// `(f_min, f_max)`.
    fn thresholds(&self) -> (f64, f64) {
        let th = analytic::thresholds(&self.inner);
        (th.f_min, th.f_max)
    }

    /// Regime label; knife-edge and degenerate cases get their own labels.
    fn regime(&self) -> String {
        Classified(analytic::classify_regime(&self.inner)).label()
    }

    fn x_star(&self) -> Option<f64> {
        analytic::interior_root(&self.inner).ok()
    }

    fn basin(&self) -> PyResult<f64> {
        dynamics::basin_of_cooperation(&self.inner).map_err(|e: AnalysisError| value_error(e))
    }

    /// `(times, states, converged_to)`.
    #[pyo3(signature = (x0, step = dynamics::DEFAULT_STEP, t_max = dynamics::DEFAULT_T_MAX, conv_tol = dynamics::DEFAULT_CONV_TOL))]
    fn integrate(&self, x0: f64, step: f64, t_max: f64, conv_tol: f64) -> PyResult<(Vec<f64>, Vec<f64>, Option<f64>)> {
        let t = dynamics::integrate(&self.inner, x0, step, t_max, conv_tol).map_err(value_error)?;
        Ok((t.times, t.states, t.converged_to))
    }

    /// Monte Carlo `(mean, std_error)` of the focal payoff in one group.
    #[pyo3(signature = (focal, n_c, n_d, samples = oracle::DEFAULT_SAMPLES, seed = oracle::DEFAULT_SEED))]
    fn estimate_payoff(&self, py: Python<'_>, focal: &str, n_c: u32, n_d: u32, samples: u64, seed: u64) -> PyResult<(f64, f64)> {
        let comp = GroupComposition::new(n_c, n_d, self.inner.n()).map_err(value_error)?;
        let s = strategy(focal)?;
        let model = self.inner;
        let est = py
            .detach(|| oracle::estimate_expected_payoff(&model, s, comp, samples, RngSeed::new(seed, 0)))
            .map_err(value_error)?;
        Ok((est.mean, est.std_error))
    }

    /// `[(value, regime, x_star, basin), ...]` along `f` or `r_p`.
    fn sweep(&self, param: &str, lo: f64, hi: f64, steps: usize) -> PyResult<Vec<SweepRow>> {
        let parameter =
            SweepParameter::parse(param).ok_or_else(|| value_error(format!("unknown sweep parameter {param:?}")))?;
        let result = sweep::sweep_root(&self.inner, parameter, lo, hi, steps).map_err(value_error)?;
        Ok(result
            .points
            .into_iter()
            .map(|p| (p.value, p.classified.label(), p.classified.x_star(), p.classified.basin()))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.inner)
    }
}

/// Runs the oracle-agreement battery; returns `(passed, summary_lines, csv)`.
#[pyfunction]
#[pyo3(signature = (seed = oracle::DEFAULT_SEED, samples = oracle::DEFAULT_SAMPLES))]
fn run_verify(py: Python<'_>, seed: u64, samples: u64) -> PyResult<(bool, Vec<String>, String)> {
    if samples < 2 {
        return Err(value_error("samples must be at least 2"));
    }
    let outcome = py.detach(|| verify::run(seed, samples, &[]));
    let lines = outcome.suites.iter().map(|s| s.line()).collect();
    Ok((outcome.passed(), lines, outcome.csv))
}

#[pymodule]
fn pyipgg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
