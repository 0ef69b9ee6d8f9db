//! Replicator-equation trajectories and the basin of full cooperation.

use thiserror::Error;

use crate::analytic::{self, AnalysisError, Regime};
use crate::game::Model;

pub const DEFAULT_STEP: f64 = 0.01;
pub const DEFAULT_T_MAX: f64 = 1e4;
pub const DEFAULT_CONV_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("initial fraction {0} lies outside [0, 1]")]
    InitialState(f64),
    #[error("{name} must be positive and finite (got {value})")]
    Control { name: &'static str, value: f64 },
}

/// Sampled path of the cooperator fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Rest point the path settled on, if it settled before the horizon.
    pub converged_to: Option<f64>,
    pub step_size: f64,
}

impl Trajectory {
    pub fn last_state(&self) -> f64 {
        *self.states.last().expect("trajectory holds its initial state")
    }
}

// Right-hand side for the stages; intermediate stages may overshoot [0, 1]
// by rounding, the clamp keeps Q inside its domain.
fn rhs(model: &Model, x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    analytic::gradient_of_selection(model, x).expect("clamped fraction")
}

/// Classical fourth-order Runge–Kutta with a fixed step.
///
/// Stops once `|G(x)| < conv_tol`; `converged_to` is then the nearest of
/// `0`, `x*` (when bistable) and `1`.
pub fn integrate(model: &Model, x0: f64, step: f64, t_max: f64, conv_tol: f64) -> Result<Trajectory, DynamicsError> {
    if !(0.0..=1.0).contains(&x0) {
        return Err(DynamicsError::InitialState(x0));
    }
    for (name, value) in [("step", step), ("t_max", t_max), ("conv_tol", conv_tol)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(DynamicsError::Control { name, value });
        }
    }

    let mut rest_points = vec![0.0, 1.0];
    if let Ok(Regime::Bistable { x_star }) = analytic::classify_regime(model) {
        rest_points.push(x_star);
    }

    let mut times = vec![0.0];
    let mut states = vec![x0];
    let mut x = x0;
    let mut converged_to = None;
    let steps = (t_max / step).ceil() as u64;

    for i in 0..=steps {
        if rhs(model, x).abs() < conv_tol {
            converged_to = rest_points
                .iter()
                .copied()
                .min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()));
            break;
        }
        if i == steps {
            break;
        }
        let k1 = rhs(model, x);
        let k2 = rhs(model, x + 0.5 * step * k1);
        let k3 = rhs(model, x + 0.5 * step * k2);
        let k4 = rhs(model, x + step * k3);
        x = (x + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(0.0, 1.0);
        times.push((i + 1) as f64 * step);
        states.push(x);
    }

    Ok(Trajectory {
        times,
        states,
        converged_to,
        step_size: step,
    })
}

/// Measure of initial fractions that evolve to full cooperation.
pub fn basin_of_cooperation(model: &Model) -> Result<f64, AnalysisError> {
    Ok(analytic::classify_regime(model)?.basin_of_cooperation())
}
