//! Named parameter sets used by the tests, the CLI examples and the bindings.
//!
//! All share `N = 5, b = 12, c = 1, tau = 1, beta = 0.2`.

use crate::game::{BriberyParams, CoreParams};

fn core(f: f64, alpha: f64, r_p: f64) -> CoreParams {
    CoreParams::new(5, 12.0, 1.0, 1.0, f, alpha, 0.2, r_p).expect("preset parameters are valid")
}

fn bribery(core: CoreParams, p: f64, q: f64) -> BriberyParams {
    BriberyParams::new(core, 1.0, 0.6, p, q).expect("preset parameters are valid")
}

/// Defection dominance in the plain game (`F = 2`).
pub fn fig1a() -> CoreParams {
    core(2.0, 0.5, 1.4)
}

/// Bistability in the plain game (`F = 3`).
pub fn fig1b() -> CoreParams {
    core(3.0, 0.5, 2.0)
}

/// Cooperation dominance in the plain game (`F = 4.7`).
pub fn fig1c() -> CoreParams {
    core(4.7, 0.15, 4.0)
}

/// Plain-game base of the `F` and `r_p` root sweeps, at the given point.
pub fn fig1_sweep(f: f64, r_p: f64) -> CoreParams {
    core(f, 0.5, r_p)
}

/// Defection dominance with bribery (`F = 1.5`, `p = 0.3`, `q = 0.8`).
pub fn fig2a() -> BriberyParams {
    bribery(core(1.5, 0.6, 1.4), 0.3, 0.8)
}

/// Bistability with bribery (`F = 2`, `r_p = 4`, `p = 0.6`, `q = 0.5`).
pub fn fig2b() -> BriberyParams {
    bribery(core(2.0, 0.6, 4.0), 0.6, 0.5)
}

/// Cooperation dominance with bribery (`F = 4`, `alpha = 0.15`).
pub fn fig2c() -> BriberyParams {
    bribery(core(4.0, 0.15, 4.0), 0.3, 0.8)
}

/// Bribery base where cooperators bribe more (`p = 0.6`, `q = 0.5`).
pub fn cooperators_bribe_more(f: f64, r_p: f64) -> BriberyParams {
    bribery(core(f, 0.6, r_p), 0.6, 0.5)
}

/// Bribery base where defectors bribe more (`p = 0.3`, `q = 0.8`).
pub fn defectors_bribe_more(f: f64, r_p: f64) -> BriberyParams {
    bribery(core(f, 0.6, r_p), 0.3, 0.8)
}
