//! Replicator dynamics of the public goods game with an institutional
//! punishment leader, with and without bribery.
//!
//! [`game`] holds parameters and per-group payoffs, [`analytic`] the
//! closed-form population averages, thresholds and regime classification,
//! [`dynamics`] the ODE integrator, [`oracle`] the Monte Carlo cross-checks
//! and [`sweep`] the parameter scans. [`cli`] backs the `ipgg` binary.

pub mod analytic;
pub mod cli;
pub mod dynamics;
pub mod game;
pub mod oracle;
pub mod presets;
pub mod sweep;

pub use analytic::{AnalysisError, Regime, Stability, Thresholds};
pub use dynamics::Trajectory;
pub use game::{BriberyParams, CoreParams, GroupComposition, Model, ParamError, Strategy, ZeroCountRule};
pub use oracle::{Estimate, RngSeed};
