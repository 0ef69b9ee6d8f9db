//! One- and two-parameter scans of the regime and interior root.

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{self, AnalysisError, Regime};
use crate::game::{Model, ParamError};

pub const DEFAULT_F_RANGE: (f64, f64) = (1.05, 8.0);
pub const DEFAULT_RP_RANGE: (f64, f64) = (0.1, 6.0);
pub const DEFAULT_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep bounds must satisfy lo < hi (got {lo}, {hi})")]
    Range { lo: f64, hi: f64 },
    #[error("need at least 2 steps (got {0})")]
    Steps(usize),
    #[error(transparent)]
    Param(#[from] ParamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    PoolMultiplier,
    PunishmentMultiplier,
}

impl SweepParameter {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParameter::PoolMultiplier => "f",
            SweepParameter::PunishmentMultiplier => "r_p",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "f" => Some(SweepParameter::PoolMultiplier),
            "r_p" | "rp" => Some(SweepParameter::PunishmentMultiplier),
            _ => None,
        }
    }

    pub fn default_range(&self) -> (f64, f64) {
        match self {
            SweepParameter::PoolMultiplier => DEFAULT_F_RANGE,
            SweepParameter::PunishmentMultiplier => DEFAULT_RP_RANGE,
        }
    }

    fn apply(&self, model: &Model, value: f64) -> Result<Model, ParamError> {
        match self {
            SweepParameter::PoolMultiplier => model.with_f(value),
            SweepParameter::PunishmentMultiplier => model.with_r_p(value),
        }
    }
}

/// Classification of a single parameter point; knife-edge and degenerate
/// points are kept, not dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Classified(pub Result<Regime, AnalysisError>);

impl Classified {
    fn of(model: &Model) -> Self {
        Classified(analytic::classify_regime(model))
    }

    pub fn regime(&self) -> Option<Regime> {
        self.0.as_ref().ok().copied()
    }

    pub fn label(&self) -> String {
        match &self.0 {
            Ok(regime) => regime.label().to_string(),
            Err(AnalysisError::Degenerate { regime, .. }) => format!("degenerate_{}", regime.label()),
            Err(AnalysisError::KnifeEdge { edge, .. }) => format!("knife_edge_{}", edge.label()),
            Err(_) => "undefined".to_string(),
        }
    }

    pub fn x_star(&self) -> Option<f64> {
        self.regime().and_then(|r| r.x_star())
    }

    pub fn basin(&self) -> Option<f64> {
        match &self.0 {
            Ok(regime) | Err(AnalysisError::Degenerate { regime, .. }) => Some(regime.basin_of_cooperation()),
            Err(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub classified: Classified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Maximal runs of consecutive bistable points, as `(value, x*)` pairs.
    pub fn bistable_runs(&self) -> Vec<Vec<(f64, f64)>> {
        let mut runs = Vec::new();
        let mut current = Vec::new();
        for p in &self.points {
            match p.classified.x_star() {
                Some(x) => current.push((p.value, x)),
                None if !current.is_empty() => runs.push(std::mem::take(&mut current)),
                None => {}
            }
        }
        if !current.is_empty() {
            runs.push(current);
        }
        runs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub f: f64,
    pub r_p: f64,
    pub classified: Classified,
}

/// Cells are stored row-major with `F` as the outer axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeGrid {
    pub f_values: Vec<f64>,
    pub rp_values: Vec<f64>,
    pub cells: Vec<GridCell>,
}

impl RegimeGrid {
    pub fn cell(&self, f_index: usize, rp_index: usize) -> &GridCell {
        &self.cells[f_index * self.rp_values.len() + rp_index]
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, SweepError> {
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(SweepError::Range { lo, hi });
    }
    if steps < 2 {
        return Err(SweepError::Steps(steps));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / last })
        .collect())
}

/// Regime and interior root along one parameter, others held fixed.
pub fn sweep_root(
    model: &Model,
    parameter: SweepParameter,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<SweepResult, SweepError> {
    let models = linspace(lo, hi, steps)?
        .into_iter()
        .map(|v| Ok((v, parameter.apply(model, v)?)))
        .collect::<Result<Vec<_>, SweepError>>()?;
    let points = models
        .par_iter()
        .map(|(value, m)| SweepPoint {
            value: *value,
            classified: Classified::of(m),
        })
        .collect();
    Ok(SweepResult { parameter, points })
}

/// Regime and basin of full cooperation over an `(F, r_p)` grid.
#[allow(clippy::too_many_arguments)]
pub fn regime_grid(
    model: &Model,
    f_lo: f64,
    f_hi: f64,
    rp_lo: f64,
    rp_hi: f64,
    f_steps: usize,
    rp_steps: usize,
) -> Result<RegimeGrid, SweepError> {
    let f_values = linspace(f_lo, f_hi, f_steps)?;
    let rp_values = linspace(rp_lo, rp_hi, rp_steps)?;
    let mut models = Vec::with_capacity(f_steps * rp_steps);
    for &f in &f_values {
        let row = model.with_f(f)?;
        for &r_p in &rp_values {
            models.push((f, r_p, row.with_r_p(r_p)?));
        }
    }
    let cells = models
        .par_iter()
        .map(|(f, r_p, m)| GridCell {
            f: *f,
            r_p: *r_p,
            classified: Classified::of(m),
        })
        .collect();
    Ok(RegimeGrid {
        f_values,
        rp_values,
        cells,
    })
}
