//! Population-level analysis of the replicator dynamics.
//!
//! With a fraction `x` of cooperators, co-player counts are binomial and the
//! average payoffs `f_C`, `f_D` collapse to short polynomials in `x`. Their
//! difference `Q(x)` is strictly increasing whenever `beta * tau * r_p > 0`,
//! so the dynamics `x' = x (1 - x) Q(x)` have at most one interior rest point
//! and three possible regimes, separated by the pool-multiplier thresholds.

use std::fmt;

use thiserror::Error;

use crate::game::{GroupComposition, Model, Strategy, ZeroCountRule};

/// Absolute distance in `F` within which a threshold counts as hit.
pub const KNIFE_EDGE_TOL: f64 = 1e-9;
/// Bisection bracket is `[ROOT_EPS, 1 - ROOT_EPS]`.
pub const ROOT_EPS: f64 = 1e-15;
/// Absolute tolerance in `x` of the interior root.
pub const ROOT_TOL: f64 = 1e-12;
/// A point counts as an equilibrium for [`stability_at`] when
/// `|G(x)| < EQUILIBRIUM_TOL * (1 + |dG/dx|)`, i.e. it lies within about
/// this distance in `x` of a root.
pub const EQUILIBRIUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    /// `dG/dx = 0`; only reachable when selection vanishes identically.
    Neutral,
}

impl Stability {
    pub fn label(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Neutral => "neutral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    DefectionDominant,
    Bistable { x_star: f64 },
    CooperationDominant,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::DefectionDominant => "defection_dominant",
            Regime::Bistable { .. } => "bistable",
            Regime::CooperationDominant => "cooperation_dominant",
        }
    }

    pub fn x_star(&self) -> Option<f64> {
        match self {
            Regime::Bistable { x_star } => Some(*x_star),
            _ => None,
        }
    }

    pub fn stability_at_zero(&self) -> Stability {
        match self {
            Regime::CooperationDominant => Stability::Unstable,
            _ => Stability::Stable,
        }
    }

    pub fn stability_at_one(&self) -> Stability {
        match self {
            Regime::DefectionDominant => Stability::Unstable,
            _ => Stability::Stable,
        }
    }

    /// Measure of initial states that end in full cooperation.
    pub fn basin_of_cooperation(&self) -> f64 {
        match self {
            Regime::DefectionDominant => 0.0,
            Regime::Bistable { x_star } => 1.0 - x_star,
            Regime::CooperationDominant => 1.0,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Min,
    Max,
}

impl Edge {
    pub fn label(&self) -> &'static str {
        match self {
            Edge::Min => "f_min",
            Edge::Max => "f_max",
        }
    }
}

/// Pool-multiplier thresholds bounding the bistable window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub f_min: f64,
    pub f_max: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("fraction {0} lies outside [0, 1]")]
    OutOfDomain(f64),
    #[error("beta * tau * r_p = 0: Q is the constant {q}, dynamics are {}", .regime.label())]
    Degenerate { q: f64, regime: Regime },
    #[error("F = {f} sits on {} = {threshold}", .edge.label())]
    KnifeEdge { edge: Edge, f: f64, threshold: f64 },
    #[error("no interior root: regime is {}", .regime.label())]
    NotBistable { regime: Regime },
    #[error("x = {x} is not an equilibrium (G = {g})")]
    NotEquilibrium { x: f64, g: f64 },
}

fn check_fraction(x: f64) -> Result<(), AnalysisError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(AnalysisError::OutOfDomain(x))
    }
}

/// `sum_{k=0}^{n-2} y^{k+1}`.
fn power_sum(y: f64, n: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..n - 1 {
        term *= y;
        sum += term;
    }
    sum
}

/// `sum_{k=0}^{n-2} (k+1) y^k`, the derivative of [`power_sum`].
fn power_sum_slope(y: f64, n: u32) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 0..n - 1 {
        sum += f64::from(k + 1) * term;
        term *= y;
    }
    sum
}

/// Average payoff `f_C` or `f_D` at cooperator fraction `x`, closed form.
///
/// The removable singularities `((1-x) - (1-x)^N)/x` and
/// `x (1 - x^{N-1})/(1-x)` are evaluated as finite power sums, so the result
/// is exact at both boundaries.
pub fn avg_payoff(model: &Model, x: f64, strategy: Strategy) -> Result<f64, AnalysisError> {
    check_fraction(x)?;
    let core = model.core();
    let n = f64::from(core.n());
    let (b, c, tau, f, alpha, beta, r_p) = (
        core.b(),
        core.c(),
        core.tau(),
        core.f(),
        core.alpha(),
        core.beta(),
        core.r_p(),
    );

    let value = match strategy {
        Strategy::Cooperate => {
            let fine = beta * alpha * tau * r_p;
            b + f * c * ((n - 1.0) * x + 1.0) / n - c - tau - fine - fine * power_sum(1.0 - x, core.n())
        }
        Strategy::Defect => {
            let fine = beta * (1.0 - alpha) * tau * r_p;
            b + f * c * (n - 1.0) * x / n - tau - fine - fine * power_sum(x, core.n())
        }
    };

    Ok(match model.bribery() {
        None => value,
        Some(bp) => {
            let offer = match strategy {
                Strategy::Cooperate => bp.p(),
                Strategy::Defect => bp.q(),
            };
            let gh = bp.gamma() * bp.h();
            let receipts = (bp.p() * gh * (n - 1.0) * x + bp.q() * gh * (n - 1.0) * (1.0 - x)) / n;
            value - (n - 1.0) / n * offer * gh + receipts
        }
    })
}

/// Average payoff as the explicit binomial sum over co-player compositions.
///
/// Independent of [`avg_payoff`]: it only calls the per-group payoffs. The
/// two agree exactly under [`ZeroCountRule::Cancel`]; under
/// [`ZeroCountRule::Vanish`] they differ by [`zero_count_gap`].
pub fn binomial_avg_payoff(
    model: &Model,
    x: f64,
    strategy: Strategy,
    rule: ZeroCountRule,
) -> Result<f64, AnalysisError> {
    check_fraction(x)?;
    let trials = model.n() - 1;
    let mut binom = 1.0;
    let mut total = 0.0;
    for comp in GroupComposition::all(model.n()) {
        let k = comp.cooperators();
        if k > 0 {
            binom = binom * f64::from(trials - k + 1) / f64::from(k);
        }
        let weight = binom * x.powi(k as i32) * (1.0 - x).powi((trials - k) as i32);
        total += weight * model.payoff_with(strategy, comp, rule);
    }
    Ok(total)
}

/// Exact difference `binomial_avg_payoff(Vanish) - avg_payoff`.
///
/// The cancelled reading charges a focal cooperator the own-type summand
/// even when all co-players defect, which happens with probability
/// `(1-x)^{N-1}`; symmetrically for defectors with `x^{N-1}`.
pub fn zero_count_gap(model: &Model, x: f64, strategy: Strategy) -> Result<f64, AnalysisError> {
    check_fraction(x)?;
    let core = model.core();
    let trials = (core.n() - 1) as i32;
    Ok(match strategy {
        Strategy::Cooperate => core.beta() * core.alpha() * core.tau() * core.r_p() * (1.0 - x).powi(trials),
        Strategy::Defect => core.beta() * (1.0 - core.alpha()) * core.tau() * core.r_p() * x.powi(trials),
    })
}

/// `Q(x) = f_C - f_D`.
pub fn q_function(model: &Model, x: f64) -> Result<f64, AnalysisError> {
    check_fraction(x)?;
    let core = model.core();
    let n = f64::from(core.n());
    let strength = core.punishment_strength();
    let constant = core.f() * core.c() / n - core.c() + model.bribery_offset() - 2.0 * strength * core.alpha()
        + strength;
    Ok(constant - strength * core.alpha() * power_sum(1.0 - x, core.n())
        + strength * (1.0 - core.alpha()) * power_sum(x, core.n()))
}

/// `dQ/dx`, nonnegative everywhere and positive on `(0, 1)` unless `beta tau r_p = 0`.
pub fn q_derivative(model: &Model, x: f64) -> Result<f64, AnalysisError> {
    check_fraction(x)?;
    let core = model.core();
    let strength = core.punishment_strength();
    Ok(strength * core.alpha() * power_sum_slope(1.0 - x, core.n())
        + strength * (1.0 - core.alpha()) * power_sum_slope(x, core.n()))
}

/// Gradient of selection `G(x) = x (1 - x) Q(x)`.
pub fn gradient_of_selection(model: &Model, x: f64) -> Result<f64, AnalysisError> {
    Ok(x * (1.0 - x) * q_function(model, x)?)
}

/// `dG/dx = (1 - 2x) Q(x) + x (1 - x) Q'(x)`.
pub fn gradient_slope(model: &Model, x: f64) -> Result<f64, AnalysisError> {
    Ok((1.0 - 2.0 * x) * q_function(model, x)? + x * (1.0 - x) * q_derivative(model, x)?)
}

/// Pool-multiplier thresholds: `Q(1) = 0` at `f_min`, `Q(0) = 0` at `f_max`.
pub fn thresholds(model: &Model) -> Thresholds {
    let core = model.core();
    let n = f64::from(core.n());
    let (c, alpha) = (core.c(), core.alpha());
    let s = core.punishment_strength();
    match model.bribery() {
        None => Thresholds {
            f_min: (c - s + 2.0 * alpha * s - (1.0 - alpha) * s * (n - 1.0)) * n / c,
            f_max: (c - s + alpha * s * (n + 1.0)) * n / c,
        },
        Some(bp) => {
            let bribe = (n - 1.0) * bp.gamma() * bp.h() * (bp.q() - bp.p());
            Thresholds {
                f_min: (n * c - bribe - n * s * (1.0 - 2.0 * alpha) - n * (n - 1.0) * (1.0 - alpha) * s) / c,
                f_max: (n * c - bribe - n * s + n * alpha * s * (n + 1.0)) / c,
            }
        }
    }
}

/// Regime of the dynamics, with `x*` located when bistable.
pub fn classify_regime(model: &Model) -> Result<Regime, AnalysisError> {
    let th = thresholds(model);
    let f = model.core().f();
    for (edge, threshold) in [(Edge::Min, th.f_min), (Edge::Max, th.f_max)] {
        if (f - threshold).abs() < KNIFE_EDGE_TOL {
            return Err(AnalysisError::KnifeEdge { edge, f, threshold });
        }
    }

    if model.core().punishment_strength() == 0.0 {
        let q = q_function(model, 0.0)?;
        let regime = if q < 0.0 {
            Regime::DefectionDominant
        } else {
            Regime::CooperationDominant
        };
        return Err(AnalysisError::Degenerate { q, regime });
    }

    Ok(if f < th.f_min {
        Regime::DefectionDominant
    } else if f > th.f_max {
        Regime::CooperationDominant
    } else {
        Regime::Bistable {
            x_star: bisect_increasing(|x| q_function(model, x).expect("bracket inside [0, 1]"), ROOT_EPS, 1.0 - ROOT_EPS),
        }
    })
}

/// Root of an increasing function on `[lo, hi]` to [`ROOT_TOL`].
fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // 2^-60 < 1e-12 relative to a unit bracket
    for _ in 0..200 {
        if hi - lo <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unique interior rest point `x*` of a bistable model.
pub fn interior_root(model: &Model) -> Result<f64, AnalysisError> {
    match classify_regime(model)? {
        Regime::Bistable { x_star } => Ok(x_star),
        regime => Err(AnalysisError::NotBistable { regime }),
    }
}

/// Linear stability of a rest point: stable iff `dG/dx < 0` there.
pub fn stability_at(model: &Model, point: f64) -> Result<Stability, AnalysisError> {
    let g = gradient_of_selection(model, point)?;
    let slope = gradient_slope(model, point)?;
    if g.abs() >= EQUILIBRIUM_TOL * (1.0 + slope.abs()) {
        return Err(AnalysisError::NotEquilibrium { x: point, g });
    }
    Ok(if slope < 0.0 {
        Stability::Stable
    } else if slope > 0.0 {
        Stability::Unstable
    } else {
        Stability::Neutral
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{BriberyParams, CoreParams};
    use crate::presets;

    fn ipgg(core: CoreParams) -> Model {
        Model::Ipgg(core)
    }

    fn bg(bp: BriberyParams) -> Model {
        Model::Bribery(bp)
    }

    #[test]
    fn boundary_averages_collapse() {
        let m = ipgg(presets::fig1b());
        assert!((avg_payoff(&m, 1.0, Strategy::Cooperate).unwrap() - 12.8).abs() < 1e-12);
        assert!((avg_payoff(&m, 0.0, Strategy::Defect).unwrap() - 10.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_binomial_keeps_single_term() {
        let m = bg(presets::fig2a());
        let all_d = GroupComposition::new(0, 4, 5).unwrap();
        let all_c = GroupComposition::new(4, 0, 5).unwrap();
        for rule in [ZeroCountRule::Vanish, ZeroCountRule::Cancel] {
            let v = binomial_avg_payoff(&m, 0.0, Strategy::Cooperate, rule).unwrap();
            assert_eq!(v, m.payoff_with(Strategy::Cooperate, all_d, rule));
            let v = binomial_avg_payoff(&m, 1.0, Strategy::Defect, rule).unwrap();
            assert_eq!(v, m.payoff_with(Strategy::Defect, all_c, rule));
        }
    }

    #[test]
    fn closed_form_matches_cancelled_binomial_sum() {
        let models = [ipgg(presets::fig1a()), ipgg(presets::fig1c()), bg(presets::fig2a()), bg(presets::fig2b())];
        for m in models {
            for i in 0..=20 {
                let x = f64::from(i) / 20.0;
                for s in Strategy::BOTH {
                    let closed = avg_payoff(&m, x, s).unwrap();
                    let sum = binomial_avg_payoff(&m, x, s, ZeroCountRule::Cancel).unwrap();
                    assert!((closed - sum).abs() < 1e-10, "{m:?} x={x} {s:?}");
                    let vanish = binomial_avg_payoff(&m, x, s, ZeroCountRule::Vanish).unwrap();
                    let gap = zero_count_gap(&m, x, s).unwrap();
                    assert!((vanish - closed - gap).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn vanishing_rule_gap_at_half() {
        let m = ipgg(presets::fig1b());
        let gap = zero_count_gap(&m, 0.5, Strategy::Cooperate).unwrap();
        assert!((gap - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn q_at_half_is_constant_part() {
        let m = ipgg(presets::fig1b());
        assert!((q_function(&m, 0.5).unwrap() + 0.4).abs() < 1e-12);
        assert!((q_function(&m, 0.9).unwrap() - 0.1968).abs() < 1e-12);
    }

    #[test]
    fn q_is_difference_of_averages() {
        let m = bg(presets::fig2c());
        for i in 0..=10 {
            let x = f64::from(i) / 10.0;
            let diff = avg_payoff(&m, x, Strategy::Cooperate).unwrap() - avg_payoff(&m, x, Strategy::Defect).unwrap();
            assert!((q_function(&m, x).unwrap() - diff).abs() < 1e-12);
        }
    }

    #[test]
    fn bribery_without_acceptance_is_bitwise_plain_q() {
        let core = presets::fig1b();
        let m = bg(BriberyParams::new(core, 1.0, 0.0, 0.3, 0.8).unwrap());
        for i in 0..=10 {
            let x = f64::from(i) / 10.0;
            assert_eq!(q_function(&m, x).unwrap().to_bits(), q_function(&ipgg(core), x).unwrap().to_bits());
        }
    }

    #[test]
    fn bribery_offset_for_fig2a() {
        let m = bg(presets::fig2a());
        assert!((m.bribery_offset() - 0.24).abs() < 1e-15);
        for i in 0..=10 {
            let x = f64::from(i) / 10.0;
            let d = q_function(&m, x).unwrap() - q_function(&m.without_bribery(), x).unwrap();
            assert!((d - 0.24).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_vanishes_at_boundaries() {
        let m = bg(presets::fig2b());
        assert_eq!(gradient_of_selection(&m, 0.0).unwrap(), 0.0);
        assert_eq!(gradient_of_selection(&m, 1.0).unwrap(), 0.0);
        let g = gradient_of_selection(&ipgg(presets::fig1b()), 0.9).unwrap();
        assert!((g - 0.9 * 0.1 * 0.1968).abs() < 1e-12);
    }

    #[test]
    fn out_of_domain_fraction_is_rejected() {
        let m = ipgg(presets::fig1a());
        assert_eq!(q_function(&m, 1.5), Err(AnalysisError::OutOfDomain(1.5)));
        assert!(avg_payoff(&m, -0.1, Strategy::Defect).is_err());
        assert!(gradient_of_selection(&m, f64::NAN).is_err());
    }

    #[test]
    fn figure_thresholds() {
        let th = thresholds(&ipgg(presets::fig1a()));
        assert!((th.f_min - 2.2).abs() < 1e-9 && (th.f_max - 7.8).abs() < 1e-9);
        let th = thresholds(&ipgg(presets::fig1b()));
        assert!((th.f_min - 1.0).abs() < 1e-9 && (th.f_max - 9.0).abs() < 1e-9);
        let th = thresholds(&ipgg(presets::fig1c()));
        assert!((th.f_max - 4.6).abs() < 1e-9);
        let th = thresholds(&bg(presets::fig2a()));
        assert!((th.f_min - 1.84).abs() < 1e-9 && (th.f_max - 7.44).abs() < 1e-9);
    }

    #[test]
    fn thresholds_zero_the_boundary_payoff_gap() {
        // fig2b and fig2c have f_min < 0, outside the valid range of F
        for m in [ipgg(presets::fig1a()), ipgg(presets::fig1b()), bg(presets::fig2a())] {
            let th = thresholds(&m);
            let at_min = m.with_f(th.f_min).unwrap();
            let at_max = m.with_f(th.f_max).unwrap();
            assert!(q_function(&at_min, 1.0).unwrap().abs() < 1e-12);
            assert!(q_function(&at_max, 0.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn figure_regimes() {
        assert_eq!(classify_regime(&ipgg(presets::fig1a())).unwrap(), Regime::DefectionDominant);
        assert!(matches!(classify_regime(&ipgg(presets::fig1b())).unwrap(), Regime::Bistable { .. }));
        assert_eq!(classify_regime(&ipgg(presets::fig1c())).unwrap(), Regime::CooperationDominant);
        assert_eq!(classify_regime(&bg(presets::fig2a())).unwrap(), Regime::DefectionDominant);
        assert!(matches!(classify_regime(&bg(presets::fig2b())).unwrap(), Regime::Bistable { .. }));
        assert_eq!(classify_regime(&bg(presets::fig2c())).unwrap(), Regime::CooperationDominant);
    }

    #[test]
    fn fig1b_root_bracket() {
        let m = ipgg(presets::fig1b());
        let x = interior_root(&m).unwrap();
        assert!(x > 0.78 && x < 0.79);
        assert!((x - 0.786_080_030_704_226_4).abs() < 1e-11);
        assert!(q_function(&m, 0.78).unwrap() < 0.0 && q_function(&m, 0.79).unwrap() > 0.0);
        assert!(q_function(&m, x - 1e-6).unwrap() < 0.0 && q_function(&m, x + 1e-6).unwrap() > 0.0);
    }

    #[test]
    fn interior_root_requires_bistability() {
        assert_eq!(
            interior_root(&ipgg(presets::fig1a())),
            Err(AnalysisError::NotBistable { regime: Regime::DefectionDominant })
        );
    }

    #[test]
    fn knife_edge_is_reported() {
        let m = ipgg(presets::fig1a());
        let at = m.with_f(thresholds(&m).f_min + 1e-12).unwrap();
        assert!(matches!(classify_regime(&at), Err(AnalysisError::KnifeEdge { edge: Edge::Min, .. })));
        let at = m.with_f(7.8).unwrap();
        assert!(matches!(classify_regime(&at), Err(AnalysisError::KnifeEdge { edge: Edge::Max, .. })));
    }

    #[test]
    fn degenerate_punishment_is_flagged() {
        let core = CoreParams::new(5, 12.0, 1.0, 1.0, 2.0, 0.5, 0.0, 1.4).unwrap();
        match classify_regime(&ipgg(core)) {
            Err(AnalysisError::Degenerate { q, regime }) => {
                assert!((q - (2.0 / 5.0 - 1.0)).abs() < 1e-15);
                assert_eq!(regime, Regime::DefectionDominant);
            }
            other => panic!("unexpected {other:?}"),
        }
        let core = core.with_f(6.0).unwrap();
        assert!(matches!(
            classify_regime(&ipgg(core)),
            Err(AnalysisError::Degenerate { regime: Regime::CooperationDominant, .. })
        ));
    }

    #[test]
    fn rest_point_stability() {
        let m = ipgg(presets::fig1a());
        assert_eq!(stability_at(&m, 0.0).unwrap(), Stability::Stable);
        assert_eq!(stability_at(&m, 1.0).unwrap(), Stability::Unstable);

        let m = ipgg(presets::fig1b());
        let x = interior_root(&m).unwrap();
        assert_eq!(stability_at(&m, x).unwrap(), Stability::Unstable);
        assert_eq!(stability_at(&m, 0.0).unwrap(), Stability::Stable);
        assert_eq!(stability_at(&m, 1.0).unwrap(), Stability::Stable);

        let m = ipgg(presets::fig1c());
        assert_eq!(stability_at(&m, 0.0).unwrap(), Stability::Unstable);
        assert_eq!(stability_at(&m, 1.0).unwrap(), Stability::Stable);

        assert!(matches!(stability_at(&m, 0.5), Err(AnalysisError::NotEquilibrium { .. })));
    }

    #[test]
    fn regime_labels_agree_with_stability_at() {
        for m in [ipgg(presets::fig1a()), ipgg(presets::fig1b()), ipgg(presets::fig1c()), bg(presets::fig2b())] {
            let r = classify_regime(&m).unwrap();
            assert_eq!(r.stability_at_zero(), stability_at(&m, 0.0).unwrap());
            assert_eq!(r.stability_at_one(), stability_at(&m, 1.0).unwrap());
        }
    }
}
