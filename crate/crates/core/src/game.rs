//! Model parameters and per-group expected payoffs.
//!
//! A group of `N` players is sampled from the population. Everyone pays the
//! tax `tau`, cooperators contribute `c`, and the pooled contributions are
//! multiplied by `F` and split evenly. One member is drawn as leader. The
//! leader punishes with probability `beta`, spending `N * tau * r_p` on
//! fines (fraction `alpha` shared among the non-leader cooperators, the rest
//! among the non-leader defectors). In the bribery variant the leader may
//! instead accept bribes (probability `gamma`); each non-leader offers `h`
//! with probability `p` (cooperators) or `q` (defectors).

use std::fmt;

use thiserror::Error;

/// Violated parameter invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("group size n must be at least 2 (got {0})")]
    GroupSize(u32),
    #[error("{name} must be finite (got {value})")]
    NotFinite { name: &'static str, value: f64 },
    #[error("{name} must be > 0 (got {value})")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be >= 0 (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must lie in [0, 1] (got {value})")]
    NotProbability { name: &'static str, value: f64 },
    #[error("beta + gamma must not exceed 1 (got {beta} + {gamma})")]
    LeaderActions { beta: f64, gamma: f64 },
    #[error("composition ({n_c}, {n_d}) does not sum to n - 1 = {expected}")]
    Composition { n_c: u32, n_d: u32, expected: u32 },
}

/// Non-fatal observation about a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamWarning {
    /// `F` outside the social-dilemma window `(1, N)`.
    PoolMultiplierOutsideDilemma { f: f64, n: u32 },
}

impl fmt::Display for ParamWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamWarning::PoolMultiplierOutsideDilemma { f: pool, n } => {
                write!(f, "pool multiplier f = {pool} lies outside (1, n = {n})")
            }
        }
    }
}

fn finite(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::NotFinite { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if finite(name, value)? < 0.0 {
        Err(ParamError::Negative { name, value })
    } else {
        Ok(value)
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if finite(name, value)? <= 0.0 {
        Err(ParamError::NotPositive { name, value })
    } else {
        Ok(value)
    }
}

fn probability(name: &'static str, value: f64) -> Result<f64, ParamError> {
    if !(0.0..=1.0).contains(&finite(name, value)?) {
        Err(ParamError::NotProbability { name, value })
    } else {
        Ok(value)
    }
}

/// Constants of the institutional-punishment game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreParams {
    n: u32,
    b: f64,
    c: f64,
    tau: f64,
    f: f64,
    alpha: f64,
    beta: f64,
    r_p: f64,
}

impl CoreParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: u32,
        b: f64,
        c: f64,
        tau: f64,
        f: f64,
        alpha: f64,
        beta: f64,
        r_p: f64,
    ) -> Result<Self, ParamError> {
        if n < 2 {
            return Err(ParamError::GroupSize(n));
        }
        Ok(Self {
            n,
            b: non_negative("b", b)?,
            c: positive("c", c)?,
            tau: non_negative("tau", tau)?,
            f: positive("f", f)?,
            alpha: probability("alpha", alpha)?,
            beta: probability("beta", beta)?,
            r_p: non_negative("r_p", r_p)?,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn f(&self) -> f64 {
        self.f
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn r_p(&self) -> f64 {
        self.r_p
    }

    pub fn with_f(&self, f: f64) -> Result<Self, ParamError> {
        Ok(Self {
            f: positive("f", f)?,
            ..*self
        })
    }

    pub fn with_r_p(&self, r_p: f64) -> Result<Self, ParamError> {
        Ok(Self {
            r_p: non_negative("r_p", r_p)?,
            ..*self
        })
    }

    pub fn with_b(&self, b: f64) -> Result<Self, ParamError> {
        Ok(Self {
            b: non_negative("b", b)?,
            ..*self
        })
    }

    /// Fine budget `N * tau * r_p`.
    pub fn fine_budget(&self) -> f64 {
        f64::from(self.n) * self.tau * self.r_p
    }

    /// `beta * tau * r_p`; zero means punishment never bites.
    pub fn punishment_strength(&self) -> f64 {
        self.beta * self.tau * self.r_p
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        let mut out = Vec::new();
        if !(self.f > 1.0 && self.f < f64::from(self.n)) {
            out.push(ParamWarning::PoolMultiplierOutsideDilemma {
                f: self.f,
                n: self.n,
            });
        }
        out
    }
}

/// Institutional-punishment constants plus the bribery channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BriberyParams {
    core: CoreParams,
    h: f64,
    gamma: f64,
    p: f64,
    q: f64,
}

impl BriberyParams {
    pub fn new(core: CoreParams, h: f64, gamma: f64, p: f64, q: f64) -> Result<Self, ParamError> {
        let gamma = probability("gamma", gamma)?;
        if core.beta + gamma > 1.0 {
            return Err(ParamError::LeaderActions {
                beta: core.beta,
                gamma,
            });
        }
        Ok(Self {
            core,
            h: non_negative("h", h)?,
            gamma,
            p: probability("p", p)?,
            q: probability("q", q)?,
        })
    }

    pub fn core(&self) -> &CoreParams {
        &self.core
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }

    fn with_core(&self, core: CoreParams) -> Self {
        Self { core, ..*self }
    }
}

/// Strategies of the focal player among the co-players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupComposition {
    n_c: u32,
    n_d: u32,
}

impl GroupComposition {
    /// `n_c` cooperators and `n_d` defectors among the focal player's `n - 1` co-players.
    pub fn new(n_c: u32, n_d: u32, n: u32) -> Result<Self, ParamError> {
        if n < 2 {
            return Err(ParamError::GroupSize(n));
        }
        if n_c.checked_add(n_d) != Some(n - 1) {
            return Err(ParamError::Composition {
                n_c,
                n_d,
                expected: n - 1,
            });
        }
        Ok(Self { n_c, n_d })
    }

    pub fn cooperators(&self) -> u32 {
        self.n_c
    }
    pub fn defectors(&self) -> u32 {
        self.n_d
    }

    /// Every composition for a group of `n`, ordered by cooperator count.
    pub fn all(n: u32) -> impl Iterator<Item = GroupComposition> {
        (0..n).map(move |n_c| GroupComposition {
            n_c,
            n_d: n - 1 - n_c,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Cooperate,
    Defect,
}

impl Strategy {
    pub const BOTH: [Strategy; 2] = [Strategy::Cooperate, Strategy::Defect];

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Cooperate => "C",
            Strategy::Defect => "D",
        }
    }
}

/// How the "leader of my own type" fine summand is read when the focal
/// player has no co-player of its own type.
///
/// The summand is written `n/(N-1) * X/n`. `Vanish` sets it to zero when
/// `n = 0` (no such leader can be drawn); this is the expectation of the
/// event-level game. `Cancel` cancels `n` algebraically and keeps `X/(N-1)`
/// for every `n`; the closed-form population averages are exact binomial
/// averages under this reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroCountRule {
    #[default]
    Vanish,
    Cancel,
}

/// Which game is being played.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Ipgg(CoreParams),
    Bribery(BriberyParams),
}

impl Model {
    pub fn core(&self) -> &CoreParams {
        match self {
            Model::Ipgg(core) => core,
            Model::Bribery(params) => params.core(),
        }
    }

    pub fn n(&self) -> u32 {
        self.core().n
    }

    pub fn bribery(&self) -> Option<&BriberyParams> {
        match self {
            Model::Ipgg(_) => None,
            Model::Bribery(params) => Some(params),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Ipgg(_) => "ipgg",
            Model::Bribery(_) => "bg",
        }
    }

    fn map_core(
        &self,
        update: impl FnOnce(&CoreParams) -> Result<CoreParams, ParamError>,
    ) -> Result<Model, ParamError> {
        Ok(match self {
            Model::Ipgg(core) => Model::Ipgg(update(core)?),
            Model::Bribery(params) => Model::Bribery(params.with_core(update(params.core())?)),
        })
    }

    pub fn with_f(&self, f: f64) -> Result<Model, ParamError> {
        self.map_core(|core| core.with_f(f))
    }

    pub fn with_r_p(&self, r_p: f64) -> Result<Model, ParamError> {
        self.map_core(|core| core.with_r_p(r_p))
    }

    pub fn with_b(&self, b: f64) -> Result<Model, ParamError> {
        self.map_core(|core| core.with_b(b))
    }

    /// The same core game with the bribery channel removed.
    pub fn without_bribery(&self) -> Model {
        Model::Ipgg(*self.core())
    }

    /// `(N-1) * gamma * h * (q - p) / N`: the constant the bribery channel
    /// adds to the payoff difference. Zero for the plain game.
    pub fn bribery_offset(&self) -> f64 {
        match self {
            Model::Ipgg(_) => 0.0,
            Model::Bribery(bp) => {
                let n = f64::from(bp.core.n);
                (n - 1.0) * bp.gamma * bp.h * (bp.q - bp.p) / n
            }
        }
    }

    pub fn warnings(&self) -> Vec<ParamWarning> {
        self.core().warnings()
    }

    /// Expected payoff of a focal player (vanishing zero-count rule).
    pub fn payoff(&self, focal: Strategy, comp: GroupComposition) -> f64 {
        self.payoff_with(focal, comp, ZeroCountRule::Vanish)
    }

    pub fn payoff_with(&self, focal: Strategy, comp: GroupComposition, rule: ZeroCountRule) -> f64 {
        let core = self.core();
        let n = f64::from(core.n);
        let n_c = f64::from(comp.n_c);
        let not_leader = 1.0 - 1.0 / n;

        let (base, fines) = match focal {
            Strategy::Cooperate => (
                core.b + core.f * core.c * (n_c + 1.0) / n - core.c - core.tau,
                cooperator_fines(core, comp, rule),
            ),
            Strategy::Defect => (
                core.b + core.f * core.c * n_c / n - core.tau,
                defector_fines(core, comp, rule),
            ),
        };

        match self {
            Model::Ipgg(_) => base - not_leader * fines,
            Model::Bribery(bp) => {
                let receipts = (bp.p * bp.gamma * bp.h * n_c
                    + bp.q * bp.h * f64::from(comp.n_d) * bp.gamma)
                    / n;
                let offer = match focal {
                    Strategy::Cooperate => bp.p,
                    Strategy::Defect => bp.q,
                };
                let bribe = offer * bp.h * bp.gamma;
                base + receipts - not_leader * (bribe + fines)
            }
        }
    }
}

/// Bracketed fine term of a focal cooperator, before the `1 - 1/N` factor.
fn cooperator_fines(core: &CoreParams, comp: GroupComposition, rule: ZeroCountRule) -> f64 {
    let pot = core.beta * core.alpha * core.fine_budget();
    same_and_other_type_fines(core.n, pot, comp.n_c, comp.n_d, rule)
}

/// Bracketed fine term of a focal defector, before the `1 - 1/N` factor.
fn defector_fines(core: &CoreParams, comp: GroupComposition, rule: ZeroCountRule) -> f64 {
    let pot = core.beta * (1.0 - core.alpha) * core.fine_budget();
    same_and_other_type_fines(core.n, pot, comp.n_d, comp.n_c, rule)
}

// `own`/`other` count co-players of the focal's type and of the opposite type.
// Leader of own type: `own` non-leaders share the pot (the focal included).
// Leader of the other type: `own + 1` non-leaders share it.
fn same_and_other_type_fines(n: u32, pot: f64, own: u32, other: u32, rule: ZeroCountRule) -> f64 {
    let co_players = f64::from(n - 1);
    let own_leader = if own > 0 || rule == ZeroCountRule::Cancel {
        pot / co_players
    } else {
        0.0
    };
    let other_leader = f64::from(other) / co_players * pot / (f64::from(own) + 1.0);
    own_leader + other_leader
}

pub fn payoff_c_ipgg(params: &CoreParams, comp: GroupComposition) -> f64 {
    Model::Ipgg(*params).payoff(Strategy::Cooperate, comp)
}

pub fn payoff_d_ipgg(params: &CoreParams, comp: GroupComposition) -> f64 {
    Model::Ipgg(*params).payoff(Strategy::Defect, comp)
}

pub fn payoff_c_bg(params: &BriberyParams, comp: GroupComposition) -> f64 {
    Model::Bribery(*params).payoff(Strategy::Cooperate, comp)
}

pub fn payoff_d_bg(params: &BriberyParams, comp: GroupComposition) -> f64 {
    Model::Bribery(*params).payoff(Strategy::Defect, comp)
}
