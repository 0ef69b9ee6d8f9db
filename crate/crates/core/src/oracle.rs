//! Event-level Monte Carlo realization of the games.
//!
//! Each sample plays one round literally: draw the leader, draw the leader's
//! action, draw bribe offers, levy fines. Sample means estimate the expected
//! payoffs in [`crate::game`] without going through their algebra.
//!
//! Samples are generated in fixed-size chunks. Chunk `j` of seed
//! `(master_seed, stream_id)` reads ChaCha8 stream `j` under a key built
//! from the seed, so the sample sequence does not depend on how chunks are
//! spread over worker threads. Chunk statistics are merged in chunk order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::dynamics::Trajectory;
use crate::game::{GroupComposition, Model, Strategy};

/// Samples per chunk.
pub const CHUNK_SIZE: u64 = 1 << 16;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("need at least 2 samples (got {0})")]
    SampleCount(u64),
    #[error("fraction {0} lies outside [0, 1]")]
    Fraction(f64),
    #[error("population of {size} is smaller than 2N = {min}")]
    Population { size: u64, min: u64 },
    #[error("imitation strength must be finite and >= 0 (got {0})")]
    ImitationStrength(f64),
}

/// Identifies an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn with_stream(&self, stream_id: u64) -> Self {
        Self { stream_id, ..*self }
    }

    /// Generator for chunk `chunk` of this stream.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(chunk);
        rng
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl Estimate {
    /// `|mean - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.mean - reference).abs();
        if self.std_error == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / self.std_error
        }
    }
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / count as f64;
        Welford {
            count,
            mean: self.mean + delta * weight,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * weight,
        }
    }

    fn estimate(&self) -> Estimate {
        let n = self.count as f64;
        let variance = if self.count > 1 { self.m2 / (n - 1.0) } else { 0.0 };
        Estimate {
            mean: self.mean,
            std_error: (variance / n).sqrt(),
            n_samples: self.count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeaderAction {
    Punish,
    AcceptBribes,
    Idle,
}

/// Every player's side of one realized round.
///
/// Player 0 is the focal player, players `1..=n_c` cooperate and the rest
/// defect.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRealization {
    pub leader: usize,
    pub action: LeaderAction,
    pub strategies: Vec<Strategy>,
    pub offered: Vec<bool>,
    pub fines: Vec<f64>,
    pub bribes_paid: Vec<f64>,
    pub bribes_received: f64,
    pub payoffs: Vec<f64>,
}

fn strategy_of(index: usize, focal: Strategy, comp: GroupComposition) -> Strategy {
    if index == 0 {
        focal
    } else if index <= comp.cooperators() as usize {
        Strategy::Cooperate
    } else {
        Strategy::Defect
    }
}

fn draw_leader_and_action<R: Rng>(model: &Model, rng: &mut R) -> (usize, LeaderAction) {
    let leader = rng.gen_range(0..model.n() as usize);
    let u: f64 = rng.gen();
    let beta = model.core().beta();
    let action = if u < beta {
        LeaderAction::Punish
    } else if model.bribery().is_some_and(|bp| u < beta + bp.gamma()) {
        LeaderAction::AcceptBribes
    } else {
        LeaderAction::Idle
    };
    (leader, action)
}

fn offer_probability(model: &Model, strategy: Strategy) -> f64 {
    match (model.bribery(), strategy) {
        (None, _) => 0.0,
        (Some(bp), Strategy::Cooperate) => bp.p(),
        (Some(bp), Strategy::Defect) => bp.q(),
    }
}

fn cooperators_in_group(focal: Strategy, comp: GroupComposition) -> u32 {
    comp.cooperators() + u32::from(focal == Strategy::Cooperate)
}

/// Payoff before fines and bribes: endowment, contribution, share, tax.
fn gross_payoff(model: &Model, own: Strategy, cooperators: u32) -> f64 {
    let core = model.core();
    let contribution = if own == Strategy::Cooperate { core.c() } else { 0.0 };
    core.b() + core.f() * core.c() * f64::from(cooperators) / f64::from(core.n()) - contribution - core.tau()
}

/// Fine on one non-leader of type `own` when `own_non_leaders` of that type
/// are not leading.
fn fine_share(model: &Model, own: Strategy, own_non_leaders: u32) -> f64 {
    if own_non_leaders == 0 {
        return 0.0;
    }
    let core = model.core();
    let share = match own {
        Strategy::Cooperate => core.alpha(),
        Strategy::Defect => 1.0 - core.alpha(),
    };
    share * core.fine_budget() / f64::from(own_non_leaders)
}

/// Plays one full round and returns every player's accounting.
pub fn realize_group<R: Rng>(model: &Model, focal: Strategy, comp: GroupComposition, rng: &mut R) -> GroupRealization {
    let n = model.n() as usize;
    let strategies: Vec<Strategy> = (0..n).map(|i| strategy_of(i, focal, comp)).collect();
    let (leader, action) = draw_leader_and_action(model, rng);

    let mut offered = vec![false; n];
    if action == LeaderAction::AcceptBribes {
        for i in (0..n).filter(|&i| i != leader) {
            offered[i] = rng.gen::<f64>() < offer_probability(model, strategies[i]);
        }
    }

    let cooperators = cooperators_in_group(focal, comp);
    let leader_cooperates = u32::from(strategies[leader] == Strategy::Cooperate);
    let non_leader_c = cooperators - leader_cooperates;
    let non_leader_d = (model.n() - cooperators) - (1 - leader_cooperates);

    let h = model.bribery().map_or(0.0, |bp| bp.h());
    let mut fines = vec![0.0; n];
    let mut bribes_paid = vec![0.0; n];
    let mut payoffs = Vec::with_capacity(n);
    for i in 0..n {
        if i != leader {
            if action == LeaderAction::Punish {
                let own_count = match strategies[i] {
                    Strategy::Cooperate => non_leader_c,
                    Strategy::Defect => non_leader_d,
                };
                fines[i] = fine_share(model, strategies[i], own_count);
            }
            if offered[i] {
                bribes_paid[i] = h;
            }
        }
        payoffs.push(gross_payoff(model, strategies[i], cooperators) - fines[i] - bribes_paid[i]);
    }
    let bribes_received = h * offered.iter().filter(|&&o| o).count() as f64;
    payoffs[leader] += bribes_received;

    GroupRealization {
        leader,
        action,
        strategies,
        offered,
        fines,
        bribes_paid,
        bribes_received,
        payoffs,
    }
}

/// Focal player's payoff in one round; consumes the generator exactly as
/// [`realize_group`] does.
fn draw_focal_payoff<R: Rng>(model: &Model, focal: Strategy, comp: GroupComposition, rng: &mut R) -> f64 {
    let n = model.n() as usize;
    let (leader, action) = draw_leader_and_action(model, rng);
    let cooperators = cooperators_in_group(focal, comp);
    let mut payoff = gross_payoff(model, focal, cooperators);

    match action {
        LeaderAction::Idle => {}
        LeaderAction::Punish => {
            if leader != 0 {
                let leader_strategy = strategy_of(leader, focal, comp);
                let own_non_leaders = match focal {
                    Strategy::Cooperate => cooperators,
                    Strategy::Defect => model.n() - cooperators,
                } - u32::from(leader_strategy == focal);
                payoff -= fine_share(model, focal, own_non_leaders);
            }
        }
        LeaderAction::AcceptBribes => {
            let h = model.bribery().map_or(0.0, |bp| bp.h());
            for i in (0..n).filter(|&i| i != leader) {
                let offers = rng.gen::<f64>() < offer_probability(model, strategy_of(i, focal, comp));
                if offers {
                    if leader == 0 {
                        payoff += h;
                    } else if i == 0 {
                        payoff -= h;
                    }
                }
            }
        }
    }
    payoff
}

fn draw_composition<R: Rng>(n: u32, x: f64, rng: &mut R) -> GroupComposition {
    let n_c = (0..n - 1).filter(|_| rng.gen::<f64>() < x).count() as u32;
    GroupComposition::new(n_c, n - 1 - n_c, n).expect("counts sum to n - 1")
}

/// One stochastic realization of the focal player's payoff.
pub fn sample_event_payoff(model: &Model, focal: Strategy, comp: GroupComposition, seed: RngSeed) -> f64 {
    draw_focal_payoff(model, focal, comp, &mut seed.chunk_rng(0))
}

fn chunk_lengths(n: u64) -> impl Iterator<Item = (u64, u64)> {
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks).map(move |j| (j, CHUNK_SIZE.min(n - j * CHUNK_SIZE)))
}

fn chunked_estimate<F>(n: u64, seed: RngSeed, draw: F) -> Estimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let parts: Vec<Welford> = chunk_lengths(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(j, len)| {
            let mut rng = seed.chunk_rng(j);
            let mut acc = Welford::default();
            for _ in 0..len {
                acc.push(draw(&mut rng));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(Welford::default(), Welford::merge).estimate()
}

/// The first `n` event payoffs of a stream, in the order the estimators use them.
pub fn event_payoffs(model: &Model, focal: Strategy, comp: GroupComposition, n: u64, seed: RngSeed) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize);
    for (j, len) in chunk_lengths(n) {
        let mut rng = seed.chunk_rng(j);
        out.extend((0..len).map(|_| draw_focal_payoff(model, focal, comp, &mut rng)));
    }
    out
}

/// Sample mean of `n` event payoffs; estimates the per-group expected payoff.
pub fn estimate_expected_payoff(
    model: &Model,
    focal: Strategy,
    comp: GroupComposition,
    n: u64,
    seed: RngSeed,
) -> Result<Estimate, OracleError> {
    if n < 2 {
        return Err(OracleError::SampleCount(n));
    }
    Ok(chunked_estimate(n, seed, |rng| draw_focal_payoff(model, focal, comp, rng)))
}

/// Draws binomial co-player compositions, then one event each; estimates
/// the population average payoff of `strategy` at fraction `x`.
pub fn estimate_avg_payoff(
    model: &Model,
    x: f64,
    strategy: Strategy,
    n: u64,
    seed: RngSeed,
) -> Result<Estimate, OracleError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(OracleError::Fraction(x));
    }
    if n < 2 {
        return Err(OracleError::SampleCount(n));
    }
    Ok(chunked_estimate(n, seed, |rng| {
        let comp = draw_composition(model.n(), x, rng);
        draw_focal_payoff(model, strategy, comp, rng)
    }))
}

/// Co-players of one individual, drawn without replacement from the rest of
/// the population.
fn sample_group<R: Rng>(n: u32, own: Strategy, cooperators: u64, size: u64, rng: &mut R) -> GroupComposition {
    let mut pool_c = cooperators - u64::from(own == Strategy::Cooperate);
    let mut pool = size - 1;
    let mut n_c = 0;
    for _ in 0..n - 1 {
        if rng.gen_range(0..pool) < pool_c {
            n_c += 1;
            pool_c -= 1;
        }
        pool -= 1;
    }
    GroupComposition::new(n_c, n - 1 - n_c, n).expect("counts sum to n - 1")
}

/// Finite well-mixed population under pairwise-comparison imitation.
///
/// Each update picks a focal individual and a role model. Both play one
/// freshly sampled group and earn its expected payoff; the focal adopts the
/// model's strategy with probability `1 / (1 + exp(-s (pi_model - pi_focal)))`.
/// A round is `population_size` updates. `states[r]` is the cooperator
/// fraction after round `r`; the run stops early once a strategy is extinct.
pub fn evolve_finite_population(
    model: &Model,
    population_size: u64,
    x0: f64,
    rounds: u64,
    imitation_strength: f64,
    seed: RngSeed,
) -> Result<Trajectory, OracleError> {
    let min = 2 * u64::from(model.n());
    if population_size < min {
        return Err(OracleError::Population { size: population_size, min });
    }
    if !(0.0..=1.0).contains(&x0) {
        return Err(OracleError::Fraction(x0));
    }
    if !(imitation_strength.is_finite() && imitation_strength >= 0.0) {
        return Err(OracleError::ImitationStrength(imitation_strength));
    }

    let size = population_size;
    let mut rng = seed.chunk_rng(0);
    let mut cooperators = ((x0 * size as f64).round() as u64).min(size);
    let fraction = |c: u64| c as f64 / size as f64;
    let mut times = vec![0.0];
    let mut states = vec![fraction(cooperators)];

    for round in 1..=rounds {
        if cooperators == 0 || cooperators == size {
            break;
        }
        for _ in 0..size {
            let focal_c = rng.gen_range(0..size) < cooperators;
            let focal = if focal_c { Strategy::Cooperate } else { Strategy::Defect };
            let remaining_c = cooperators - u64::from(focal_c);
            let role_c = rng.gen_range(0..size - 1) < remaining_c;
            let role = if role_c { Strategy::Cooperate } else { Strategy::Defect };
            if focal == role {
                continue;
            }
            let pi_focal = model.payoff(focal, sample_group(model.n(), focal, cooperators, size, &mut rng));
            let pi_role = model.payoff(role, sample_group(model.n(), role, cooperators, size, &mut rng));
            let adopt = 1.0 / (1.0 + (-imitation_strength * (pi_role - pi_focal)).exp());
            if rng.gen::<f64>() < adopt {
                if role_c {
                    cooperators += 1;
                } else {
                    cooperators -= 1;
                }
            }
        }
        times.push(round as f64);
        states.push(fraction(cooperators));
    }

    let converged_to = match cooperators {
        0 => Some(0.0),
        c if c == size => Some(1.0),
        _ => None,
    };
    Ok(Trajectory {
        times,
        states,
        converged_to,
        step_size: 1.0,
    })
}
