//! Oracle-agreement battery behind the `verify` subcommand.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::analytic::{self, AnalysisError, Regime};
use crate::game::{BriberyParams, CoreParams, GroupComposition, Model, Strategy, ZeroCountRule};
use crate::oracle::{self, RngSeed};
use crate::presets;

use super::csv::{float, optional, CsvWriter};

pub const RANDOM_CASES: usize = 1000;
pub const CLASSIFICATION_CASES: usize = 10_000;
pub const X_GRID: usize = 11;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const Z_LIMIT: f64 = 4.0;

/// A parameter draw inside every invariant range, moderate magnitudes.
pub fn random_core(rng: &mut ChaCha8Rng) -> CoreParams {
    let n = rng.gen_range(2..=8);
    CoreParams::new(
        n,
        rng.gen_range(0.0..20.0),
        rng.gen_range(0.5..2.0),
        rng.gen_range(0.5..1.5),
        rng.gen_range(0.5..2.0 * f64::from(n)),
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.0..5.0),
    )
    .expect("draw respects invariants")
}

pub fn random_bribery(rng: &mut ChaCha8Rng) -> BriberyParams {
    let core = random_core(rng);
    let gamma = rng.gen_range(0.0..=1.0 - core.beta());
    BriberyParams::new(core, rng.gen_range(0.0..2.0), gamma, rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0))
        .expect("draw respects invariants")
}

pub fn random_model(rng: &mut ChaCha8Rng) -> Model {
    if rng.gen_bool(0.5) {
        Model::Ipgg(random_core(rng))
    } else {
        Model::Bribery(random_bribery(rng))
    }
}

/// Fixed Monte Carlo battery: 24 (model, focal, composition) cases,
/// including both one-sided compositions.
pub fn mc_battery() -> Vec<(String, Model, Strategy, GroupComposition)> {
    let mut cases = Vec::new();
    let full = [("fig1a", Model::Ipgg(presets::fig1a())), ("fig2a", Model::Bribery(presets::fig2a()))];
    for (name, model) in full {
        for comp in GroupComposition::all(5) {
            for s in Strategy::BOTH {
                cases.push((label(name, s, comp), model, s, comp));
            }
        }
    }
    let model = Model::Bribery(presets::fig2b());
    for comp in [GroupComposition::new(0, 4, 5), GroupComposition::new(4, 0, 5)] {
        let comp = comp.expect("valid composition");
        for s in Strategy::BOTH {
            cases.push((label("fig2b", s, comp), model, s, comp));
        }
    }
    cases
}

fn label(name: &str, s: Strategy, comp: GroupComposition) -> String {
    format!("{name}/{}/{}c{}d", s.label(), comp.cooperators(), comp.defectors())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub worst: f64,
    pub tolerance: f64,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn line(&self) -> String {
        format!(
            "suite={} cases={} failures={} worst={:.3e} tolerance={:e} {}",
            self.name,
            self.cases,
            self.failures,
            self.worst,
            self.tolerance,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

struct Suite {
    summary: SuiteSummary,
}

impl Suite {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            summary: SuiteSummary {
                name,
                cases: 0,
                failures: 0,
                worst: 0.0,
                tolerance,
            },
        }
    }

    fn check(&mut self, statistic: f64) -> bool {
        let s = &mut self.summary;
        s.cases += 1;
        let ok = statistic < s.tolerance;
        if !ok {
            s.failures += 1;
        }
        if statistic > s.worst || statistic.is_nan() {
            s.worst = statistic;
        }
        ok
    }

    fn finish(self, csv: &mut CsvWriter) -> SuiteSummary {
        let s = self.summary;
        csv.row(&[
            s.name.to_string(),
            format!("worst of {}", s.cases),
            String::new(),
            String::new(),
            float(s.worst),
            float(s.tolerance),
            s.passed().to_string(),
        ]);
        s
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub suites: Vec<SuiteSummary>,
    pub csv: String,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteSummary::passed)
    }
}

fn x_grid() -> impl Iterator<Item = f64> {
    (0..X_GRID).map(|i| i as f64 / (X_GRID - 1) as f64)
}

pub fn run(seed: u64, samples: u64, metadata: &[String]) -> VerifyOutcome {
    let mut csv = CsvWriter::new(metadata, &["suite", "case", "value", "reference", "statistic", "tolerance", "pass"]);
    let mut suites = Vec::new();
    let stream = |id: u64| RngSeed::new(seed, id).chunk_rng(0);

    // Closed-form averages against explicit binomial sums.
    let mut rng = stream(1);
    let mut cancel = Suite::new("closed_form_vs_binomial", CLOSED_FORM_TOL);
    let mut gap = Suite::new("zero_count_gap", IDENTITY_TOL);
    for _ in 0..RANDOM_CASES {
        let model = random_model(&mut rng);
        let x: f64 = rng.gen_range(0.0..=1.0);
        let s = if rng.gen_bool(0.5) { Strategy::Cooperate } else { Strategy::Defect };
        let closed = analytic::avg_payoff(&model, x, s).expect("x in range");
        let cancelled = analytic::binomial_avg_payoff(&model, x, s, ZeroCountRule::Cancel).expect("x in range");
        let vanished = analytic::binomial_avg_payoff(&model, x, s, ZeroCountRule::Vanish).expect("x in range");
        let expected_gap = analytic::zero_count_gap(&model, x, s).expect("x in range");
        cancel.check((closed - cancelled).abs());
        gap.check((vanished - closed - expected_gap).abs());
    }
    suites.push(cancel.finish(&mut csv));
    suites.push(gap.finish(&mut csv));

    let mut rng = stream(2);
    let mut offset = Suite::new("bribery_offset", IDENTITY_TOL);
    for _ in 0..RANDOM_CASES {
        let model = Model::Bribery(random_bribery(&mut rng));
        let plain = model.without_bribery();
        for x in x_grid() {
            let d = analytic::q_function(&model, x).expect("x in range") - analytic::q_function(&plain, x).expect("x in range");
            offset.check((d - model.bribery_offset()).abs());
        }
    }
    suites.push(offset.finish(&mut csv));

    let mut rng = stream(3);
    let mut gap_identity = Suite::new("threshold_gap", IDENTITY_TOL);
    for _ in 0..RANDOM_CASES {
        let bp = random_bribery(&mut rng);
        let core = bp.core();
        let n = f64::from(core.n());
        let expected = n * (n - 1.0) * core.punishment_strength() / core.c();
        for model in [Model::Ipgg(*core), Model::Bribery(bp)] {
            let th = analytic::thresholds(&model);
            gap_identity.check((th.f_max - th.f_min - expected).abs());
        }
    }
    suites.push(gap_identity.finish(&mut csv));

    // Regime from thresholds against the signs of Q at the boundaries, and
    // strict growth of Q on a grid.
    let mut rng = stream(4);
    let mut consistency = Suite::new("classification_consistency", 0.5);
    let mut skipped = 0;
    for _ in 0..CLASSIFICATION_CASES {
        let model = random_model(&mut rng);
        let regime = match analytic::classify_regime(&model) {
            Ok(r) => r,
            Err(AnalysisError::KnifeEdge { .. } | AnalysisError::Degenerate { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => panic!("unexpected classification error {e}"),
        };
        let q0 = analytic::q_function(&model, 0.0).expect("in range");
        let q1 = analytic::q_function(&model, 1.0).expect("in range");
        let signs_agree = match regime {
            Regime::DefectionDominant => q1 < 0.0,
            Regime::Bistable { x_star } => {
                q0 < 0.0 && q1 > 0.0 && analytic::q_function(&model, x_star).expect("in range").abs() < 1e-9
            }
            Regime::CooperationDominant => q0 > 0.0,
        };
        let increasing = x_grid()
            .map(|x| analytic::q_function(&model, x).expect("in range"))
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] > w[0]);
        consistency.check(if signs_agree && increasing { 0.0 } else { 1.0 });
    }
    let _ = skipped;
    suites.push(consistency.finish(&mut csv));

    // Event-level Monte Carlo against the per-group payoffs.
    let mut events = Suite::new("mc_event_payoffs", Z_LIMIT);
    for (i, (name, model, s, comp)) in mc_battery().into_iter().enumerate() {
        let est = oracle::estimate_expected_payoff(&model, s, comp, samples, RngSeed::new(seed, 1000 + i as u64))
            .expect("samples >= 2");
        let reference = model.payoff(s, comp);
        let z = est.z_score(reference);
        let ok = events.check(z);
        csv.row(&[
            events.summary.name.to_string(),
            name,
            float(est.mean),
            float(reference),
            float(z),
            float(Z_LIMIT),
            ok.to_string(),
        ]);
    }
    suites.push(events.finish(&mut csv));

    // Composition sampling against the binomial average of the same game.
    let mut averages = Suite::new("mc_population_averages", Z_LIMIT);
    let cases = [
        ("fig1b", Model::Ipgg(presets::fig1b()), 0.5),
        ("fig2a", Model::Bribery(presets::fig2a()), 0.3),
    ];
    for (i, (name, model, x)) in cases.into_iter().enumerate() {
        for (j, s) in Strategy::BOTH.into_iter().enumerate() {
            let id = 2000 + (2 * i + j) as u64;
            let est = oracle::estimate_avg_payoff(&model, x, s, samples, RngSeed::new(seed, id)).expect("valid inputs");
            let reference = analytic::binomial_avg_payoff(&model, x, s, ZeroCountRule::Vanish).expect("x in range");
            let z = est.z_score(reference);
            let ok = averages.check(z);
            csv.row(&[
                averages.summary.name.to_string(),
                format!("{name}/{}/x={x}", s.label()),
                float(est.mean),
                optional(Some(reference)),
                float(z),
                float(Z_LIMIT),
                ok.to_string(),
            ]);
        }
    }
    suites.push(averages.finish(&mut csv));

    VerifyOutcome {
        suites,
        csv: csv.finish(),
    }
}
