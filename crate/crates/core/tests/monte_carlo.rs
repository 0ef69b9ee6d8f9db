use ipgg::analytic;
use ipgg::game::{GroupComposition, Model, Strategy, ZeroCountRule};
use ipgg::oracle::{self, LeaderAction, RngSeed};
use ipgg::presets;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SAMPLES: u64 = 1_000_000;

fn comp(c: u32, d: u32) -> GroupComposition {
    GroupComposition::new(c, d, 5).unwrap()
}

#[test]
fn event_means_agree_with_closed_forms() {
    let cases = [
        (Model::Ipgg(presets::fig1a()), Strategy::Cooperate, comp(2, 2)),
        (Model::Ipgg(presets::fig1a()), Strategy::Defect, comp(4, 0)),
        (Model::Ipgg(presets::fig1a()), Strategy::Defect, comp(0, 4)),
        (Model::Bribery(presets::fig2a()), Strategy::Cooperate, comp(2, 2)),
        (Model::Bribery(presets::fig2a()), Strategy::Defect, comp(2, 2)),
        (Model::Bribery(presets::fig2a()), Strategy::Defect, comp(0, 4)),
    ];
    for (i, (m, s, c)) in cases.into_iter().enumerate() {
        let est = oracle::estimate_expected_payoff(&m, s, c, SAMPLES, RngSeed::new(42, i as u64)).unwrap();
        let z = est.z_score(m.payoff(s, c));
        assert!(z < 4.0, "{s:?} {c:?}: mean {} vs {} (z = {z})", est.mean, m.payoff(s, c));
    }
}

#[test]
fn population_averages_follow_the_vanishing_sum() {
    let m = Model::Ipgg(presets::fig1b());
    for (i, s) in Strategy::BOTH.into_iter().enumerate() {
        let est = oracle::estimate_avg_payoff(&m, 0.5, s, SAMPLES, RngSeed::new(42, 100 + i as u64)).unwrap();
        let vanish = analytic::binomial_avg_payoff(&m, 0.5, s, ZeroCountRule::Vanish).unwrap();
        assert!(est.z_score(vanish) < 4.0);
        // the closed form sits exactly one zero-count gap below the sampled mean
        let closed = analytic::avg_payoff(&m, 0.5, s).unwrap();
        let gap = analytic::zero_count_gap(&m, 0.5, s).unwrap();
        assert!((vanish - closed - gap).abs() < 1e-12);
        assert!((est.mean - gap - closed).abs() < 4.0 * est.std_error);
    }
}

#[test]
fn sampled_drift_has_the_sign_of_q() {
    let m = Model::Bribery(presets::fig2a());
    let x = 0.3;
    let c = oracle::estimate_avg_payoff(&m, x, Strategy::Cooperate, SAMPLES, RngSeed::new(42, 200)).unwrap();
    let d = oracle::estimate_avg_payoff(&m, x, Strategy::Defect, SAMPLES, RngSeed::new(42, 201)).unwrap();
    let q = analytic::q_function(&m, x).unwrap();
    assert!((q - -0.7662696).abs() < 1e-12);
    let se = c.std_error.hypot(d.std_error);
    assert!(q.abs() > 4.0 * se);
    assert_eq!((c.mean - d.mean).signum(), q.signum());
}

#[test]
fn no_punishment_is_deterministic() {
    let core = presets::fig1a();
    let m = Model::Ipgg(ipgg::game::CoreParams::new(5, 12.0, 1.0, 1.0, 2.0, core.alpha(), 0.0, core.r_p()).unwrap());
    let est = oracle::estimate_expected_payoff(&m, Strategy::Cooperate, comp(4, 0), 1000, RngSeed::new(1, 1)).unwrap();
    assert_eq!(est.std_error, 0.0);
    assert_eq!(est.mean, 12.0 + 2.0 - 1.0 - 1.0);
    let at_zero = oracle::estimate_avg_payoff(&m, 0.0, Strategy::Cooperate, 1000, RngSeed::new(1, 2)).unwrap();
    assert_eq!(at_zero.std_error, 0.0);
    assert_eq!(at_zero.mean, m.payoff(Strategy::Cooperate, comp(0, 4)));
}

#[test]
fn single_events_conserve_money() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for m in [Model::Bribery(presets::fig2b()), Model::Ipgg(presets::fig1c()), Model::Bribery(presets::fig2a())] {
        let core = *m.core();
        let budget = f64::from(core.n()) * core.tau() * core.r_p();
        for c in GroupComposition::all(5) {
            for s in Strategy::BOTH {
                for _ in 0..200 {
                    let g = oracle::realize_group(&m, s, c, &mut rng);
                    let paid: f64 = g.bribes_paid.iter().sum();
                    let received = g.bribes_received;
                    assert!((paid - received).abs() < 1e-12);
                    if g.action == LeaderAction::Punish {
                        let non_leader = |want: Strategy| {
                            g.strategies.iter().enumerate().any(|(i, &x)| i != g.leader && x == want)
                        };
                        let expected = budget
                            * (core.alpha() * f64::from(u8::from(non_leader(Strategy::Cooperate)))
                                + (1.0 - core.alpha()) * f64::from(u8::from(non_leader(Strategy::Defect))));
                        let fines: f64 = g.fines.iter().sum();
                        assert!((fines - expected).abs() < 1e-9 * (1.0 + expected));
                    }
                }
            }
        }
    }
}
