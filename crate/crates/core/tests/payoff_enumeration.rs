//! Per-group payoffs against exact enumeration of the event protocol:
//! every leader, every leader action, every pattern of bribe offers.

use ipgg::game::{BriberyParams, CoreParams, GroupComposition, Model, Strategy, ZeroCountRule};
use ipgg::presets;
use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use proptest::strategy::Strategy as Gen;

#[derive(Clone, Copy)]
struct Raw {
    n: usize,
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
}

fn raw(model: &Model) -> Raw {
    let core = model.core();
    let (h, gamma, p, q) = match model.bribery() {
        Some(bp) => (bp.h(), bp.gamma(), bp.p(), bp.q()),
        None => (0.0, 0.0, 0.0, 0.0),
    };
    Raw {
        n: core.n() as usize,
        b: core.b(),
        c: core.c(),
        tau: core.tau(),
        f: core.f(),
        alpha: core.alpha(),
        beta: core.beta(),
        r_p: core.r_p(),
        h,
        gamma,
        p,
        q,
    }
}

/// Exact expected payoff of player 0 by summing over all outcomes.
fn enumerate(g: Raw, focal: Strategy, n_c: usize, n_d: usize) -> f64 {
    let mut coop = vec![focal == Strategy::Cooperate];
    coop.extend(std::iter::repeat_n(true, n_c));
    coop.extend(std::iter::repeat_n(false, n_d));
    assert_eq!(coop.len(), g.n);
    let cooperators = coop.iter().filter(|&&c| c).count() as f64;
    let base = g.b + g.f * g.c * cooperators / g.n as f64 - if coop[0] { g.c } else { 0.0 } - g.tau;
    let budget = g.n as f64 * g.tau * g.r_p;

    let mut total = 0.0;
    for leader in 0..g.n {
        let others: Vec<usize> = (0..g.n).filter(|&i| i != leader).collect();
        let actions = [("punish", g.beta), ("accept", g.gamma), ("idle", 1.0 - g.beta - g.gamma)];
        for (action, p_action) in actions {
            if p_action == 0.0 {
                continue;
            }
            for mask in 0u32..(1 << others.len()) {
                let mut pr = p_action / g.n as f64;
                for (k, &i) in others.iter().enumerate() {
                    let p_offer = if coop[i] { g.p } else { g.q };
                    pr *= if mask >> k & 1 == 1 { p_offer } else { 1.0 - p_offer };
                }
                if pr == 0.0 {
                    continue;
                }
                let mut pay = base;
                match action {
                    "punish" if leader != 0 => {
                        let same = others.iter().filter(|&&i| coop[i] == coop[0]).count() as f64;
                        let share = if coop[0] { g.alpha } else { 1.0 - g.alpha };
                        pay -= share * budget / same;
                    }
                    "accept" if leader == 0 => pay += g.h * mask.count_ones() as f64,
                    "accept" => {
                        let k = others.iter().position(|&i| i == 0).unwrap();
                        if mask >> k & 1 == 1 {
                            pay -= g.h;
                        }
                    }
                    _ => {}
                }
                total += pr * pay;
            }
        }
    }
    total
}

fn check_all_compositions(model: &Model) {
    let g = raw(model);
    for comp in GroupComposition::all(model.n()) {
        for s in Strategy::BOTH {
            let expected = enumerate(g, s, comp.cooperators() as usize, comp.defectors() as usize);
            let got = model.payoff(s, comp);
            assert!(
                (got - expected).abs() <= 1e-11 * (1.0 + expected.abs()),
                "{model:?} {s:?} {comp:?}: {got} vs enumeration {expected}"
            );
        }
    }
}

#[test]
fn figure_parameter_sets_match_enumeration() {
    for m in [
        Model::Ipgg(presets::fig1a()),
        Model::Ipgg(presets::fig1b()),
        Model::Ipgg(presets::fig1c()),
        Model::Bribery(presets::fig2a()),
        Model::Bribery(presets::fig2b()),
        Model::Bribery(presets::fig2c()),
    ] {
        check_all_compositions(&m);
    }
}

#[test]
fn frozen_reference_values() {
    let comp = |c, d| GroupComposition::new(c, d, 5).unwrap();
    let ipgg = Model::Ipgg(presets::fig1a());
    let bg = Model::Bribery(presets::fig2a());
    let cases = [
        (ipgg, Strategy::Cooperate, comp(2, 2), 10.966666666666667),
        (ipgg, Strategy::Defect, comp(4, 0), 12.04),
        (ipgg, Strategy::Defect, comp(0, 4), 10.86),
        (ipgg, Strategy::Cooperate, comp(0, 4), 9.84),
        (bg, Strategy::Cooperate, comp(2, 2), 10.74),
        (bg, Strategy::Defect, comp(0, 4), 10.888),
        (bg, Strategy::Defect, comp(2, 2), 11.293333333333333),
    ];
    for (m, s, c, v) in cases {
        assert!((m.payoff(s, c) - v).abs() < 1e-12, "{s:?} {c:?}: {}", m.payoff(s, c));
    }
}

#[test]
fn cancel_rule_differs_only_at_empty_classes() {
    let m = Model::Bribery(presets::fig2a());
    for comp in GroupComposition::all(5) {
        for s in Strategy::BOTH {
            let vanish = m.payoff_with(s, comp, ZeroCountRule::Vanish);
            let cancel = m.payoff_with(s, comp, ZeroCountRule::Cancel);
            let own_class_empty = match s {
                Strategy::Cooperate => comp.cooperators() == 0,
                Strategy::Defect => comp.defectors() == 0,
            };
            if own_class_empty {
                assert!(cancel < vanish);
            } else {
                assert_eq!(cancel, vanish);
            }
        }
    }
}

fn arb_model() -> impl Gen<Value = Model> {
    (
        2u32..=7,
        0.0..20.0f64,
        0.1..3.0f64,
        0.0..2.0f64,
        0.05..1.0f64,
        0.0..=1.0f64,
        0.0..=1.0f64,
        0.0..6.0f64,
        (0.0..3.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, any::<bool>()),
    )
        .prop_map(|(n, b, c, tau, f_frac, alpha, beta, r_p, (h, g_frac, p, q, bribery))| {
            let f = f_frac * 2.0 * f64::from(n);
            let core = CoreParams::new(n, b, c, tau, f, alpha, beta, r_p).unwrap();
            if bribery {
                Model::Bribery(BriberyParams::new(core, h, g_frac * (1.0 - beta), p, q).unwrap())
            } else {
                Model::Ipgg(core)
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_models_match_enumeration(m in arb_model()) {
        check_all_compositions(&m);
    }

    #[test]
    fn no_leader_actions_give_bare_dilemma(m in arb_model()) {
        let core = *m.core();
        let bare = Model::Ipgg(CoreParams::new(core.n(), core.b(), core.c(), core.tau(), core.f(), core.alpha(), 0.0, core.r_p()).unwrap());
        let n = f64::from(core.n());
        for comp in GroupComposition::all(core.n()) {
            let nc = f64::from(comp.cooperators());
            let pc = core.b() + core.f() * core.c() * (nc + 1.0) / n - core.c() - core.tau();
            let pd = core.b() + core.f() * core.c() * nc / n - core.tau();
            prop_assert!((bare.payoff(Strategy::Cooperate, comp) - pc).abs() < 1e-12 * (1.0 + pc.abs()));
            prop_assert!((bare.payoff(Strategy::Defect, comp) - pd).abs() < 1e-12 * (1.0 + pd.abs()));
            let gap = bare.payoff(Strategy::Defect, comp) - bare.payoff(Strategy::Cooperate, comp);
            prop_assert!((gap - (core.c() - core.f() * core.c() / n)).abs() < 1e-12 * (1.0 + pd.abs()));
        }
    }

    #[test]
    fn silent_bribery_is_bitwise_ipgg(m in arb_model(), h in 0.0..3.0f64, p in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let core = *m.core();
        let plain = Model::Ipgg(core);
        for bg in [
            Model::Bribery(BriberyParams::new(core, h, 0.0, p, q).unwrap()),
            Model::Bribery(BriberyParams::new(core, 0.0, 1.0 - core.beta(), p, q).unwrap()),
        ] {
            for comp in GroupComposition::all(core.n()) {
                for s in Strategy::BOTH {
                    prop_assert_eq!(bg.payoff(s, comp).to_bits(), plain.payoff(s, comp).to_bits());
                }
            }
        }
    }

    #[test]
    fn symmetric_bribery_keeps_the_payoff_difference(m in arb_model(), h in 0.0..3.0f64, g in 0.0..=1.0f64, p in 0.0..=1.0f64) {
        let core = *m.core();
        let plain = Model::Ipgg(core);
        let bg = Model::Bribery(BriberyParams::new(core, h, g * (1.0 - core.beta()), p, p).unwrap());
        for comp in GroupComposition::all(core.n()) {
            let d_bg = bg.payoff(Strategy::Cooperate, comp) - bg.payoff(Strategy::Defect, comp);
            let d_plain = plain.payoff(Strategy::Cooperate, comp) - plain.payoff(Strategy::Defect, comp);
            prop_assert!((d_bg - d_plain).abs() < 1e-11 * (1.0 + core.b()));
        }
    }

    #[test]
    fn payoffs_are_finite(m in arb_model()) {
        for comp in GroupComposition::all(m.n()) {
            for s in Strategy::BOTH {
                prop_assert!(m.payoff(s, comp).is_finite());
                prop_assert!(m.payoff_with(s, comp, ZeroCountRule::Cancel).is_finite());
            }
        }
    }
}
