use ncs_core::config::RunConfig;
use ncs_core::ltisys::design_example;
use ncs_core::netsim::{
    adversarial_search, greedy_pattern, schedule_from_preferences, simulate, DelaySource,
    LoopController, P3Policy, PacketStatus, Recurrence, Reference, SearchOptions, SimConfig,
    DIVERGENCE_FACTOR,
};
use ncs_core::uncertainty::Protocol;

fn example_loop(protocol: Protocol, tau_lo: u32, tau_hi: u32, tau_a: u32) -> SimConfig {
    let ex = design_example();
    let plant = ex.plant();
    let controller =
        LoopController::smith_predictor(&plant, &ex.c, &ex.v, ex.filter_pole, tau_lo, tau_a)
            .unwrap();
    SimConfig {
        plant,
        controller,
        protocol,
        p3_policy: P3Policy::Oldest,
        tau_lo,
        tau_hi,
        delays: DelaySource::Uniform { seed: 3 },
        horizon: 400,
        reference: Reference {
            amplitude: 1.0,
            onset: 0,
        },
        divergence_factor: DIVERGENCE_FACTOR,
    }
}

#[test]
fn plant_step_matches_closed_form() {
    let ex = design_example();
    let mut r = Recurrence::new(&ex.plant());
    let b = 0.0051271;
    for k in 0..100 {
        let y = r.step(1.0);
        let want = if k < 6 {
            0.0
        } else {
            b * (1.051f64.powi(k - 5) - 1.0) / 0.051
        };
        assert!(
            (y - want).abs() <= 1e-9 * want.abs().max(1.0),
            "k = {k}: {y} vs {want}"
        );
    }
}

#[test]
fn zero_reference_gives_zero_trace() {
    let mut cfg = example_loop(Protocol::P3, 0, 3, 2);
    cfg.reference.amplitude = 0.0;
    let t = simulate(&cfg).unwrap();
    assert!(t.y.iter().chain(&t.u).chain(&t.n).all(|&v| v == 0.0));
}

#[test]
fn linear_in_the_reference() {
    for protocol in [Protocol::P1, Protocol::P3] {
        let cfg = example_loop(protocol, 0, 3, 2);
        let mut doubled = cfg.clone();
        doubled.reference.amplitude = 2.0;
        let (a, b) = (simulate(&cfg).unwrap(), simulate(&doubled).unwrap());
        assert_eq!(a.selected, b.selected);
        for (x, y) in a.y.iter().chain(&a.u).zip(b.y.iter().chain(&b.u)) {
            assert!((2.0 * x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }
}

#[test]
fn deterministic_for_fixed_seeds() {
    let mut cfg = example_loop(Protocol::P3, 1, 4, 3);
    cfg.p3_policy = P3Policy::Random { seed: 9 };
    assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
}

#[test]
fn nominal_step_settles() {
    let mut cfg = example_loop(Protocol::P1, 0, 0, 0);
    cfg.delays = DelaySource::Constant { delay: 0 };
    let t = simulate(&cfg).unwrap();
    let steady = cfg.controller.steady_gain();
    assert!((steady - 1.0016).abs() < 1e-3);
    assert!(t.y[300..].iter().all(|y| (y - steady).abs() < 1e-3));
}

#[test]
fn receiver_holds_between_selections() {
    let t = simulate(&example_loop(Protocol::P1, 0, 4, 2)).unwrap();
    for k in 1..t.n.len() {
        if t.selected[k].is_none() {
            assert_eq!(t.n[k], t.n[k - 1]);
        }
    }
    // P1 never goes back to an older packet
    let taken: Vec<usize> = t.selected.iter().flatten().copied().collect();
    assert!(taken.windows(2).all(|w| w[0] < w[1]));
    assert!(t.packets.iter().all(|e| e.status != PacketStatus::Dropped));
}

#[test]
fn rejects_bad_configs() {
    let mut cfg = example_loop(Protocol::P1, 0, 3, 1);
    cfg.delays = DelaySource::Scripted {
        delays: vec![0; 10],
    };
    assert!(simulate(&cfg).is_err());
    cfg.delays = DelaySource::Constant { delay: 4 };
    assert!(simulate(&cfg).is_err());
    cfg.delays = DelaySource::Constant { delay: 1 };
    cfg.horizon = 0;
    assert!(simulate(&cfg).is_err());
}

#[test]
fn schedules_are_admissible() {
    let (delays, choices) = schedule_from_preferences(&[Some(4), None, Some(2)], 1, 4, 200);
    let mut cfg = example_loop(Protocol::P3, 1, 4, 3);
    cfg.horizon = 200;
    cfg.delays = DelaySource::Scripted { delays };
    cfg.p3_policy = P3Policy::Scripted { choices };
    simulate(&cfg).unwrap();

    cfg.delays = DelaySource::Uniform { seed: 1 };
    let (delays, choices) = greedy_pattern(&cfg, 10).unwrap();
    cfg.delays = DelaySource::Scripted { delays };
    cfg.p3_policy = P3Policy::Scripted { choices };
    simulate(&cfg).unwrap();
}

#[test]
fn search_finds_divergence_beyond_the_bound() {
    let mut cfg = RunConfig::example();
    cfg.network.tau_hi = 10;
    cfg.simulation.horizon = 1000;
    let out = adversarial_search(&cfg.sim_config().unwrap(), &SearchOptions::default()).unwrap();
    assert!(out.diverged, "best: {}", out.label);
    assert!(out.divergence_instant.is_some());
}

#[test]
fn degenerate_span_never_diverges() {
    let mut cfg = RunConfig::example();
    cfg.network.protocol = Protocol::P3;
    cfg.network.tau_hi = 0;
    let opts = SearchOptions {
        budget: 20,
        ..Default::default()
    };
    let out = adversarial_search(&cfg.sim_config().unwrap(), &opts).unwrap();
    assert!(!out.diverged);
    assert!(out.pattern.iter().all(|&d| d == 0));
}
