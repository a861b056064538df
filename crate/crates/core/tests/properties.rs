use std::collections::HashSet;

use ncs_core::ltisys::freq::{uniform_grid, GRID_POINTS};
use ncs_core::ltisys::{build_m, design_example, design_fsp, inf_norm, TransferFunction};
use ncs_core::netsim::replay_uncertainty;
use ncs_core::uncertainty::{
    default_t_max, family_max, gain_p1, gain_p1_limit, optimal_p3, optimize, oracle_gain,
    search_work, tau_bar, uncertainty_response, Family, GainWindow, Protocol, Selection,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn protocol() -> impl Strategy<Value = Protocol> {
    prop_oneof![Just(Protocol::P1), Just(Protocol::P3)]
}

/// `(span, tau_a, T, shifted delays)` for small windows.
fn small_case(max_span: u32, max_t: u32) -> impl Strategy<Value = (u32, u32, u32, Vec<i64>)> {
    (1..=max_span)
        .prop_flat_map(move |n| (Just(n), 0..=n, 0..=max_t))
        .prop_flat_map(|(n, a, t)| {
            let w = GainWindow::new(n, a, t).unwrap();
            let d = w.min_delay()..=w.max_delay();
            (
                Just(n),
                Just(a),
                Just(t),
                prop::collection::vec(d, w.packet_count()),
            )
        })
}

fn stable_first_order() -> impl Strategy<Value = TransferFunction> {
    (-3.0..3.0f64, -0.95..0.95f64, -0.9..0.9f64, 0..3u32).prop_map(|(k, zero, pole, d)| {
        TransferFunction::new(&[k, -k * zero], &[1.0, -pole], d, 1.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gain_is_scale_invariant(
        (n, a, t, delays) in small_case(4, 8),
        p in protocol(),
        vbar in 0.01..100.0f64,
    ) {
        let w = GainWindow::new(n, a, t).unwrap();
        let r = uncertainty_response(p, w, &delays, Selection::Worst).unwrap();
        let num: f64 = r.w.iter().map(|&x| (vbar * x as f64).powi(2)).sum();
        let den: f64 = (0..=t).map(|_| vbar * vbar).sum();
        let scaled = (num / den).sqrt();
        prop_assert!((scaled - r.alpha()).abs() <= 1e-12 * r.alpha().max(1.0));
    }

    #[test]
    fn oracle_dominates((n, a, t, delays) in small_case(3, 5), p in protocol()) {
        let w = GainWindow::new(n, a, t).unwrap();
        let oracle = oracle_gain(p, w, search_work(p, &w)).unwrap();
        let random = uncertainty_response(p, w, &delays, Selection::Worst).unwrap();
        prop_assert!(random.norm_sq <= oracle.norm_sq);
        for f in Family::ALL {
            if let Ok(v) = f.norm_sq(n, a, t) {
                if p == Protocol::P3 || f == Family::P1 {
                    prop_assert!(v <= oracle.norm_sq, "{} above oracle", f);
                }
            }
        }
        let valid = match p {
            Protocol::P1 => t >= Family::P1.valid_from(n, a),
            Protocol::P3 => t + 1 >= n,
        };
        if valid {
            prop_assert_eq!(family_max(p, n, a, t).unwrap().1, oracle.norm_sq);
        }
    }

    #[test]
    fn single_delivery((n, a, t, delays) in small_case(5, 10), p in protocol()) {
        let w = GainWindow::new(n, a, t).unwrap();
        let r = uncertainty_response(p, w, &delays, Selection::Worst).unwrap();
        let mut seen = HashSet::new();
        for j in r.selections.iter().flatten() {
            prop_assert!(seen.insert(*j), "packet {} taken twice", j);
        }
        for (i, k) in w.instants().enumerate() {
            if let Some(j) = r.selections[i] {
                prop_assert_eq!(r.arrival(j), k);
            }
        }
    }

    #[test]
    fn receiver_replay_conforms((n, a, t, delays) in small_case(4, 8), p in protocol()) {
        let w = GainWindow::new(n, a, t).unwrap();
        let r = uncertainty_response(p, w, &delays, Selection::Worst).unwrap();
        let rep = replay_uncertainty(&r).unwrap();
        prop_assert_eq!(rep.received, r.received);
        prop_assert_eq!(rep.w, r.w);
        prop_assert_eq!(rep.selections, r.selections);
    }

    #[test]
    fn p1_gain_rises_to_its_limit(n in 1..12u32, a_frac in 0.0..=1.0f64, dt in 0..80u32) {
        let a = (a_frac * n as f64).round() as u32;
        let t = Family::P1.valid_from(n, a) + dt;
        let limit = tau_bar(n, a) as f64;
        let (g0, g1) = (gain_p1(n, a, t).unwrap(), gain_p1(n, a, t + 1).unwrap());
        prop_assert!(g0 <= g1 + 1e-15);
        prop_assert!(g1 <= limit + 1e-12);
        if limit >= 2.0 {
            prop_assert!(g1 < limit);
        }
        prop_assert_eq!(gain_p1_limit(n, a), limit);
    }

    #[test]
    fn p1_gain_is_symmetric_in_the_shift(n in 1..16u32, a_frac in 0.0..=1.0f64) {
        let a = (a_frac * n as f64).round() as u32;
        prop_assert_eq!(gain_p1_limit(n, a), gain_p1_limit(n, n - a));
        let r = optimize(Protocol::P1, n, default_t_max(n)).unwrap();
        prop_assert_eq!(r.shifts[a as usize].alpha, r.shifts[(n - a) as usize].alpha);
    }

    #[test]
    fn algebra_matches_pointwise(
        g1 in stable_first_order(),
        g2 in stable_first_order(),
        w in 0.0..std::f64::consts::PI,
    ) {
        let (a, b) = (g1.freq(w), g2.freq(w));
        let close = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-9 * y.norm().max(1.0);
        prop_assert!(close(g1.mul(&g2).unwrap().freq(w), a * b));
        prop_assert!(close(g1.add(&g2).unwrap().freq(w), a + b));
        prop_assert!(close(g1.sub(&g2).unwrap().freq(w), a - b));
        let loop_tf = g1.feedback(&g2).unwrap();
        let den = Complex64::new(1.0, 0.0) + a * b;
        if den.norm() > 1e-6 {
            prop_assert!(close(loop_tf.freq(w), a / den));
        }
    }

    #[test]
    fn inf_norm_bounds_the_grid(g1 in stable_first_order(), g2 in stable_first_order()) {
        let g = g1.mul(&g2).unwrap();
        let n = inf_norm(&g).unwrap();
        for w in uniform_grid(1.0, GRID_POINTS) {
            prop_assert!(g.freq(w).norm() <= n.norm * (1.0 + 1e-12));
        }
        prop_assert!((g.freq(n.omega).norm() - n.norm).abs() <= 1e-6 * n.norm.max(1e-300));
    }

    #[test]
    fn predictor_design_invariants(tau_hat in 0..15u32, pole in 0.5..0.99f64) {
        let ex = design_example();
        let d = design_fsp(&ex.c, &ex.p_hat, tau_hat, pole).unwrap();
        prop_assert!((d.f.dc_gain() - 1.0).abs() <= 1e-9);
        prop_assert!(d.h.max_pole_magnitude() < 1.0);
        prop_assert!(d.residual < 1e-8);
    }

    #[test]
    fn m_magnitude_identity(tau_hat in 0..12u32, w in 1e-3..std::f64::consts::PI) {
        let ex = design_example();
        let d = design_fsp(&ex.c, &ex.p_hat, tau_hat, ex.filter_pole).unwrap();
        let m = build_m(&d.r, &ex.p_hat, tau_hat).unwrap();
        let z = Complex64::from_polar(1.0, w);
        let rp = d.r.freq(w) * ex.p_hat.freq(w);
        let want = (rp / (1.0 + rp * z.powi(-(tau_hat as i32))) * (z - 1.0) / z).norm();
        prop_assert!((m.freq(w).norm() - want).abs() <= 1e-9 * want.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn longer_sweep_does_not_raise_the_optimum(n in 1..6u32, extra in 1..60u32) {
        let base = optimal_p3(n, default_t_max(n)).unwrap().alpha_star;
        let longer = optimal_p3(n, default_t_max(n) + extra).unwrap().alpha_star;
        prop_assert!(longer <= base * (1.0 + 1e-9));
    }
}
