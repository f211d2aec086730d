//! Invariants over random channels.

use approx::assert_relative_eq;
use proptest::prelude::*;

use confdiamond::af::{af_objective, conferencing_noise, maximize_af, AfCoefficients};
use confdiamond::maximin::{maximin, AffineFamily, Line};
use confdiamond::strategy1::{
    df_rate_closed_form, df_rate_lp, df_rate_lp_restricted, upper_bound_i, ConferencingLink,
};
use confdiamond::strategy2::{df_rate_ii, g_func, min_conferencing_for_capacity, upper_bound_ii};
use confdiamond::sweep::format_sig9;
use confdiamond::{db_to_linear, linear_to_db, ConferencingCapacities, DfSolution, LinkGains};

fn gains() -> impl Strategy<Value = LinkGains> {
    prop::array::uniform4(-10.0f64..30.0)
        .prop_map(|[a, b, c, d]| LinkGains::from_db(a, b, c, d).unwrap())
}

fn conf() -> impl Strategy<Value = ConferencingCapacities> {
    (0.0f64..10.0, 0.0f64..10.0).prop_map(|(a, b)| ConferencingCapacities::new(a, b).unwrap())
}

/// Every row of the strategy-I program, with slack `tol`.
fn feasible_i(g: &LinkGains, c: &ConferencingCapacities, s: &DfSolution, tol: f64) -> bool {
    let r = g.rates();
    let (l1, l2) = (s.share.lambda1(), s.share.lambda2());
    let a = s.allocation;
    [a.r11, a.r12, a.r21, a.r22].iter().all(|&x| x >= 0.0)
        && a.r11 + a.r12 <= l1 * r.up1 + tol
        && a.r21 + a.r22 <= l2 * r.up2 + tol
        && a.r12 + a.r22 <= l1 * r.down2 + tol
        && a.r11 + a.r21 <= l2 * r.down1 + tol
        && a.r12 <= l2 * c.c12 + tol
        && a.r21 <= l1 * c.c21 + tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn maximin_matches_dense_scan(
        ends in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..6)
    ) {
        let lines: Vec<Line> = ends.iter().map(|&(a, b)| Line::through(a, b)).collect();
        let fam = AffineFamily::new(lines).unwrap();
        let m = maximin(&fam);
        let n = 10_000;
        let scan = (0..=n)
            .map(|k| fam.envelope(k as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(m.value >= scan - 1e-12);
        prop_assert!(m.value - scan <= 10.0 / n as f64 + 1e-12);
        prop_assert!((fam.envelope(m.lambda1) - m.value).abs() <= 1e-12);
        prop_assert!(m.argmax_lo <= m.lambda1 && m.lambda1 <= m.argmax_hi);
        prop_assert!((fam.envelope(m.argmax_hi) - m.value).abs() <= 1e-9);
        prop_assert!((fam.envelope(m.argmax_lo) - m.value).abs() <= 1e-9);
    }

    #[test]
    fn df_is_sandwiched(g in gains(), c in conf()) {
        let df1 = df_rate_lp(&g, &c).unwrap();
        let df2 = df_rate_ii(&g, &c).unwrap();
        let ub1 = upper_bound_i(&g, &c).unwrap().value;
        let ub2 = upper_bound_ii(&g, &c).unwrap().value;
        prop_assert!(df1.rate <= ub1 + 1e-9);
        prop_assert!(df2.rate <= ub2 + 1e-9);
        prop_assert!(df1.rate <= df2.rate + 1e-9);
        prop_assert!(ub1 <= ub2 + 1e-9);
        // no conferencing at all is always possible
        let none = df_rate_lp(&g, &ConferencingCapacities::none()).unwrap().rate;
        prop_assert!(none <= df1.rate + 1e-9);
    }

    #[test]
    fn df_solution_is_feasible_and_one_sided(g in gains(), c in conf()) {
        let s = df_rate_lp(&g, &c).unwrap();
        prop_assert!(feasible_i(&g, &c, &s, 1e-9));
        prop_assert!(s.allocation.r12 == 0.0 || s.allocation.r21 == 0.0);
        prop_assert_eq!(s.allocation.r12 > 0.0, s.active_link == ConferencingLink::Relay1ToRelay2);
        prop_assert_eq!(s.allocation.r21 > 0.0, s.active_link == ConferencingLink::Relay2ToRelay1);
        assert_relative_eq!(s.allocation.total(), s.rate, max_relative = 1e-12);
        let cf = df_rate_closed_form(&g, &c).unwrap();
        prop_assert!(feasible_i(&g, &c, &cf, 1e-9));
        prop_assert!((cf.rate - s.rate).abs() <= 1e-6);
    }

    #[test]
    fn mirroring_the_channel_keeps_the_rates(g in gains(), c in conf()) {
        let (gm, cm) = (g.mirrored(), c.mirrored());
        let pairs = [
            (df_rate_lp(&g, &c).unwrap().rate, df_rate_lp(&gm, &cm).unwrap().rate),
            (df_rate_ii(&g, &c).unwrap().rate, df_rate_ii(&gm, &cm).unwrap().rate),
            (upper_bound_i(&g, &c).unwrap().value, upper_bound_i(&gm, &cm).unwrap().value),
            (upper_bound_ii(&g, &c).unwrap().value, upper_bound_ii(&gm, &cm).unwrap().value),
        ];
        for (a, b) in pairs {
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn one_link_suffices(g in gains(), c in conf()) {
        let full = df_rate_lp(&g, &c).unwrap().rate;
        let a = df_rate_lp_restricted(&g, &c, ConferencingLink::Relay1ToRelay2).unwrap().rate;
        let b = df_rate_lp_restricted(&g, &c, ConferencingLink::Relay2ToRelay1).unwrap().rate;
        let none = df_rate_lp_restricted(&g, &c, ConferencingLink::None).unwrap().rate;
        prop_assert!((a.max(b) - full).abs() <= 1e-9);
        prop_assert!(none <= a.min(b) + 1e-9);
    }

    #[test]
    fn threshold_report_is_consistent(g in gains()) {
        let t = min_conferencing_for_capacity(&g).unwrap();
        let r = g.rates();
        let two = maximin(&AffineFamily::new(vec![
            Line::through(r.up2, r.up1),
            Line::through(r.down1, r.down2),
        ]).unwrap());
        prop_assert!((0.0..=1.0).contains(&t.lambda_star));
        prop_assert!(t.min_conf_sum >= 0.0);
        prop_assert!((two.value - t.ctilde_upper).abs() <= 1e-12);
        prop_assert!((t.g_value - g_func(&r, t.lambda_star)).abs() <= 1e-12);
        // lambda_star maximizes the two-term bound
        let at = Line::through(r.up2, r.up1).eval(t.lambda_star)
            .min(Line::through(r.down1, r.down2).eval(t.lambda_star));
        prop_assert!((at - t.ctilde_upper).abs() <= 1e-9);
    }

    #[test]
    fn db_round_trip(db in -60.0f64..60.0) {
        let back = linear_to_db(db_to_linear(db).unwrap()).unwrap();
        prop_assert!((back - db).abs() <= 1e-9);
    }

    #[test]
    fn sig9_round_trip(v in prop::num::f64::NORMAL) {
        let s = format_sig9(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-9 * v.abs(), "{} -> {}", v, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn af_optimum_is_feasible_and_beats_direct_forwarding(g in gains(), c in conf()) {
        let noise = conferencing_noise(&g, &c).unwrap();
        let best = maximize_af(&g, &c).unwrap();
        prop_assert!(best.coeffs.is_feasible(&g, &noise));
        let direct = AfCoefficients {
            p11: 1.0 / (g.gamma1 + 1.0),
            p22: 1.0 / (g.gamma2 + 1.0),
            ..Default::default()
        };
        let (a, b) = af_objective(&g, &noise, &direct).unwrap();
        prop_assert!(best.rate >= a + b - 1e-9);
        let (r1, r2) = best.per_message;
        prop_assert!((r1 + r2 - best.rate).abs() <= 1e-12 * best.rate.max(1.0));
    }

    #[test]
    fn af_grows_with_conferencing(g in gains(), c in conf(), extra in 0.0f64..5.0) {
        let more = ConferencingCapacities::new(c.c12 + extra, c.c21 + extra).unwrap();
        let lo = maximize_af(&g, &c).unwrap().rate;
        let hi = maximize_af(&g, &more).unwrap().rate;
        prop_assert!(hi >= lo - 1e-6, "{} then {}", lo, hi);
    }
}
