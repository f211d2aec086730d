//! Engines against independent brute-force oracles.

use confdiamond::af::{af_gradient, af_grid_oracle, af_objective, conferencing_noise, maximize_af};
use confdiamond::strategy1::{asymptotic_df_limit, df_rate_closed_form, df_rate_lp, upper_bound_i};
use confdiamond::strategy2::{
    df_rate_ii, min_conferencing_for_capacity, min_symmetric_conferencing, upper_bound_ii,
};
use confdiamond::{ConferencingCapacities, LinkGains};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance_rng(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

fn random_gains(rng: &mut impl Rng) -> LinkGains {
    let mut db = || rng.gen_range(-10.0..=30.0);
    LinkGains::from_db(db(), db(), db(), db()).unwrap()
}

fn random_gains_by_rate(rng: &mut impl Rng, max_rate: f64) -> LinkGains {
    let mut r = || rng.gen_range(0.0..=max_rate);
    LinkGains::from_capacities(r(), r(), r(), r()).unwrap()
}

fn random_conf(rng: &mut impl Rng) -> ConferencingCapacities {
    ConferencingCapacities::new(rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=10.0)).unwrap()
}

/// `(at lambda1 = 0, at lambda1 = 1)`
type Seg = (f64, f64);

fn eval(s: Seg, l: f64) -> f64 {
    s.0 + (s.1 - s.0) * l
}

/// `max_l min_i s_i(l)` over `[0, 1]`, evaluating the lower envelope at the
/// end points and at every pairwise crossing.
fn maximin_by_crossings(segs: &[Seg]) -> f64 {
    let env = |l: f64| {
        segs.iter()
            .map(|&s| eval(s, l))
            .fold(f64::INFINITY, f64::min)
    };
    let mut cands = vec![0.0, 1.0];
    for (i, a) in segs.iter().enumerate() {
        for b in &segs[i + 1..] {
            let da = a.1 - a.0;
            let db = b.1 - b.0;
            if da != db {
                let l = (b.0 - a.0) / (da - db);
                if (0.0..=1.0).contains(&l) {
                    cands.push(l);
                }
            }
        }
    }
    cands.into_iter().map(env).fold(f64::NEG_INFINITY, f64::max)
}

/// Max-flow of the relay network for each time share, as its four cuts:
/// source | relays, relay 1 on the source side, relay 2 on the source side,
/// relays | destination. `scaled` multiplies the conferencing capacities by
/// the share of the slot they are used in.
fn df_by_cuts(g: &LinkGains, c: &ConferencingCapacities, scaled: bool) -> f64 {
    let r = g.rates();
    let (a1, a2, b1, b2) = (r.up1, r.up2, r.down1, r.down2);
    let (c12, c21): (Seg, Seg) = if scaled {
        ((c.c12, 0.0), (0.0, c.c21))
    } else {
        ((c.c12, c.c12), (c.c21, c.c21))
    };
    maximin_by_crossings(&[
        (a2, a1),
        (a2 + b1 + c12.0, c12.1),
        (c21.0, a1 + b2 + c21.1),
        (b1, b2),
    ])
}

fn sum_c(c: &ConferencingCapacities) -> f64 {
    c.c12 + c.c21
}

fn bound_i_lines(g: &LinkGains, c: &ConferencingCapacities) -> Vec<Seg> {
    let r = g.rates();
    vec![
        (r.up2, r.up1),
        (r.down1, r.down2),
        (r.up2 + r.down1 + c.c12, c.c21),
        (c.c12, r.up1 + r.down2 + c.c21),
    ]
}

fn instances(seed: u64, n: u64) -> impl Iterator<Item = (LinkGains, ConferencingCapacities)> {
    (0..n).map(move |i| {
        let mut rng = instance_rng(seed, i);
        let g = random_gains(&mut rng);
        let c = random_conf(&mut rng);
        (g, c)
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn strategy_one_df_matches_min_cut() {
    for (g, c) in instances(11, 3000) {
        let want = df_by_cuts(&g, &c, true);
        let lp = df_rate_lp(&g, &c).unwrap().rate;
        let cf = df_rate_closed_form(&g, &c).unwrap().rate;
        assert!(close(lp, want, 1e-9), "{g:?} {c:?}: lp {lp} cut {want}");
        assert!(close(cf, want, 1e-9), "{g:?} {c:?}: closed {cf} cut {want}");
    }
}

#[test]
fn strategy_two_df_matches_min_cut() {
    for (g, c) in instances(12, 3000) {
        let want = df_by_cuts(&g, &c, false);
        let got = df_rate_ii(&g, &c).unwrap().rate;
        assert!(close(got, want, 1e-9), "{g:?} {c:?}: {got} vs {want}");
    }
}

#[test]
fn upper_bounds_match_dense_grid() {
    for (g, c) in instances(13, 300) {
        let lines_i = bound_i_lines(&g, &c);
        let r = g.rates();
        let s = sum_c(&c);
        let lines_ii = vec![
            (r.up2, r.up1),
            (r.down1, r.down2),
            (r.up2 + r.down1 + s, s),
            (s, r.up1 + r.down2 + s),
        ];
        for (lines, got) in [
            (lines_i, upper_bound_i(&g, &c).unwrap().value),
            (lines_ii, upper_bound_ii(&g, &c).unwrap().value),
        ] {
            let n = 20_000;
            let grid = (0..=n)
                .map(|k| {
                    let l = k as f64 / n as f64;
                    lines
                        .iter()
                        .map(|&s| eval(s, l))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let slope = lines.iter().map(|s| (s.1 - s.0).abs()).fold(0.0, f64::max);
            // the grid can only undershoot, by at most one slope times half a cell
            assert!(got >= grid - 1e-12, "{got} < grid {grid}");
            assert!(
                got - grid <= slope / n as f64 + 1e-12,
                "{got} vs grid {grid}"
            );
            assert!(close(got, maximin_by_crossings(&lines), 1e-12));
        }
    }
}

#[test]
fn skewed_channel_values() {
    // C values (4, 1, 1, 4); values frozen from the cut oracle above
    let g = LinkGains::from_capacities(4.0, 1.0, 1.0, 4.0).unwrap();
    let cases = [
        (0.0, 0.0, 1.6),
        (1.0, 0.0, 2.0),
        (0.0, 1.0, 1.6),
        (4.0, 4.0, 8.0 / 3.0),
    ];
    for (c12, c21, want) in cases {
        let c = ConferencingCapacities::new(c12, c21).unwrap();
        let oracle = df_by_cuts(&g, &c, true);
        assert!(
            (oracle - want).abs() < 1e-12,
            "oracle {oracle} at ({c12}, {c21})"
        );
        assert!((df_rate_lp(&g, &c).unwrap().rate - want).abs() < 1e-9);
    }
}

#[test]
fn large_conferencing_approaches_the_two_term_limit() {
    // the gap closes like 1/C; at 1e9 it is below 1e-6 for rates up to 10
    for i in 0..300 {
        let g = random_gains_by_rate(&mut instance_rng(14, i), 10.0);
        let lim = asymptotic_df_limit(&g).unwrap().value;
        let at = |c: f64| {
            df_rate_lp(&g, &ConferencingCapacities::symmetric(c).unwrap())
                .unwrap()
                .rate
        };
        let (d3, d6, d9) = (lim - at(1e3), lim - at(1e6), lim - at(1e9));
        assert!(
            d3 >= -1e-9 && d6 >= -1e-9 && d9 >= -1e-9,
            "DF above the limit"
        );
        assert!(d9 <= 1e-6, "{g:?}: gap {d9} at 1e9");
        // a thousand times the conferencing, about a thousandth of the gap
        assert!(
            d6 <= d3 * 2e-3 + 1e-9,
            "{g:?}: gap {d6} at 1e6 vs {d3} at 1e3"
        );
    }
}

#[test]
fn threshold_agrees_with_bisection() {
    for (g, _) in instances(15, 200) {
        let t = min_conferencing_for_capacity(&g).unwrap();
        let b = min_symmetric_conferencing(&g, 1e-9).unwrap();
        assert!(
            (t.min_conf_sum - b).abs() <= 1e-6 * t.min_conf_sum.max(1.0),
            "{g:?}: formula {} bisection {b}",
            t.min_conf_sum
        );
    }
}

#[test]
fn conferencing_sweep_channel_threshold() {
    // g1 = gt2 = 10 dB, g2 = gt1 = 30 dB; frozen from the bisection oracle
    let g = LinkGains::from_db(10.0, 30.0, 30.0, 10.0).unwrap();
    let t = min_conferencing_for_capacity(&g).unwrap();
    let b = min_symmetric_conferencing(&g, 1e-12).unwrap();
    assert!((t.min_conf_sum - b).abs() < 1e-9);
    assert!(
        (t.min_conf_sum - 9.967226258).abs() < 1e-8,
        "{}",
        t.min_conf_sum
    );
}

#[test]
fn af_optimizer_matches_fine_grid() {
    for i in 0..40 {
        let mut rng = instance_rng(16, i);
        let g = random_gains(&mut rng);
        let c = random_conf(&mut rng);
        let noise = conferencing_noise(&g, &c).unwrap();
        let best = maximize_af(&g, &c).unwrap();
        let grid = af_grid_oracle(&g, &noise, 301);
        assert!(best.coeffs.is_feasible(&g, &noise));
        assert!(
            (best.rate - grid.rate).abs() <= 1e-4,
            "{g:?} {c:?}: ascent {} grid {}",
            best.rate,
            grid.rate
        );
    }
}

#[test]
fn af_gradient_matches_differences() {
    for i in 0..200 {
        let mut rng = instance_rng(17, i);
        let g = random_gains(&mut rng);
        let c = random_conf(&mut rng);
        let noise = conferencing_noise(&g, &c).unwrap();
        let p = maximize_af(&g, &c).unwrap().coeffs;
        // halfway to the optimum from a point with a tenth of each budget,
        // which keeps every open coefficient strictly inside
        let budget = |g: f64, s: f64| {
            if s.is_finite() {
                1.0 / (g + 1.0 + s)
            } else {
                0.0
            }
        };
        let caps = [
            1.0 / (g.gamma1 + 1.0),
            budget(g.gamma1, noise.sigma2_12),
            budget(g.gamma2, noise.sigma2_21),
            1.0 / (g.gamma2 + 1.0),
        ];
        let opt = [p.p11, p.p12, p.p21, p.p22];
        let x: [f64; 4] = std::array::from_fn(|k| 0.5 * opt[k] + 0.1 * caps[k]);
        let f = |x: [f64; 4]| {
            let c = confdiamond::af::AfCoefficients {
                p11: x[0],
                p12: x[1],
                p21: x[2],
                p22: x[3],
            };
            let (a, b) = af_objective(&g, &noise, &c).unwrap();
            a + b
        };
        let grad = af_gradient(
            &g,
            &noise,
            &confdiamond::af::AfCoefficients {
                p11: x[0],
                p12: x[1],
                p21: x[2],
                p22: x[3],
            },
        );
        for k in 0..4 {
            if x[k] == 0.0 {
                continue;
            }
            let h = 1e-6 * x[k];
            let (mut up, mut dn) = (x, x);
            up[k] += h;
            dn[k] -= h;
            let fd = (f(up) - f(dn)) / (2.0 * h);
            assert!(
                (fd - grad[k]).abs() <= 1e-5 * grad[k].abs().max(1e-3),
                "{g:?} coordinate {k}: analytic {} differences {fd}",
                grad[k]
            );
        }
    }
}
