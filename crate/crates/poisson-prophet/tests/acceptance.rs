//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`).  Run with
//! `cargo test -p poisson-prophet --test acceptance -- --nocapture`.

use std::time::Instant;

use poisson_prophet::bounds::{
    self, curve_f, curve_fhat, curve_g, curve_ghat, diff_bound_precise, sharp_two_point,
    sharpness_threshold, three_point_family, three_point_limit_ratio, SharpnessKind, SweepConfig,
};
use poisson_prophet::distributions::FiniteDist;
use poisson_prophet::hill_kertz::{alpha_zero, solve_alpha_n, solve_beta_n};
use poisson_prophet::poisson_stopping::{expected_max, value_ode, Policy, ValueProfile};
use poisson_prophet::renewal::{
    self, counterexample_metrics, counterexample_ratio_sup, RenewalDist,
};
use poisson_prophet::simulate::{check_excess_bound, estimate_policy, estimate_prophet, SimConfig};
use poisson_prophet::thresholds::threshold_value;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Published 5-decimal values of (n, alpha_n, beta_n).
const TABLE: [(u64, f64, f64); 12] = [
    (2, 0.17157, 0.06250),
    (3, 0.22138, 0.07761),
    (4, 0.24811, 0.08539),
    (5, 0.26496, 0.09020),
    (6, 0.27659, 0.09348),
    (7, 0.28513, 0.09586),
    (8, 0.29166, 0.09768),
    (9, 0.29683, 0.09911),
    (10, 0.30101, 0.10027),
    (100, 0.33716, 0.11010),
    (10_000, 0.34144, 0.11125),
    (1_000_000, 0.34149, 0.11126),
];

fn pass(criterion: &str, detail: String) {
    println!("acceptance {criterion}: PASS — {detail}");
}

#[test]
fn c01_constant_table_reproduction_within_60s() {
    let start = Instant::now();
    for &(n, alpha, beta) in &TABLE {
        let a = solve_alpha_n(n, 1e-10).unwrap();
        assert!(
            (a - alpha).abs() < 6e-6,
            "alpha_{n} = {a}, table says {alpha}"
        );
        let b = solve_beta_n(n, 1e-10).unwrap();
        assert!((b - beta).abs() < 6e-6, "beta_{n} = {b}, table says {beta}");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "constant table took {elapsed:?}"
    );
    pass(
        "1",
        format!("24 constants match to 5 decimals in {elapsed:.2?}"),
    );
}

#[test]
fn c02_limit_constant_and_convergence() {
    let a0 = alpha_zero(1e-8).unwrap();
    assert!((a0 - 0.34149).abs() < 1e-5, "alpha_0 = {a0}");
    let a_million = solve_alpha_n(1_000_000, 1e-10).unwrap();
    assert!(
        (a_million - a0).abs() < 1e-4,
        "alpha_1e6 = {a_million} vs alpha_0 = {a0}"
    );
    pass(
        "2",
        format!(
            "alpha_0 = {a0:.6}, |alpha_1e6 - alpha_0| = {:.2e}",
            (a_million - a0).abs()
        ),
    );
}

#[test]
fn c03_precise_difference_bound_number() {
    let bound = diff_bound_precise(1000.0, 1_000_000).unwrap();
    assert!(
        (bound - 0.11176).abs() < 5e-5,
        "difference bound at t = 1000, n = 1e6 is {bound}"
    );
    pass("3", format!("bound(1000, 1e6) = {bound:.6}"));
}

#[test]
fn c04_sharpness_thresholds() {
    let ratio_100 = sharpness_threshold(100, SharpnessKind::Ratio).unwrap();
    assert!((ratio_100 - 5.683).abs() < 1e-3, "got {ratio_100}");
    let diff_100 = sharpness_threshold(100, SharpnessKind::Difference).unwrap();
    assert!((diff_100 - 6.802).abs() < 1e-3, "got {diff_100}");
    let ratio_8 = sharpness_threshold(8, SharpnessKind::Ratio).unwrap();
    assert!((ratio_8 - 3.1781).abs() < 1e-3, "got {ratio_8}");
    let a_100 = 1.0 + solve_alpha_n(100, 1e-10).unwrap();
    assert!((a_100 - 1.337).abs() < 1e-3, "a_100 = {a_100}");
    let b_100 = solve_beta_n(100, 1e-10).unwrap();
    assert!((b_100 - 0.110).abs() < 1e-3, "b_100 = {b_100}");
    pass(
        "4",
        format!("thresholds {ratio_100:.3}/{diff_100:.3}/{ratio_8:.4}, a_100 = {a_100:.4}, b_100 = {b_100:.4}"),
    );
}

#[test]
fn c05_three_point_limit_and_finite_k() {
    let limit = three_point_limit_ratio(2.0, 1.0).unwrap();
    assert!((limit - 1.28536).abs() < 1e-5, "limit = {limit}");
    let d = three_point_family(2.0, 1.0, 3.0, 1e4).unwrap();
    let ratio = expected_max(&d, 3.0).unwrap() / ValueProfile::new(&d).value(3.0).unwrap();
    assert!(
        (ratio - limit).abs() < 0.01,
        "finite-K ratio {ratio} vs limit {limit}"
    );
    pass(
        "5",
        format!("limit = {limit:.6}, K = 1e4 engine ratio = {ratio:.6}"),
    );
}

#[test]
fn c06a_ode_integrator_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    let horizons = [0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0];
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let d = bounds::random_instance_in(&mut rng, 1e-2, 10.0, 8);
        let profile = ValueProfile::new(&d);
        for &t in &horizons {
            let exact = profile.value(t).unwrap();
            let ode = value_ode(|c| d.mean_excess(c).unwrap(), t, 1e-10).unwrap();
            let gap = (ode - exact).abs();
            assert!(
                gap < 1e-9,
                "ODE route off by {gap} at t = {t} on {}",
                d.spec_string()
            );
            worst = worst.max(gap);
        }
    }
    pass(
        "6a",
        format!("7000 integrations, worst |ODE - closed form| = {worst:.2e}"),
    );
}

#[test]
fn c06b_monte_carlo_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(602);
    let t = 1.2;
    let mut worst_sigma = 0.0_f64;
    for i in 0..20 {
        let d = bounds::random_instance_in(&mut rng, 1e-2, 5.0, 6);
        let cfg = SimConfig::new(t, 1_000_000, 7000 + i).unwrap();

        let m_hat = estimate_prophet(&d, &cfg);
        let m = expected_max(&d, t).unwrap();
        let m_sigmas = (m_hat.estimate - m).abs() / m_hat.stderr.max(1e-12);
        assert!(
            m_sigmas < 4.0,
            "M off by {m_sigmas} sigma on {}",
            d.spec_string()
        );

        let v_hat = estimate_policy(&d, &Policy::optimal_for(&d), &cfg);
        let v = ValueProfile::new(&d).value(t).unwrap();
        let v_sigmas = (v_hat.estimate - v).abs() / v_hat.stderr.max(1e-12);
        assert!(
            v_sigmas < 4.0,
            "V off by {v_sigmas} sigma on {}",
            d.spec_string()
        );

        let c = d.atoms()[d.len() / 2];
        let w_hat = estimate_policy(&d, &Policy::Threshold(c), &cfg);
        let w = threshold_value(&d, c, t).unwrap();
        let w_sigmas = (w_hat.estimate - w).abs() / w_hat.stderr.max(1e-12);
        assert!(
            w_sigmas < 4.0,
            "W off by {w_sigmas} sigma on {}",
            d.spec_string()
        );

        worst_sigma = worst_sigma.max(m_sigmas).max(v_sigmas).max(w_sigmas);
    }
    pass(
        "6b",
        format!("60 closed-form agreements at 1e6 paths, worst deviation = {worst_sigma:.2} sigma"),
    );
}

/// Exhaustive tree recursion over every gap/value outcome sequence; the
/// independent oracle for the renewal engine.
mod oracle {
    use poisson_prophet::distributions::FiniteDist;
    use poisson_prophet::renewal::RenewalDist;

    pub fn expected_max(gaps: &RenewalDist, d: &FiniteDist, n: u32, time: u32, cur: f64) -> f64 {
        gaps.support()
            .iter()
            .zip(gaps.probs())
            .map(|(&k, &p)| {
                if time + k > n {
                    p * cur
                } else {
                    p * d
                        .atoms()
                        .iter()
                        .zip(d.probs())
                        .map(|(&a, &q)| q * expected_max(gaps, d, n, time + k, cur.max(a)))
                        .sum::<f64>()
                }
            })
            .sum()
    }

    pub fn optimal_value(gaps: &RenewalDist, d: &FiniteDist, n: u32, time: u32) -> f64 {
        gaps.support()
            .iter()
            .zip(gaps.probs())
            .map(|(&k, &p)| {
                if time + k > n {
                    0.0
                } else {
                    let cont = optimal_value(gaps, d, n, time + k);
                    p * d
                        .atoms()
                        .iter()
                        .zip(d.probs())
                        .map(|(&a, &q)| q * a.max(cont))
                        .sum::<f64>()
                }
            })
            .sum()
    }
}

#[test]
fn c06c_renewal_engine_matches_enumeration() {
    let gap_laws = [
        RenewalDist::unit(),
        RenewalDist::new(&[2], &[1.0]).unwrap(),
        RenewalDist::new(&[1, 2], &[0.3, 0.7]).unwrap(),
        RenewalDist::new(&[1, 3], &[0.5, 0.5]).unwrap(),
        RenewalDist::new(&[1, 6], &[0.8, 0.2]).unwrap(),
        RenewalDist::new(&[2, 5], &[0.4, 0.6]).unwrap(),
    ];
    let offer_laws = [
        FiniteDist::point_mass(1.0).unwrap(),
        FiniteDist::from_probs(&[1.0, 2.0], &[0.6, 0.4]).unwrap(),
        FiniteDist::from_probs(&[0.5, 1.0, 3.0], &[0.3, 0.5, 0.2]).unwrap(),
        FiniteDist::from_probs(&[0.0, 1.0], &[0.5, 0.5]).unwrap(),
    ];
    let mut cases = 0;
    for gaps in &gap_laws {
        for offers in &offer_laws {
            for n in 1..=6u32 {
                let m = renewal::renewal_prophet_value(gaps, offers, n).unwrap();
                let v = renewal::renewal_optimal_value(gaps, offers, n).unwrap();
                let m_oracle = oracle::expected_max(gaps, offers, n, 0, 0.0);
                let v_oracle = oracle::optimal_value(gaps, offers, n, 0);
                assert!(
                    (m - m_oracle).abs() < 1e-12,
                    "M mismatch: {m} vs {m_oracle} (gaps {}, offers {}, n = {n})",
                    gaps.spec_string(),
                    offers.spec_string()
                );
                assert!(
                    (v - v_oracle).abs() < 1e-12,
                    "V mismatch: {v} vs {v_oracle} (gaps {}, offers {}, n = {n})",
                    gaps.spec_string(),
                    offers.spec_string()
                );
                cases += 1;
            }
        }
    }
    pass(
        "6c",
        format!("{cases} exhaustive-enumeration cases agree to 1e-12"),
    );
}

#[test]
fn c07_inequality_sweep_with_zero_violations() {
    // Poisson-side inequalities on 1000 random instances x 7 horizons.
    let config = SweepConfig {
        count: 1000,
        seed: 701,
        t_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0],
    };
    let reports = bounds::verify_sweep(&config).expect("sweep must be violation-free");
    let mut min_strict_margin = f64::INFINITY;
    for report in &reports {
        assert!(!report.violated);
        for check in report.checks.iter().filter(|c| c.strict) {
            assert!(
                check.margin > 0.0,
                "strict {} margin {} on {}",
                check.name,
                check.margin,
                report.instance
            );
            min_strict_margin = min_strict_margin.min(check.margin);
        }
    }

    // Excess domination, Monte Carlo route, 1000 random instances.
    let mut rng = ChaCha8Rng::seed_from_u64(702);
    for i in 0..1000u64 {
        let d = bounds::random_instance_in(&mut rng, 1e-2, 10.0, 6);
        let s = [0.5, 1.0, 5.0][(i % 3) as usize];
        let c = d.atoms()[d.len() / 2 - 1];
        let cfg = SimConfig::new(s, 20_000, 9000 + i).unwrap();
        let check = check_excess_bound(&d, s, c, &cfg);
        assert!(check.holds, "excess bound failed on {}", d.spec_string());
    }
    // Strictness of the excess bound is asserted deterministically by the
    // exact route inside the sweep above; the Monte Carlo route only needs
    // to stay inside its four-sigma band.

    // Unit-interval laws against the finite-n difference bound at n = 1e6.
    let mut rng = ChaCha8Rng::seed_from_u64(704);
    for _ in 0..200 {
        let d = bounds::random_instance_in(&mut rng, 1e-3, 1.0, 8);
        for t in [0.5, 2.0, 20.0] {
            let gap = expected_max(&d, t).unwrap() - ValueProfile::new(&d).value(t).unwrap();
            let bound = diff_bound_precise(t, 1_000_000).unwrap();
            assert!(gap <= bound + 1e-9, "gap {gap} vs bound {bound} at t = {t}");
        }
    }

    // Renewal side: the classical doubling bound on 1000 random instances.
    let mut rng = ChaCha8Rng::seed_from_u64(703);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=12u32);
        let count = rng.gen_range(1..=3usize);
        let mut support: Vec<u32> = (0..count).map(|_| rng.gen_range(1..=5)).collect();
        support.sort_unstable();
        support.dedup();
        let weights: Vec<f64> = support.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let gaps = RenewalDist::new(&support, &weights).unwrap();
        let d = bounds::random_instance_in(&mut rng, 0.01, 10.0, 4);
        let m = renewal::renewal_prophet_value(&gaps, &d, n).unwrap();
        let v = renewal::renewal_optimal_value(&gaps, &d, n).unwrap();
        assert!(v <= m + 1e-12 && m <= 2.0 * v + 1e-9);
    }

    pass(
        "7",
        format!(
            "{} sweep rows clean, min strict margin = {min_strict_margin:.3e}; 1000 excess checks and 1000 renewal doubling checks hold",
            reports.len()
        ),
    );
}

#[test]
fn c08_asymptotic_orders() {
    let ts = [0.2, 0.1, 0.05, 0.025];
    let second: Vec<f64> = ts
        .iter()
        .map(|&t| (curve_f(t).unwrap() - curve_g(t).unwrap()) / (t * t))
        .collect();
    let third: Vec<f64> = ts
        .iter()
        .map(|&t| (curve_fhat(t).unwrap() - curve_ghat(t).unwrap()) / (t * t * t))
        .collect();
    for (name, ratios) in [("(f-g)/t^2", &second), ("(fhat-ghat)/t^3", &third)] {
        let (lo, hi) = ratios
            .iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
        assert!(hi / lo < 2.0, "{name} band [{lo}, {hi}] exceeds a factor 2");
    }
    pass(
        "8",
        format!(
            "(f-g)/t^2 in [{:.4}, {:.4}], (fhat-ghat)/t^3 in [{:.4}, {:.4}]",
            second.iter().cloned().fold(f64::INFINITY, f64::min),
            second.iter().cloned().fold(0.0, f64::max),
            third.iter().cloned().fold(f64::INFINITY, f64::min),
            third.iter().cloned().fold(0.0, f64::max)
        ),
    );
}

#[test]
fn c09_renewal_counterexample_family() {
    for n in 2..=12u32 {
        for &(p, pi) in &[(0.3, 0.4), (0.6, 0.1), (0.9, 0.7)] {
            let (gaps, offers) = renewal::counterexample_instance(n, p, pi).unwrap();
            let m = renewal::renewal_prophet_value(&gaps, &offers, n).unwrap();
            let v = renewal::renewal_optimal_value(&gaps, &offers, n).unwrap();
            let (r, d) = counterexample_metrics(n, p, pi).unwrap();
            assert!((m / v - r).abs() < 1e-10, "ratio at n={n}, p={p}, pi={pi}");
            assert!(
                (m - v - d).abs() < 1e-10,
                "difference at n={n}, p={p}, pi={pi}"
            );
        }
    }
    let c5 = counterexample_ratio_sup(5).unwrap();
    assert!((c5 - 1.3849).abs() < 1e-4, "c_5 = {c5}");
    let long_bound = bounds::ratio_bound_long();
    assert!(c5 > long_bound, "c_5 = {c5} must exceed {long_bound}");
    let p = 0.99;
    let pi = (1.0 - p) / (2.0 - p);
    let (_, d_1000) = counterexample_metrics(1000, p, pi).unwrap();
    assert!(d_1000 > 0.24, "D_1000 = {d_1000}");
    pass(
        "9",
        format!("closed forms match engine for n <= 12; c_5 = {c5:.5} > {long_bound:.5}; D_1000 = {d_1000:.5}"),
    );
}

#[test]
fn c10_sharp_family_converges_to_the_short_range_bound() {
    let t = 1.0;
    let f1 = curve_f(t).unwrap();
    let mut prev = 0.0;
    for k in 1..=4 {
        let (_, ratio) = sharp_two_point(t, 10f64.powi(-k)).unwrap();
        assert!(ratio > prev, "ratio must increase as p shrinks");
        assert!(ratio < f1);
        prev = ratio;
    }
    let gap = f1 - prev;
    assert!(gap < 0.003, "final gap {gap}");
    pass(
        "10",
        format!("ratios climb to {prev:.6}; f(1) - ratio = {gap:.2e}"),
    );
}
