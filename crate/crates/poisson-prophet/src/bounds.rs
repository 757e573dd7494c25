//! Bound curves, sharpness families, and the randomized inequality sweep.
//!
//! Long horizons: `M(t) <= (1 + alpha_0) V(t)` with
//! `1 + alpha_0 ~= 1.34149`, and for `[0,1]`-valued offers
//! `M(t) - V(t) <= beta_n + (1 - e^{-t})[1 - n(1 - e^{-t/n})/t]` for every
//! `n >= 2`.  Short horizons: `M(t)/V(t) < f(t) = 2 - (1 - e^{-t})/t`,
//! with the achievable side given by the two-point limit curve
//! `g(t) = (2 - e^{-t}) / (2 - ln(1+t)/t)`; the difference analogues are
//! `f_hat` (from the minimax threshold) and `g_hat` (attained by an explicit
//! two-point law).  [`verify_sweep`] replays every inequality as an
//! assertion over randomly generated laws and aborts on the first
//! violation with the offending instance serialized.

use std::fmt;

use rand::Rng;

use crate::distributions::FiniteDist;
use crate::hill_kertz::{alpha_n_cached, alpha_zero_cached, beta_n_cached};
use crate::poisson_stopping::{expected_max, ValueProfile};
use crate::thresholds::{
    best_threshold, beta_t, minimax_guarantee, minimax_threshold, threshold_value,
};

/// Absolute slack absorbing roundoff in the non-strict sweep assertions.
const SWEEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum BoundsError {
    /// Horizons must be positive and finite.
    BadHorizon(f64),
    /// Constant order must be at least 2.
    BadOrder(u64),
    /// A rate or probability parameter is out of its domain.
    BadParameter { name: &'static str, value: f64 },
    /// A family's validity condition failed.
    FamilyCondition(String),
    /// The sweep found an inequality violation.
    SweepViolation {
        check: &'static str,
        instance: String,
        t: f64,
        margin: f64,
    },
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadHorizon(t) => write!(f, "horizon {t} must be positive and finite"),
            Self::BadOrder(n) => write!(f, "order {n} must be at least 2"),
            Self::BadParameter { name, value } => {
                write!(f, "parameter {name} = {value} out of domain")
            }
            Self::FamilyCondition(msg) => write!(f, "family condition violated: {msg}"),
            Self::SweepViolation {
                check,
                instance,
                t,
                margin,
            } => write!(
                f,
                "sweep violation of {check} at t = {t} (margin {margin}) on instance {instance}"
            ),
        }
    }
}

impl std::error::Error for BoundsError {}

fn check_horizon(t: f64) -> Result<(), BoundsError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(BoundsError::BadHorizon(t));
    }
    Ok(())
}

/// The horizon-free ratio bound `1 + alpha_0 ~= 1.34149`.
pub fn ratio_bound_long() -> f64 {
    1.0 + alpha_zero_cached()
}

/// The finite-`n` difference bound for `[0,1]`-valued offers:
/// `beta_n + (1 - e^{-t}) [1 - n (1 - e^{-t/n}) / t]`.
pub fn diff_bound_precise(t: f64, n: u64) -> Result<f64, BoundsError> {
    check_horizon(t)?;
    if n < 2 {
        return Err(BoundsError::BadOrder(n));
    }
    let nf = n as f64;
    let one_me = -(-t).exp_m1();
    let bracket = 1.0 - nf * -(-t / nf).exp_m1() / t;
    Ok(beta_n_cached(n) + one_me * bracket)
}

/// Short-horizon ratio bound `f(t) = 2 - (1 - e^{-t})/t`.
pub fn curve_f(t: f64) -> Result<f64, BoundsError> {
    check_horizon(t)?;
    Ok(2.0 - -(-t).exp_m1() / t)
}

/// The two-point limit ratio `g(t) = (2 - e^{-t}) / (2 - ln(1+t)/t)`,
/// the achievable side of the short-horizon ratio bracket.
pub fn curve_g(t: f64) -> Result<f64, BoundsError> {
    check_horizon(t)?;
    Ok((2.0 - (-t).exp()) / (2.0 - t.ln_1p() / t))
}

/// Short-horizon difference bound for `[0,1]` offers:
/// `f_hat(t) = beta(t)(1 - e^{-t}) / (beta(t) + 1 - e^{-t})`.
pub fn curve_fhat(t: f64) -> Result<f64, BoundsError> {
    check_horizon(t)?;
    let beta = beta_t(t);
    let one_me = -(-t).exp_m1();
    Ok(beta * one_me / (beta + one_me))
}

/// The difference attained by the two-point law with
/// `P(X = 1) = 1/(e^t + 1)` and the rest at `(1 - e^{-t})/2`:
/// `g_hat(t) = [(1 + e^{-t})(1 - exp(-t/(e^t+1))) - e^{-t}(1 - e^{-t})]/2`.
pub fn curve_ghat(t: f64) -> Result<f64, BoundsError> {
    check_horizon(t)?;
    let emt = (-t).exp();
    Ok(0.5 * ((1.0 + emt) * -(-t / (t.exp() + 1.0)).exp_m1() - emt * (1.0 - emt)))
}

/// Which discrete-time constant a sharpness threshold refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SharpnessKind {
    Ratio,
    Difference,
}

/// The horizon beyond which the `n`-observation extremal construction
/// embeds into the Poisson model: `ln((n-1)/alpha_n)` for the ratio bound,
/// `ln((n-1)/beta_n)` for the difference bound.
pub fn sharpness_threshold(n: u64, kind: SharpnessKind) -> Result<f64, BoundsError> {
    if n < 2 {
        return Err(BoundsError::BadOrder(n));
    }
    let constant = match kind {
        SharpnessKind::Ratio => alpha_n_cached(n),
        SharpnessKind::Difference => beta_n_cached(n),
    };
    Ok(((n - 1) as f64 / constant).ln())
}

/// The two-point law showing the short-horizon ratio bound is sharp, plus
/// its exact `M / sup_c W_c` ratio.
///
/// With `eps = [1 - e^{-pt} - p(1 - e^{-t})] / [(1-p)(1 - e^{-t})]` and
/// `P(X = 1) = p = 1 - P(X = eps)`, both thresholds tie and the ratio is
/// `1 + eps (e^{-tp} - e^{-t}) / (1 - e^{-tp})`, increasing to `f(t)` as
/// `p` drops to zero.
pub fn sharp_two_point(t: f64, p: f64) -> Result<(FiniteDist, f64), BoundsError> {
    check_horizon(t)?;
    if !(0.0..1.0).contains(&p) || p <= 0.0 {
        return Err(BoundsError::BadParameter {
            name: "p",
            value: p,
        });
    }
    let one_me = -(-t).exp_m1();
    let eps = (-(-p * t).exp_m1() - p * one_me) / ((1.0 - p) * one_me);
    let dist = FiniteDist::from_probs(&[eps, 1.0], &[1.0 - p, p])
        .expect("eps lies strictly inside (0, 1)");
    let ratio = 1.0 + eps * ((-t * p).exp() - (-t).exp()) / -(-t * p).exp_m1();
    Ok((dist, ratio))
}

/// The two-point family `{1, K}` with `P(X = K) = a/(tK)`, whose ratio
/// approaches [`two_point_limit_ratio`] as `K` grows.
pub fn two_point_family(t: f64, a: f64, k: f64) -> Result<FiniteDist, BoundsError> {
    check_horizon(t)?;
    if !a.is_finite() || a <= 0.0 {
        return Err(BoundsError::BadParameter {
            name: "a",
            value: a,
        });
    }
    if !k.is_finite() || k <= 1.0 {
        return Err(BoundsError::BadParameter {
            name: "K",
            value: k,
        });
    }
    let r2 = a / (t * k);
    if r2 >= 1.0 {
        return Err(BoundsError::FamilyCondition(format!(
            "top-atom mass a/(tK) = {r2} must be below one"
        )));
    }
    Ok(FiniteDist::from_probs(&[1.0, k], &[1.0 - r2, r2]).expect("valid two-point law"))
}

/// Limit of the two-point family ratio as `K` grows:
/// `(a + 1 - e^{-t}) / (a + 1 - (a/t) ln(1 + t/a))`, valid while
/// `ln(1 + t/a) < t`.
pub fn two_point_limit_ratio(t: f64, a: f64) -> Result<f64, BoundsError> {
    check_horizon(t)?;
    if !a.is_finite() || a <= 0.0 {
        return Err(BoundsError::BadParameter {
            name: "a",
            value: a,
        });
    }
    let lg = (t / a).ln_1p();
    if lg >= t {
        return Err(BoundsError::FamilyCondition(format!(
            "ln(1 + t/a) = {lg} must be below t = {t}"
        )));
    }
    Ok((a + 1.0 - (-t).exp()) / (a + 1.0 - (a / t) * lg))
}

/// The three-point family `{1, K, K^2}` with `P(X >= K) = a/t` and
/// `P(X = K^2) = b/(tK)`; its ratio becomes horizon-free for `t > a`.
pub fn three_point_family(a: f64, b: f64, t: f64, k: f64) -> Result<FiniteDist, BoundsError> {
    check_horizon(t)?;
    for (name, value) in [("a", a), ("b", b)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(BoundsError::BadParameter { name, value });
        }
    }
    if a >= t {
        return Err(BoundsError::FamilyCondition(format!(
            "the family needs a < t, got a = {a}, t = {t}"
        )));
    }
    if !k.is_finite() || k <= 1.0 {
        return Err(BoundsError::BadParameter {
            name: "K",
            value: k,
        });
    }
    let r2 = a / t;
    let r3 = b / (t * k);
    if r3 >= r2 || r2 >= 1.0 {
        return Err(BoundsError::FamilyCondition(format!(
            "tail masses must nest: {r3} < {r2} < 1"
        )));
    }
    Ok(
        FiniteDist::from_probs(&[1.0, k, k * k], &[1.0 - r2, r2 - r3, r3])
            .expect("valid three-point law"),
    )
}

/// Limit of the three-point family ratio as `K` grows:
/// `(1 + b - e^{-a}) / (1 + b - (b/a) ln(1 + a/b))`, valid while
/// `ln(1 + a/b) < a` (and attained for every horizon `t > a`).
pub fn three_point_limit_ratio(a: f64, b: f64) -> Result<f64, BoundsError> {
    for (name, value) in [("a", a), ("b", b)] {
        if !value.is_finite() || value <= 0.0 {
            return Err(BoundsError::BadParameter { name, value });
        }
    }
    let lg = (a / b).ln_1p();
    if lg >= a {
        return Err(BoundsError::FamilyCondition(format!(
            "ln(1 + a/b) = {lg} must be below a = {a}"
        )));
    }
    Ok((1.0 + b - (-a).exp()) / (1.0 + b - (b / a) * lg))
}

/// Grid search over two-point laws `{x, 1}`: the largest `M/V` ratio found
/// and the law attaining it.  Exploratory only; no optimality is claimed.
pub fn two_point_ratio_scan(t: f64, grid: usize) -> Result<(f64, FiniteDist), BoundsError> {
    check_horizon(t)?;
    let grid = grid.max(8);
    let mut best = (0.0, FiniteDist::point_mass(1.0).expect("unit point mass"));
    for i in 0..grid {
        let x =
            (1e-4_f64.ln() + (0.99_f64.ln() - 1e-4_f64.ln()) * i as f64 / (grid - 1) as f64).exp();
        for j in 0..grid {
            let p = (1e-4_f64.ln()
                + (0.999_f64.ln() - 1e-4_f64.ln()) * j as f64 / (grid - 1) as f64)
                .exp();
            let d = FiniteDist::from_probs(&[x, 1.0], &[1.0 - p, p]).expect("two-point law");
            let m = expected_max(&d, t).expect("valid horizon");
            let v = ValueProfile::new(&d).value(t).expect("valid horizon");
            if m / v > best.0 {
                best = (m / v, d);
            }
        }
    }
    Ok(best)
}

/// A random law for the sweep: 2..=8 atoms log-uniform on `[lo, hi]`,
/// weights Dirichlet-uniform.
pub fn random_instance_in<R: Rng>(rng: &mut R, lo: f64, hi: f64, max_atoms: usize) -> FiniteDist {
    loop {
        let count = rng.gen_range(2..=max_atoms.max(2));
        let atoms: Vec<f64> = (0..count)
            .map(|_| (rng.gen_range(lo.ln()..hi.ln())).exp())
            .collect();
        // Exponential weights normalize to a uniform Dirichlet draw.
        let weights: Vec<f64> = (0..count)
            .map(|_| (-(1.0 - rng.gen::<f64>()).ln()).max(1e-12))
            .collect();
        if let Ok(d) = FiniteDist::from_weights(&atoms, &weights) {
            if d.len() >= 2 {
                return d;
            }
        }
    }
}

/// The default sweep generator: atoms log-uniform on `[1e-3, 1e3]`.
pub fn random_instance<R: Rng>(rng: &mut R) -> FiniteDist {
    random_instance_in(rng, 1e-3, 1e3, 8)
}

/// One inequality evaluated on one instance.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: &'static str,
    /// The bound's value on this instance.
    pub bound: f64,
    /// The quantity the bound caps.
    pub achieved: f64,
    /// `bound - achieved`; negative (beyond slack) means violation.
    pub margin: f64,
    /// Whether the inequality is strict (margin must be positive).
    pub strict: bool,
}

/// Every bound evaluated on one instance at one horizon.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// Inline spec of the law, sufficient to reproduce the row.
    pub instance: String,
    pub t: f64,
    pub m: f64,
    pub v: f64,
    pub best_threshold_value: f64,
    pub checks: Vec<BoundCheck>,
    pub violated: bool,
}

/// Sweep configuration: number of random instances, RNG seed, and the
/// horizon grid each instance is evaluated on.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub count: usize,
    pub seed: u64,
    pub t_grid: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: 0,
            t_grid: vec![0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0],
        }
    }
}

/// Exact left side of the excess-domination inequality:
/// `E(max_by_s - c)^+ = int_c^inf (1 - exp(-s P(X > z))) dz`, summed over
/// the atom partition where the integrand is constant.
fn excess_of_running_max(d: &FiniteDist, s: f64, c: f64) -> f64 {
    let mut total = 0.0;
    let mut prev: f64 = 0.0;
    for &a in d.atoms() {
        let lo = prev.max(c);
        prev = a;
        if a <= lo {
            continue;
        }
        let mid = 0.5 * (lo + a);
        let above: f64 = d
            .atoms()
            .iter()
            .zip(d.probs())
            .filter(|(x, _)| **x > mid)
            .map(|(_, p)| p)
            .sum();
        total += (a - lo) * -(-s * above).exp_m1();
    }
    total
}

fn evaluate_instance(d: &FiniteDist, t: f64) -> BoundReport {
    let profile = ValueProfile::new(d);
    let v = profile.value(t).expect("positive horizon");
    let m = expected_max(d, t).expect("positive horizon");
    let (_, w_best) = best_threshold(d, t).expect("positive horizon");
    let (a, b) = (d.min_atom(), d.max_atom());

    let mut checks = Vec::with_capacity(7);
    let mut push = |name, bound: f64, achieved: f64, strict: bool| {
        checks.push(BoundCheck {
            name,
            bound,
            achieved,
            margin: bound - achieved,
            strict,
        });
    };

    push("prophet_dominates", m, v, false);
    push("long_ratio", ratio_bound_long() * v, m, false);
    push(
        "short_ratio",
        curve_f(t).expect("positive horizon") * v,
        m,
        true,
    );
    push(
        "threshold_ratio",
        curve_f(t).expect("positive horizon") * w_best,
        m,
        true,
    );

    let c_star = minimax_threshold(a, b, t).expect("a < b");
    let w_star = threshold_value(d, c_star, t).expect("c* is below the top atom");
    push(
        "minimax_gap",
        minimax_guarantee(a, b, t).expect("a < b"),
        m - w_star,
        false,
    );
    push(
        "difference",
        crate::thresholds::difference_bound(a, b, t).expect("a < b"),
        m - v,
        false,
    );

    // Excess domination at the median atom, exact on both sides; strict
    // because mass lies above the median atom.
    let c = d.atoms()[d.len() / 2 - 1];
    push(
        "excess_domination",
        t * d.mean_excess(c).expect("nonnegative threshold"),
        excess_of_running_max(d, t, c),
        true,
    );

    let slack = SWEEP_SLACK;
    let violated = checks.iter().any(|c| {
        if c.strict {
            c.margin <= 0.0
        } else {
            c.margin < -slack
        }
    });

    BoundReport {
        instance: d.spec_string(),
        t,
        m,
        v,
        best_threshold_value: w_best,
        checks,
        violated,
    }
}

/// Runs every inequality over `count` random instances, aborting on the
/// first violation with the offending instance serialized.
pub fn verify_sweep(config: &SweepConfig) -> Result<Vec<BoundReport>, BoundsError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let mut reports = Vec::with_capacity(config.count * config.t_grid.len());
    for _ in 0..config.count {
        let d = random_instance(&mut rng);
        for &t in &config.t_grid {
            let report = evaluate_instance(&d, t);
            if report.violated {
                let offender = report
                    .checks
                    .iter()
                    .find(|c| {
                        if c.strict {
                            c.margin <= 0.0
                        } else {
                            c.margin < -SWEEP_SLACK
                        }
                    })
                    .expect("violated report has a failing check");
                return Err(BoundsError::SweepViolation {
                    check: offender.name,
                    instance: report.instance.clone(),
                    t,
                    margin: offender.margin,
                });
            }
            reports.push(report);
        }
    }
    Ok(reports)
}
