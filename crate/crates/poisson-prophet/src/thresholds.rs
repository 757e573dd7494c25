//! Pure threshold stopping rules under Poisson arrivals.
//!
//! The rule "accept the first offer with value at least `c`" earns
//! `W_c(t) = [1 - exp(-t P(X >= c))] E(X | X >= c)`.  The short-horizon
//! machinery is built from `gamma(t) = t / (1 - e^{-t})` and
//! `beta(t) = 1 - (1 + ln gamma(t)) / gamma(t)`, which is the maximum over
//! `x` in [0,1] of `h_t(x) = 1 - e^{-tx} - (1 - e^{-t}) x`, attained at
//! `x = ln(gamma(t)) / t`.  For offers confined to `[a, b]`, the threshold
//! `c* = b beta(t) / (beta(t) + 1 - e^{-t})` minimizes the worst-case gap
//! between the full-foresight value and the rule's value, guaranteeing
//! `M(t) - W_{c*}(t) <= [b - max(a, c*)] beta(t)`.

use std::fmt;

use crate::distributions::FiniteDist;

/// Below this horizon `beta_t` switches to its series to avoid cancellation.
const BETA_SERIES_CUTOFF: f64 = 1e-8;

/// Relative slack when detecting ties among threshold candidates.
const TIE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdError {
    /// Horizons must be positive and finite.
    BadHorizon(f64),
    /// `x` must lie in [0, 1].
    BadUnitArgument(f64),
    /// No atom reaches the threshold, so the rule never stops.
    UnreachableThreshold(f64),
    /// Interval bounds must satisfy `0 <= a < b`.
    BadInterval { a: f64, b: f64 },
}

impl fmt::Display for ThresholdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadHorizon(t) => write!(f, "horizon {t} must be positive and finite"),
            Self::BadUnitArgument(x) => write!(f, "argument {x} must lie in [0, 1]"),
            Self::UnreachableThreshold(c) => {
                write!(f, "threshold {c} exceeds every atom; the rule never stops")
            }
            Self::BadInterval { a, b } => write!(f, "interval needs 0 <= a < b, got [{a}, {b}]"),
        }
    }
}

impl std::error::Error for ThresholdError {}

fn check_horizon(t: f64) -> Result<(), ThresholdError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(ThresholdError::BadHorizon(t));
    }
    Ok(())
}

/// `gamma(t) = t / (1 - e^{-t})`, evaluated stably near zero.
pub fn gamma_t(t: f64) -> f64 {
    t / -(-t).exp_m1()
}

/// `beta(t) = 1 - (1 + ln gamma(t)) / gamma(t)`.
///
/// Rewritten as `(u - ln(1+u)) / gamma(t)` with `u = gamma(t) - 1`, which is
/// exact under `ln_1p`; for `t` below the cutoff the series
/// `t^2/8 (1 - t/2)` keeps the value positive.
pub fn beta_t(t: f64) -> f64 {
    if t < BETA_SERIES_CUTOFF {
        return t * t / 8.0 * (1.0 - 0.5 * t);
    }
    let gamma = gamma_t(t);
    let u = gamma - 1.0;
    (u - u.ln_1p()) / gamma
}

/// `h_t(x) = 1 - e^{-tx} - (1 - e^{-t}) x`, concave in `x` on [0, 1].
pub fn h_t(t: f64, x: f64) -> Result<f64, ThresholdError> {
    check_horizon(t)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(ThresholdError::BadUnitArgument(x));
    }
    Ok(-(-t * x).exp_m1() - -(-t).exp_m1() * x)
}

/// `gamma(t)`, `beta(t)`, and the maximizer of `h_t` bundled for a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaBundle {
    pub t: f64,
    pub gamma: f64,
    pub beta: f64,
    /// Argmax of `h_t` over [0, 1]: `ln(gamma(t)) / t`.
    pub argmax: f64,
}

impl BetaBundle {
    pub fn new(t: f64) -> Result<Self, ThresholdError> {
        check_horizon(t)?;
        let gamma = gamma_t(t);
        Ok(Self {
            t,
            gamma,
            beta: beta_t(t),
            argmax: gamma.ln() / t,
        })
    }
}

/// `W_c(t) = [1 - exp(-t P(X >= c))] E(X | X >= c)`.
pub fn threshold_value(d: &FiniteDist, c: f64, t: f64) -> Result<f64, ThresholdError> {
    check_horizon(t)?;
    let p = d.tail_prob(c);
    if p <= 0.0 {
        return Err(ThresholdError::UnreachableThreshold(c));
    }
    let cond = d.cond_tail_mean(c).expect("tail has mass");
    Ok(-(-t * p).exp_m1() * cond)
}

/// The best pure threshold and its value.
///
/// `W_c` is a right-continuous step function of `c`, constant between
/// consecutive atoms, so the supremum is attained at an atom; ties go to
/// the smallest maximizing atom.
pub fn best_threshold(d: &FiniteDist, t: f64) -> Result<(f64, f64), ThresholdError> {
    check_horizon(t)?;
    let values: Vec<f64> = d
        .atoms()
        .iter()
        .map(|&a| threshold_value(d, a, t).expect("atoms are reachable"))
        .collect();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let idx = values
        .iter()
        .position(|&w| w >= max * (1.0 - TIE_REL_TOL))
        .expect("non-empty");
    Ok((d.atoms()[idx], values[idx]))
}

/// The minimax threshold `c* = b beta(t) / (beta(t) + 1 - e^{-t})` for
/// offers in `[a, b]`.
pub fn minimax_threshold(a: f64, b: f64, t: f64) -> Result<f64, ThresholdError> {
    check_interval(a, b)?;
    check_horizon(t)?;
    let beta = beta_t(t);
    Ok(b * beta / (beta + -(-t).exp_m1()))
}

/// The guaranteed worst-case gap `[b - max(a, c*)] beta(t)` achieved by the
/// minimax threshold.
pub fn minimax_guarantee(a: f64, b: f64, t: f64) -> Result<f64, ThresholdError> {
    let c_star = minimax_threshold(a, b, t)?;
    Ok((b - a.max(c_star)) * beta_t(t))
}

/// The gap bound for any `[a, b]`-valued law:
/// `min{(b - a) beta(t), b beta(t)(1 - e^{-t}) / (beta(t) + 1 - e^{-t})}`.
pub fn difference_bound(a: f64, b: f64, t: f64) -> Result<f64, ThresholdError> {
    check_interval(a, b)?;
    check_horizon(t)?;
    let beta = beta_t(t);
    let one_me = -(-t).exp_m1();
    Ok(((b - a) * beta).min(b * beta * one_me / (beta + one_me)))
}

fn check_interval(a: f64, b: f64) -> Result<(), ThresholdError> {
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b <= a {
        return Err(ThresholdError::BadInterval { a, b });
    }
    Ok(())
}

/// Samples `f(x) = (1 - e^{-x})(1 + gamma/x)` on a log-spaced grid over
/// `[1e-6, 50]` and reports whether no interior local-minimum pattern
/// appears (beyond noise).  The minimum of `f` over any closed subinterval
/// therefore sits at an endpoint.
pub fn endpoint_min_check(gamma: f64, grid: usize) -> bool {
    assert!(gamma > 0.0, "gamma must be positive");
    let points = grid.max(1000);
    let (lo, hi) = (1e-6_f64.ln(), 50.0_f64.ln());
    let f = |x: f64| -(-x).exp_m1() * (1.0 + gamma / x);
    let values: Vec<f64> = (0..points)
        .map(|i| f((lo + (hi - lo) * i as f64 / (points - 1) as f64).exp()))
        .collect();
    let noise = 1e-12 * (1.0 + gamma);
    !values
        .windows(3)
        .any(|w| w[0] - w[1] > noise && w[2] - w[1] > noise)
}
