//! Exact values under unit-rate Poisson arrivals.
//!
//! With deadline `t` and offer law `X`, the optimal stopping value solves
//! `V' = E(X - V)^+, V(0) = 0` (Karlin, 1962), and the optimal rule accepts
//! the first offer whose value is at least `V(tau)` where `tau` is the time
//! remaining.  For a finitely supported law the solution is explicit: there
//! are critical times `0 < t_1* < ... < t_{n-1}*` with
//! `t_k* = t_{k-1}* + (1/r_k) ln(mu_{k-1}/mu_k)`, and on
//! `[t_{k-1}*, t_k*]`
//!
//! ```text
//! V(t) = E_k - (E_k - a_{k-1}) exp(-r_k (t - t_{k-1}*)).
//! ```
//!
//! The full-foresight value is
//! `M(t) = sum_i (a_i - a_{i-1}) (1 - exp(-r_i t))`.
//!
//! [`value_ode`] integrates the value equation for an arbitrary mean-excess
//! callback (adaptive fourth-order stepping), while [`value_ode_exact`]
//! exploits the piecewise-linear excess of a finite law to take exact
//! exponential steps between atom crossings; both serve as independent
//! routes against the closed form.

use std::fmt;

use crate::distributions::{FiniteDist, TailStats};

/// Acceptance ties (`value = V(remaining)`) go to the stopper; this relative
/// slack absorbs roundoff at the critical-time boundaries.
const ACCEPT_TIE_TOL: f64 = 1e-9;

const ODE_STEP_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ValueError {
    /// Horizons must be finite and nonnegative.
    BadTime(f64),
    /// The mean-excess callback returned a non-finite value.
    NonFiniteCallback(f64),
    /// The adaptive integrator exceeded its step budget.
    StepLimit,
}

impl fmt::Display for ValueError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadTime(t) => write!(f, "horizon {t} is negative or not finite"),
            Self::NonFiniteCallback(v) => {
                write!(f, "mean-excess callback returned {v}")
            }
            Self::StepLimit => write!(f, "ODE integrator exceeded its step budget"),
        }
    }
}

impl std::error::Error for ValueError {}

fn check_time(t: f64) -> Result<(), ValueError> {
    if !t.is_finite() || t < 0.0 {
        return Err(ValueError::BadTime(t));
    }
    Ok(())
}

/// The closed-form optimal value of a finite law: critical times plus the
/// per-segment parameters that evaluate `V(t)` for every horizon.
#[derive(Debug, Clone)]
pub struct ValueProfile {
    dist: FiniteDist,
    stats: TailStats,
    /// `t_1* .. t_{n-1}*`; empty for a point mass (always accept).
    tstar: Vec<f64>,
}

impl ValueProfile {
    pub fn new(dist: &FiniteDist) -> Self {
        let stats = dist.tail_stats();
        let n = dist.len();
        let mut tstar = Vec::with_capacity(n.saturating_sub(1));
        let mut prev = 0.0;
        // mu_k > 0 for k <= n-1 because the top atom carries mass.
        for k in 1..n {
            let t = prev + (stats.mu[k - 1] / stats.mu[k]).ln() / stats.r[k - 1];
            tstar.push(t);
            prev = t;
        }
        Self {
            dist: dist.clone(),
            stats,
            tstar,
        }
    }

    pub fn dist(&self) -> &FiniteDist {
        &self.dist
    }

    pub fn stats(&self) -> &TailStats {
        &self.stats
    }

    /// `t_1* .. t_{n-1}*`: the deadline below which atom `a_k` is accepted.
    pub fn critical_times(&self) -> &[f64] {
        &self.tstar
    }

    /// `V(t)`, evaluated on the segment containing `t`.
    pub fn value(&self, t: f64) -> Result<f64, ValueError> {
        check_time(t)?;
        let i = self.tstar.partition_point(|&x| x < t);
        let target = self.stats.cond_mean[i];
        let floor = if i == 0 {
            0.0
        } else {
            self.dist.atoms()[i - 1]
        };
        let t_prev = if i == 0 { 0.0 } else { self.tstar[i - 1] };
        let rate = self.stats.r[i];
        Ok(target - (target - floor) * (-rate * (t - t_prev)).exp())
    }

    /// The optimal rule: accept iff `value >= V(remaining)`, ties toward
    /// acceptance.  For atom `a_i` this is equivalent to
    /// `remaining <= t_i*` or `i = n`.
    pub fn accepts(&self, value: f64, remaining: f64) -> bool {
        let v = self
            .value(remaining.max(0.0))
            .expect("clamped time is valid");
        value >= v - ACCEPT_TIE_TOL * (1.0 + value.abs())
    }
}

/// A stopping rule the simulator can run.
#[derive(Debug, Clone)]
pub enum Policy {
    /// Accept the first offer at least as large as `V(remaining)`.
    Optimal(ValueProfile),
    /// Accept the first offer with value at least `c`.
    Threshold(f64),
}

impl Policy {
    pub fn optimal_for(d: &FiniteDist) -> Self {
        Self::Optimal(ValueProfile::new(d))
    }

    pub fn accepts(&self, value: f64, remaining: f64) -> bool {
        match self {
            Self::Optimal(profile) => profile.accepts(value, remaining),
            Self::Threshold(c) => value >= *c,
        }
    }
}

/// The full-foresight value
/// `M(t) = sum_i (a_i - a_{i-1}) (1 - exp(-r_i t))`.
pub fn expected_max(d: &FiniteDist, t: f64) -> Result<f64, ValueError> {
    check_time(t)?;
    let stats = d.tail_stats();
    let mut prev = 0.0;
    let mut total = 0.0;
    for (i, &a) in d.atoms().iter().enumerate() {
        total += (a - prev) * -(-stats.r[i] * t).exp_m1();
        prev = a;
    }
    Ok(total)
}

/// Integrates `V' = excess(V), V(0) = 0` up to `t` with adaptive
/// fourth-order steps and step-doubling error control.
///
/// `excess` must be the mean-excess function of some law: nonincreasing and
/// convex in the threshold.  Accuracy is controlled to roughly `abs_tol`
/// total; kinks (finite support) are handled by step refinement.
pub fn value_ode<F>(excess: F, t: f64, abs_tol: f64) -> Result<f64, ValueError>
where
    F: Fn(f64) -> f64,
{
    check_time(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let tol = abs_tol.max(1e-14);
    let mut v = 0.0;
    let mut s = 0.0;
    let mut h = t / 64.0;
    let mut steps = 0usize;
    while s < t {
        steps += 1;
        if steps > ODE_STEP_LIMIT {
            return Err(ValueError::StepLimit);
        }
        h = h.min(t - s);
        let full = rk4_step(&excess, v, h)?;
        let mid = rk4_step(&excess, v, 0.5 * h)?;
        let two = rk4_step(&excess, mid, 0.5 * h)?;
        let err = (two - full).abs() / 15.0;
        // Step doubling cannot see a slope break in the excess (both
        // estimates are wrong by similar amounts), so refuse any step whose
        // value span fails a chord test until it lands inside one smooth
        // piece.  At the step floor the crossing error is negligible and
        // the step is forced through.
        let f_lo = checked(&excess, v)?;
        let f_hi = checked(&excess, two)?;
        let f_mid = checked(&excess, 0.5 * (v + two))?;
        let kinked = (f_mid - 0.5 * (f_lo + f_hi)).abs()
            > 0.05 * (f_hi - f_lo).abs() + 1e-13 * (1.0 + f_lo.abs());
        let at_floor = h <= t * 1e-13;
        let budget = (tol * h / t).max(0.02 * tol);
        let scale = if err > 0.0 {
            (0.9 * (budget / err).powf(0.2)).clamp(0.2, 2.0)
        } else {
            2.0
        };
        if (!kinked && err <= budget) || at_floor {
            v = two + (two - full) / 15.0;
            s += h;
            h *= scale.max(1.0);
        } else if kinked {
            h *= 0.5;
        } else {
            h *= scale.min(0.5);
        }
    }
    Ok(v)
}

fn checked<F>(f: &F, x: f64) -> Result<f64, ValueError>
where
    F: Fn(f64) -> f64,
{
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(ValueError::NonFiniteCallback(y))
    }
}

fn rk4_step<F>(f: &F, v: f64, h: f64) -> Result<f64, ValueError>
where
    F: Fn(f64) -> f64,
{
    let k1 = checked(f, v)?;
    let k2 = checked(f, v + 0.5 * h * k1)?;
    let k3 = checked(f, v + 0.5 * h * k2)?;
    let k4 = checked(f, v + h * k3)?;
    Ok(v + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)
}

/// Integrates the value equation for a finite law by exact exponential
/// steps: on each linear segment of the excess the equation reads
/// `v' = r_k (E_k - v)` and is solved in closed form, switching segments
/// when `v` crosses an atom.  Agrees with [`ValueProfile::value`] to
/// machine precision.
pub fn value_ode_exact(d: &FiniteDist, t: f64) -> Result<f64, ValueError> {
    check_time(t)?;
    let stats = d.tail_stats();
    let atoms = d.atoms();
    let n = d.len();
    let mut v = 0.0;
    let mut remaining = t;
    let mut seg = 0;
    while seg < n - 1 {
        let target = stats.cond_mean[seg];
        let rate = stats.r[seg];
        // Time for v to climb to the next atom; target > atom off the top
        // segment, so the log is finite and positive.
        let dt = ((target - v) / (target - atoms[seg])).ln() / rate;
        if dt >= remaining {
            break;
        }
        v = atoms[seg];
        remaining -= dt;
        seg += 1;
    }
    let target = stats.cond_mean[seg];
    let rate = stats.r[seg];
    Ok(target - (target - v) * (-rate * remaining).exp())
}
