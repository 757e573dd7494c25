//! The sharp i.i.d. prophet-inequality constants of Hill and Kertz (1982).
//!
//! For `n >= 2` define the map `phi_n(w, x) = (n/(n-1)) w^((n-1)/n) + x/(n-1)`
//! and its iterates `eta_{0,n}(x) = phi_n(0, x)`,
//! `eta_{j,n}(x) = phi_n(eta_{j-1,n}(x), x)`.  Then
//!
//! - `alpha_n` is the unique root in (0,1) of `eta_{n-1,n}(alpha) = 1`, and
//! - `beta_n` is the unique root in (0,1) of
//!   `(n-1) [eta_{n,n}(beta) - eta_{n-1,n}(beta)] = 1`.
//!
//! With `a_n = 1 + alpha_n` and `b_n = beta_n`, an i.i.d. sequence of `n`
//! nonnegative variables satisfies `E max <= a_n * V` and, for `[a,b]`-valued
//! variables, `E max - V <= b_n (b - a)`.  As `n` grows, `alpha_n` increases
//! to the limit `alpha_0 ~= 0.34149`, the unique `alpha` with
//! `int_0^1 (y - y ln y + alpha)^(-1) dy = 1` (Kertz, 1986).
//!
//! Roots are found by bisection, which needs only the monotonicity that the
//! uniqueness statements guarantee; the limit constant uses adaptive Simpson
//! quadrature for the inner integral.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// Default bracket-width tolerance for the bisection solvers.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_BISECT_STEPS: usize = 200;
const QUAD_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum HkError {
    /// `n` must be at least 2.
    InvalidOrder(u64),
    /// A formula argument is negative or not finite.
    BadArgument(f64),
    /// Tolerance must be positive and finite.
    BadTolerance(f64),
    /// The root was not bracketed with opposite signs.
    NoBracket,
    /// Bisection failed to reach the tolerance within the iteration cap.
    NonConvergence { steps: usize, width: f64 },
}

impl fmt::Display for HkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidOrder(n) => write!(f, "n = {n} but the recursion needs n >= 2"),
            Self::BadArgument(x) => write!(f, "argument {x} is negative or not finite"),
            Self::BadTolerance(t) => write!(f, "tolerance {t} must be positive"),
            Self::NoBracket => write!(f, "root not bracketed"),
            Self::NonConvergence { steps, width } => {
                write!(
                    f,
                    "no convergence after {steps} steps (bracket width {width})"
                )
            }
        }
    }
}

impl std::error::Error for HkError {}

/// A solved pair of constants for a given `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HkConstants {
    pub n: u64,
    /// `alpha_n` in (0,1); the ratio constant is `a_n = 1 + alpha_n`.
    pub alpha: f64,
    /// `beta_n` in (0,1); the difference constant is `b_n = beta_n`.
    pub beta: f64,
    /// Achieved bracket width.
    pub tol: f64,
}

impl HkConstants {
    pub fn solve(n: u64, tol: f64) -> Result<Self, HkError> {
        Ok(Self {
            n,
            alpha: solve_alpha_n(n, tol)?,
            beta: solve_beta_n(n, tol)?,
            tol,
        })
    }

    pub fn ratio_constant(&self) -> f64 {
        1.0 + self.alpha
    }

    pub fn difference_constant(&self) -> f64 {
        self.beta
    }
}

/// `phi_n(w, x) = (n/(n-1)) w^((n-1)/n) + x/(n-1)`.
pub fn phi(n: u64, w: f64, x: f64) -> Result<f64, HkError> {
    if n < 2 {
        return Err(HkError::InvalidOrder(n));
    }
    if !w.is_finite() || w < 0.0 {
        return Err(HkError::BadArgument(w));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(HkError::BadArgument(x));
    }
    let nf = n as f64;
    Ok(phi_raw(
        nf / (nf - 1.0),
        (nf - 1.0) / nf,
        1.0 / (nf - 1.0),
        w,
        x,
    ))
}

#[inline]
fn phi_raw(coef: f64, exponent: f64, inv_nm1: f64, w: f64, x: f64) -> f64 {
    if w == 0.0 {
        x * inv_nm1
    } else {
        coef * w.powf(exponent) + x * inv_nm1
    }
}

/// `eta_{j,n}(alpha)`, evaluated iteratively in O(j).
pub fn eta(j: u64, n: u64, alpha: f64) -> Result<f64, HkError> {
    phi(n, 0.0, alpha)?; // validates n and alpha
    let nf = n as f64;
    let (coef, exponent, inv) = (nf / (nf - 1.0), (nf - 1.0) / nf, 1.0 / (nf - 1.0));
    let mut v = alpha * inv;
    for _ in 0..j {
        v = phi_raw(coef, exponent, inv, v, alpha);
    }
    Ok(v)
}

/// One pass of the recursion yielding `(eta_{n-1,n}, eta_{n,n})`.
fn eta_final_pair(n: u64, alpha: f64) -> (f64, f64) {
    let nf = n as f64;
    let (coef, exponent, inv) = (nf / (nf - 1.0), (nf - 1.0) / nf, 1.0 / (nf - 1.0));
    let mut v = alpha * inv;
    for _ in 0..n - 1 {
        v = phi_raw(coef, exponent, inv, v, alpha);
    }
    let next = phi_raw(coef, exponent, inv, v, alpha);
    (v, next)
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64, HkError> {
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(HkError::NoBracket);
    }
    let increasing = f_lo < 0.0;
    for _ in 0..MAX_BISECT_STEPS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if (fm > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(HkError::NonConvergence {
        steps: MAX_BISECT_STEPS,
        width: hi - lo,
    })
}

fn check_solver_args(n: u64, tol: f64) -> Result<(), HkError> {
    if n < 2 {
        return Err(HkError::InvalidOrder(n));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(HkError::BadTolerance(tol));
    }
    Ok(())
}

/// The unique `alpha_n` in (0,1) with `eta_{n-1,n}(alpha_n) = 1`.
pub fn solve_alpha_n(n: u64, tol: f64) -> Result<f64, HkError> {
    check_solver_args(n, tol)?;
    bisect(|a| eta_final_pair(n, a).0 - 1.0, 0.0, 1.0, tol)
}

/// The unique `beta_n` in (0,1) with
/// `(n-1) [eta_{n,n}(beta_n) - eta_{n-1,n}(beta_n)] = 1`.
pub fn solve_beta_n(n: u64, tol: f64) -> Result<f64, HkError> {
    check_solver_args(n, tol)?;
    let nm1 = (n - 1) as f64;
    bisect(
        |b| {
            let (last, next) = eta_final_pair(n, b);
            nm1 * (next - last) - 1.0
        },
        0.0,
        1.0,
        tol,
    )
}

/// The limit constant `alpha_0`: the unique `alpha` with
/// `int_0^1 (y - y ln y + alpha)^(-1) dy = 1`.
///
/// The integrand is continuous on [0,1] (value `1/alpha` at 0 and
/// `1/(1+alpha)` at 1) and decreasing in `alpha`, so bisection applies with
/// the inner integral evaluated by adaptive Simpson quadrature.
pub fn alpha_zero(tol: f64) -> Result<f64, HkError> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(HkError::BadTolerance(tol));
    }
    bisect(|a| limit_integral(a) - 1.0, 0.01, 0.99, tol)
}

/// `int_0^1 (y - y ln y + alpha)^(-1) dy` to absolute accuracy ~1e-12.
pub(crate) fn limit_integral(alpha: f64) -> f64 {
    let f = |y: f64| {
        if y <= 0.0 {
            1.0 / alpha
        } else {
            1.0 / (y - y * y.ln() + alpha)
        }
    };
    adaptive_simpson(&f, 0.0, 1.0, QUAD_ABS_TOL)
}

/// Adaptive Simpson with interval halving and Richardson correction.
fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h * (fa + 4.0 * fm + fb) / 6.0
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `alpha_n` at the default tolerance, memoized across calls.
pub fn alpha_n_cached(n: u64) -> f64 {
    static CACHE: OnceLock<Mutex<BTreeMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut map = cache.lock().expect("constant cache poisoned");
    *map.entry(n)
        .or_insert_with(|| solve_alpha_n(n, DEFAULT_TOL).expect("alpha_n solve"))
}

/// `beta_n` at the default tolerance, memoized across calls.
pub fn beta_n_cached(n: u64) -> f64 {
    static CACHE: OnceLock<Mutex<BTreeMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut map = cache.lock().expect("constant cache poisoned");
    *map.entry(n)
        .or_insert_with(|| solve_beta_n(n, DEFAULT_TOL).expect("beta_n solve"))
}

/// `alpha_0` at tolerance 1e-10, memoized.
pub fn alpha_zero_cached() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| alpha_zero(1e-10).expect("alpha_0 solve"))
}
