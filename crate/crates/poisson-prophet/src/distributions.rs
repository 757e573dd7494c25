//! Finitely supported nonnegative offer laws and their tail functionals.
//!
//! [`FiniteDist`] is the universal input of the crate: a law on atoms
//! `a_1 < … < a_n` with positive probabilities summing to one.  The law of
//! an offer is never allowed to be the point mass at zero.  [`TailStats`]
//! bundles the tail probabilities `r_k = P(X >= a_k)`, the mean excesses
//! `mu_k = E(X - a_k)^+`, and the conditional tail means
//! `E_k = E(X | X >= a_k)`, computed by the backward recursion
//! `mu_{k-1} = mu_k + r_k (a_k - a_{k-1})` rather than naive summation.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Relative atom-merge tolerance: atoms closer than `1e-12 * (1 + max atom)`
/// are treated as the same point.
const MERGE_REL_TOL: f64 = 1e-12;

/// Probability inputs must sum to one within this tolerance before the exact
/// renormalization step.
const PROB_SUM_TOL: f64 = 1e-9;

/// Errors from constructing or querying a finite distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum DistError {
    /// No atoms were supplied.
    Empty,
    /// Atom/weight sequences have different lengths.
    LengthMismatch { atoms: usize, weights: usize },
    /// An atom is negative or not finite.
    BadAtom(f64),
    /// A weight is negative or not finite.
    BadWeight(f64),
    /// All weights are zero.
    ZeroTotalWeight,
    /// Probabilities do not sum to one within tolerance.
    ProbSum(f64),
    /// The law puts all of its mass at zero.
    AllMassAtZero,
    /// Balayage interval is invalid (needs `0 <= lo < hi`).
    BadInterval { lo: f64, hi: f64 },
    /// A threshold argument is negative or not finite.
    BadThreshold(f64),
    /// The excess-balance parameter must be positive and finite.
    BadAlpha(f64),
    /// An inline distribution spec failed to parse.
    SpecSyntax(String),
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "distribution needs at least one atom"),
            Self::LengthMismatch { atoms, weights } => {
                write!(f, "{atoms} atoms but {weights} weights")
            }
            Self::BadAtom(a) => write!(f, "atom {a} is negative or not finite"),
            Self::BadWeight(w) => write!(f, "weight {w} is negative or not finite"),
            Self::ZeroTotalWeight => write!(f, "weights sum to zero"),
            Self::ProbSum(s) => write!(f, "probabilities sum to {s}, not 1"),
            Self::AllMassAtZero => write!(f, "law is the point mass at zero"),
            Self::BadInterval { lo, hi } => {
                write!(f, "invalid sweep interval [{lo}, {hi}]")
            }
            Self::BadThreshold(c) => write!(f, "threshold {c} is negative or not finite"),
            Self::BadAlpha(a) => write!(f, "alpha {a} must be positive and finite"),
            Self::SpecSyntax(s) => write!(f, "malformed distribution spec: {s}"),
        }
    }
}

impl std::error::Error for DistError {}

/// A nonnegative law with finite support: atoms strictly ascending,
/// probabilities positive and summing to one.
///
/// Construction sorts, merges near-duplicate atoms, drops zero-probability
/// atoms, and renormalizes, so every held value satisfies the invariants.
/// The degenerate point mass at zero is rejected.  Values are immutable;
/// all operations are pure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteDist {
    atoms: Vec<f64>,
    probs: Vec<f64>,
}

impl FiniteDist {
    /// Builds a law from atoms and arbitrary nonnegative weights; weights
    /// are normalized by their sum.
    pub fn from_weights(atoms: &[f64], weights: &[f64]) -> Result<Self, DistError> {
        Self::build(atoms, weights, false)
    }

    /// Builds a law from atoms and probabilities that must already sum to
    /// one within `1e-9`; the sum is then renormalized exactly.
    pub fn from_probs(atoms: &[f64], probs: &[f64]) -> Result<Self, DistError> {
        Self::build(atoms, probs, true)
    }

    /// The point mass at `a` (for `a > 0`).
    pub fn point_mass(a: f64) -> Result<Self, DistError> {
        Self::from_weights(&[a], &[1.0])
    }

    fn build(atoms: &[f64], weights: &[f64], check_prob_sum: bool) -> Result<Self, DistError> {
        if atoms.is_empty() {
            return Err(DistError::Empty);
        }
        if atoms.len() != weights.len() {
            return Err(DistError::LengthMismatch {
                atoms: atoms.len(),
                weights: weights.len(),
            });
        }
        for &a in atoms {
            if !a.is_finite() || a < 0.0 {
                return Err(DistError::BadAtom(a));
            }
        }
        for &w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(DistError::BadWeight(w));
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(DistError::ZeroTotalWeight);
        }
        if check_prob_sum && (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(DistError::ProbSum(total));
        }

        let mut pairs: Vec<(f64, f64)> =
            atoms.iter().copied().zip(weights.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("atoms are finite"));

        let max_atom = pairs.last().expect("non-empty").0;
        let merge_tol = MERGE_REL_TOL * (1.0 + max_atom);

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (a, w) in pairs {
            match merged.last_mut() {
                Some((last_a, last_w)) if a - *last_a <= merge_tol => *last_w += w,
                _ => merged.push((a, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        if merged.is_empty() {
            return Err(DistError::ZeroTotalWeight);
        }
        if merged.len() == 1 && merged[0].0 == 0.0 {
            return Err(DistError::AllMassAtZero);
        }

        let kept_total: f64 = merged.iter().map(|&(_, w)| w).sum();
        let mut dist_atoms = Vec::with_capacity(merged.len());
        let mut dist_probs = Vec::with_capacity(merged.len());
        for (a, w) in &merged {
            dist_atoms.push(*a);
            dist_probs.push(if kept_total == 1.0 {
                *w
            } else {
                w / kept_total
            });
        }
        // Push the rounding residual onto the heaviest atom, then pin the
        // last probability to one minus the rest, which makes the
        // left-to-right sum exactly one.  Construction is then idempotent,
        // so a serialized law re-parses bit-identically.
        let heaviest = dist_probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .map(|(i, _)| i)
            .expect("non-empty");
        let sum: f64 = dist_probs.iter().sum();
        if sum != 1.0 {
            dist_probs[heaviest] += 1.0 - sum;
            let partial: f64 = dist_probs[..dist_probs.len() - 1].iter().sum();
            let last = 1.0 - partial;
            if last > 0.0 {
                *dist_probs.last_mut().expect("non-empty") = last;
            }
        }

        Ok(Self {
            atoms: dist_atoms,
            probs: dist_probs,
        })
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one atom
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        *self.atoms.last().expect("non-empty")
    }

    /// E X.
    pub fn mean(&self) -> f64 {
        self.atoms.iter().zip(&self.probs).map(|(a, p)| a * p).sum()
    }

    /// P(X >= c).
    pub fn tail_prob(&self, c: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.probs)
            .filter(|(a, _)| **a >= c)
            .map(|(_, p)| p)
            .sum()
    }

    /// P(X < c), the strict lower tail.
    pub fn below_prob(&self, c: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.probs)
            .filter(|(a, _)| **a < c)
            .map(|(_, p)| p)
            .sum()
    }

    /// E(X | X >= c); `None` when P(X >= c) = 0.
    pub fn cond_tail_mean(&self, c: f64) -> Option<f64> {
        let p = self.tail_prob(c);
        if p <= 0.0 {
            return None;
        }
        let weighted: f64 = self
            .atoms
            .iter()
            .zip(&self.probs)
            .filter(|(a, _)| **a >= c)
            .map(|(a, p)| a * p)
            .sum();
        Some(weighted / p)
    }

    /// The mean excess E(X - c)^+, piecewise linear, nonincreasing and
    /// convex in `c`.
    pub fn mean_excess(&self, c: f64) -> Result<f64, DistError> {
        if !c.is_finite() || c < 0.0 {
            return Err(DistError::BadThreshold(c));
        }
        Ok(self
            .atoms
            .iter()
            .zip(&self.probs)
            .map(|(a, p)| p * (a - c).max(0.0))
            .sum())
    }

    /// The unique `c >= 0` with `E(X - c)^+ = c * alpha`.
    ///
    /// The left side is piecewise linear and decreasing from `E X`, the
    /// right side linear and increasing from zero, so the crossing lies on
    /// a single segment and is solved there in closed form.
    pub fn balance_threshold(&self, alpha: f64) -> Result<f64, DistError> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(DistError::BadAlpha(alpha));
        }
        let stats = self.tail_stats();
        // Segment k (1-based) covers c in [a_{k-1}, a_k] with a_0 = 0, where
        // E(X - c)^+ = mu_{k-1} - r_k (c - a_{k-1}).
        let mut lo = 0.0;
        for k in 1..=self.len() {
            let hi = self.atoms[k - 1];
            if hi <= lo {
                continue; // zero-length first segment when a_1 = 0
            }
            let r_k = stats.r[k - 1];
            let mu_prev = stats.mu[k - 1];
            let excess_at_hi = mu_prev - r_k * (hi - lo);
            if excess_at_hi <= alpha * hi {
                // Crossing is on this segment.
                return Ok((mu_prev + r_k * lo) / (alpha + r_k));
            }
            lo = hi;
        }
        // Mathematically unreachable: E(X - a_n)^+ = 0 < alpha * a_n.
        Err(DistError::BadAlpha(alpha))
    }

    /// Sweeps the mass on `[lo, hi]` to the interval endpoints, preserving
    /// the mean: an atom `x` inside sends weight `(hi - x)/(hi - lo)` to
    /// `lo` and the rest to `hi`.  Atoms outside the interval are untouched.
    pub fn balayage(&self, lo: f64, hi: f64) -> Result<Self, DistError> {
        if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || lo >= hi {
            return Err(DistError::BadInterval { lo, hi });
        }
        let width = hi - lo;
        let mut atoms = Vec::with_capacity(self.len() + 2);
        let mut weights = Vec::with_capacity(self.len() + 2);
        let mut at_lo = 0.0;
        let mut at_hi = 0.0;
        for (&a, &p) in self.atoms.iter().zip(&self.probs) {
            if a >= lo && a <= hi {
                let w_lo = (hi - a) / width;
                at_lo += p * w_lo;
                at_hi += p * (1.0 - w_lo);
            } else {
                atoms.push(a);
                weights.push(p);
            }
        }
        if at_lo > 0.0 {
            atoms.push(lo);
            weights.push(at_lo);
        }
        if at_hi > 0.0 {
            atoms.push(hi);
            weights.push(at_hi);
        }
        Self::from_weights(&atoms, &weights)
    }

    /// Tail statistics computed by the backward mean-excess recursion.
    pub fn tail_stats(&self) -> TailStats {
        TailStats::from_dist(self)
    }

    /// Parses the inline `a1:p1,a2:p2,...` syntax (probabilities must sum
    /// to one within tolerance).
    pub fn parse_spec(spec: &str) -> Result<Self, DistError> {
        let mut atoms = Vec::new();
        let mut probs = Vec::new();
        for part in spec.split(',') {
            let part = part.trim();
            let (a, p) = part.split_once(':').ok_or_else(|| {
                DistError::SpecSyntax(format!("expected atom:prob, got {part:?}"))
            })?;
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| DistError::SpecSyntax(format!("bad atom {a:?}")))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| DistError::SpecSyntax(format!("bad probability {p:?}")))?;
            atoms.push(a);
            probs.push(p);
        }
        Self::from_probs(&atoms, &probs)
    }

    /// Renders the law in the inline spec syntax with round-trip-exact
    /// number formatting.
    pub fn spec_string(&self) -> String {
        self.atoms
            .iter()
            .zip(&self.probs)
            .map(|(a, p)| format!("{a}:{p}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl<'de> Deserialize<'de> for FiniteDist {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<f64>,
            probs: Vec<f64>,
        }
        let raw = Raw::deserialize(deserializer)?;
        FiniteDist::from_probs(&raw.atoms, &raw.probs).map_err(serde::de::Error::custom)
    }
}

/// Tail probabilities, mean excesses, and conditional tail means of a
/// [`FiniteDist`].
///
/// Indexing convention: `r[i]` and `cond_mean[i]` refer to atom `a_{i+1}`
/// (0-based atom `i`), while `mu[k]` refers to `a_k` with `a_0 = 0`, so
/// `mu[0] = E X` and `mu[n] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailStats {
    /// `r[i] = P(X >= atoms[i])`; `r[0] = 1` exactly.
    pub r: Vec<f64>,
    /// `mu[k] = E(X - a_k)^+` for `k = 0..=n` with `a_0 = 0`.
    pub mu: Vec<f64>,
    /// `cond_mean[i] = E(X | X >= atoms[i]) = atoms[i] + mu[i+1] / r[i]`.
    pub cond_mean: Vec<f64>,
}

impl TailStats {
    pub fn from_dist(d: &FiniteDist) -> Self {
        let n = d.len();
        let atoms = d.atoms();
        let probs = d.probs();

        let mut r = vec![0.0; n];
        r[n - 1] = probs[n - 1];
        for i in (0..n - 1).rev() {
            r[i] = r[i + 1] + probs[i];
        }
        // P(X >= a_1) is exactly one; pin it so downstream logs are clean.
        r[0] = 1.0;

        let mut mu = vec![0.0; n + 1];
        for k in (1..=n).rev() {
            let prev_atom = if k >= 2 { atoms[k - 2] } else { 0.0 };
            mu[k - 1] = mu[k] + r[k - 1] * (atoms[k - 1] - prev_atom);
        }

        let cond_mean = (0..n).map(|i| atoms[i] + mu[i + 1] / r[i]).collect();

        Self { r, mu, cond_mean }
    }
}
