//! Discrete-time renewal arrivals, where the Poisson-case constants fail.
//!
//! Inter-arrival times are i.i.d. positive integers; the observation made
//! at renewal time `S_k = T_1 + ... + T_k` is `X_k`, and the horizon is an
//! integer `n`.  Setting `Y_j = X_k` when `j = S_k` (and zero otherwise)
//! reduces the problem to stopping `Y_1, ..., Y_n`, which backward
//! induction over renewal indices solves exactly: with `gamma_j` the best
//! value attainable from a renewal at time `j`,
//!
//! ```text
//! gamma_j = E(X v c_j),   c_j = sum_k P(T = k) gamma_{j+k} [j + k <= n],
//! V_n     = sum_k P(T = k) gamma_k [k <= n].
//! ```
//!
//! The geometric-gap case is the binomial process, whose `Y_j` are i.i.d.
//! with law `p F + (1-p) delta_0`, so the discrete i.i.d. constants apply.
//! The two-gap family `T in {1, n}` produces ratios approaching
//! `c_n = 1 + (2/(n+1))^{2/(n-1)} (n-1)/(n+1)` (which tends to 2) and
//! differences approaching 1/4, beating every Poisson-case constant.

use std::fmt;

use crate::distributions::FiniteDist;

#[derive(Debug, Clone, PartialEq)]
pub enum RenewalError {
    /// No support points supplied.
    Empty,
    /// Gap/weight sequences differ in length.
    LengthMismatch { support: usize, weights: usize },
    /// Inter-arrival times must be positive integers.
    BadSupport(u32),
    /// A weight is negative or not finite.
    BadWeight(f64),
    /// All weights are zero.
    ZeroTotalWeight,
    /// Probabilities must sum to one within 1e-9.
    ProbSum(f64),
    /// The horizon must be at least one.
    BadHorizon(u32),
    /// A parameter left its domain.
    BadParameter { name: &'static str, value: f64 },
    /// An inline gap-law spec failed to parse.
    SpecSyntax(String),
}

impl fmt::Display for RenewalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "gap law needs at least one support point"),
            Self::LengthMismatch { support, weights } => {
                write!(f, "{support} support points but {weights} weights")
            }
            Self::BadSupport(k) => write!(f, "gap {k} must be a positive integer"),
            Self::BadWeight(w) => write!(f, "weight {w} is negative or not finite"),
            Self::ZeroTotalWeight => write!(f, "weights sum to zero"),
            Self::ProbSum(s) => write!(f, "probabilities sum to {s}, not 1"),
            Self::BadHorizon(n) => write!(f, "horizon {n} must be at least one"),
            Self::BadParameter { name, value } => {
                write!(f, "parameter {name} = {value} out of domain")
            }
            Self::SpecSyntax(s) => write!(f, "malformed gap-law spec: {s}"),
        }
    }
}

impl std::error::Error for RenewalError {}

/// The law of the i.i.d. integer inter-arrival times.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalDist {
    support: Vec<u32>,
    probs: Vec<f64>,
}

impl RenewalDist {
    /// Builds a gap law from positive-integer gaps and nonnegative weights
    /// (normalized by their sum; duplicates merged).
    pub fn new(support: &[u32], weights: &[f64]) -> Result<Self, RenewalError> {
        if support.is_empty() {
            return Err(RenewalError::Empty);
        }
        if support.len() != weights.len() {
            return Err(RenewalError::LengthMismatch {
                support: support.len(),
                weights: weights.len(),
            });
        }
        if let Some(&k) = support.iter().find(|&&k| k == 0) {
            return Err(RenewalError::BadSupport(k));
        }
        for &w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(RenewalError::BadWeight(w));
            }
        }
        let mut pairs: Vec<(u32, f64)> = support
            .iter()
            .copied()
            .zip(weights.iter().copied())
            .collect();
        pairs.sort_by_key(|&(k, _)| k);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (k, w) in pairs {
            match merged.last_mut() {
                Some((last, acc)) if *last == k => *acc += w,
                _ => merged.push((k, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        if total <= 0.0 {
            return Err(RenewalError::ZeroTotalWeight);
        }
        Ok(Self {
            support: merged.iter().map(|&(k, _)| k).collect(),
            probs: merged.iter().map(|&(_, w)| w / total).collect(),
        })
    }

    /// The deterministic unit gap (one observation per time step).
    pub fn unit() -> Self {
        Self::new(&[1], &[1.0]).expect("unit gap law")
    }

    /// Geometric gaps with success probability `p`, truncated at the
    /// horizon: mass beyond `n` is folded into a single out-of-horizon gap.
    pub fn geometric(p: f64, n: u32) -> Result<Self, RenewalError> {
        if !(0.0..=1.0).contains(&p) || p <= 0.0 {
            return Err(RenewalError::BadParameter {
                name: "p",
                value: p,
            });
        }
        let mut support = Vec::new();
        let mut weights = Vec::new();
        let mut tail = 1.0; // (1-p)^{k-1}
        for k in 1..=n {
            support.push(k);
            weights.push(tail * p);
            tail *= 1.0 - p;
        }
        if tail > 0.0 {
            support.push(n + 1);
            weights.push(tail);
        }
        Self::new(&support, &weights)
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Parses the inline `k1:p1,k2:p2,...` syntax; probabilities must sum
    /// to one within 1e-9.
    pub fn parse_spec(spec: &str) -> Result<Self, RenewalError> {
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for part in spec.split(',') {
            let part = part.trim();
            let (k, p) = part.split_once(':').ok_or_else(|| {
                RenewalError::SpecSyntax(format!("expected gap:prob, got {part:?}"))
            })?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|_| RenewalError::SpecSyntax(format!("bad gap {k:?}")))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| RenewalError::SpecSyntax(format!("bad probability {p:?}")))?;
            support.push(k);
            probs.push(p);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(RenewalError::ProbSum(total));
        }
        Self::new(&support, &probs)
    }

    pub fn spec_string(&self) -> String {
        self.support
            .iter()
            .zip(&self.probs)
            .map(|(k, p)| format!("{k}:{p}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Backward-induction table: `gamma[j-1]` is the best expected value
/// attainable from an observation arriving at time `j`, and
/// `continuation[j-1]` the value of declining it.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    pub horizon: u32,
    pub gamma: Vec<f64>,
    pub continuation: Vec<f64>,
}

pub fn gamma_table(gaps: &RenewalDist, d: &FiniteDist, n: u32) -> Result<GammaTable, RenewalError> {
    if n == 0 {
        return Err(RenewalError::BadHorizon(n));
    }
    let n_us = n as usize;
    let mut gamma = vec![0.0; n_us];
    let mut continuation = vec![0.0; n_us];
    for j in (1..=n_us).rev() {
        // Gaps reaching beyond the horizon contribute nothing.
        let cont: f64 = gaps
            .support
            .iter()
            .zip(&gaps.probs)
            .filter(|(&k, _)| j + k as usize <= n_us)
            .map(|(&k, &p)| p * gamma[j + k as usize - 1])
            .sum();
        continuation[j - 1] = cont;
        gamma[j - 1] = d
            .atoms()
            .iter()
            .zip(d.probs())
            .map(|(&a, &p)| p * a.max(cont))
            .sum();
    }
    Ok(GammaTable {
        horizon: n,
        gamma,
        continuation,
    })
}

/// Exact optimal stopping value over the horizon `n`: the table assembled
/// over the first-arrival law.
pub fn renewal_optimal_value(
    gaps: &RenewalDist,
    d: &FiniteDist,
    n: u32,
) -> Result<f64, RenewalError> {
    let table = gamma_table(gaps, d, n)?;
    Ok(gaps
        .support
        .iter()
        .zip(&gaps.probs)
        .filter(|(&k, _)| k <= n)
        .map(|(&k, &p)| p * table.gamma[k as usize - 1])
        .sum())
}

/// Exact full-foresight value `M_n = sum_i (a_i - a_{i-1}) P(max >= a_i)`.
///
/// `P(max < z)` is computed by the backward recursion
/// `q_j = P(X < z) * sum_k P(T = k) (q_{j+k} if j+k <= n else 1)`, assembled
/// over the first-arrival law; evaluating `P(X < z)` strictly below each
/// atom gives the half-open convention `P(max >= a_i)` needs.
pub fn renewal_prophet_value(
    gaps: &RenewalDist,
    d: &FiniteDist,
    n: u32,
) -> Result<f64, RenewalError> {
    if n == 0 {
        return Err(RenewalError::BadHorizon(n));
    }
    let n_us = n as usize;
    let mut total = 0.0;
    let mut prev = 0.0;
    for &a in d.atoms() {
        if a > prev {
            let below = d.below_prob(a);
            let mut q = vec![0.0; n_us];
            for j in (1..=n_us).rev() {
                let onward: f64 = gaps
                    .support
                    .iter()
                    .zip(&gaps.probs)
                    .map(|(&k, &p)| {
                        p * if j + (k as usize) <= n_us {
                            q[j + k as usize - 1]
                        } else {
                            1.0
                        }
                    })
                    .sum();
                q[j - 1] = below * onward;
            }
            let all_below: f64 = gaps
                .support
                .iter()
                .zip(&gaps.probs)
                .map(|(&k, &p)| p * if k <= n { q[k as usize - 1] } else { 1.0 })
                .sum();
            total += (a - prev) * (1.0 - all_below);
        }
        prev = a;
    }
    Ok(total)
}

/// The binomial process: each integer time is independently a renewal with
/// probability `p`, so the per-slot observations are i.i.d. with law
/// `p F + (1-p) delta_0`.  Returns `(M_n, V_n)` computed directly on that
/// i.i.d. representation.
pub fn binomial_process_values(p: f64, d: &FiniteDist, n: u32) -> Result<(f64, f64), RenewalError> {
    if !(0.0..=1.0).contains(&p) || p <= 0.0 {
        return Err(RenewalError::BadParameter {
            name: "p",
            value: p,
        });
    }
    if n == 0 {
        return Err(RenewalError::BadHorizon(n));
    }
    let slot_law = if p < 1.0 {
        let mut atoms = vec![0.0];
        let mut weights = vec![1.0 - p];
        for (&a, &q) in d.atoms().iter().zip(d.probs()) {
            atoms.push(a);
            weights.push(p * q);
        }
        FiniteDist::from_weights(&atoms, &weights).expect("mixture of a valid law")
    } else {
        d.clone()
    };

    // V_n: classic i.i.d. backward induction v_{k} = E(Y v v_{k-1}).
    let mut v = 0.0;
    for _ in 0..n {
        v = slot_law
            .atoms()
            .iter()
            .zip(slot_law.probs())
            .map(|(&a, &q)| q * a.max(v))
            .sum();
    }

    // M_n via P(max < a_i)^... = P(Y < a_i)^n.
    let mut m = 0.0;
    let mut prev = 0.0;
    for &a in slot_law.atoms() {
        if a > prev {
            m += (a - prev) * (1.0 - slot_law.below_prob(a).powi(n as i32));
        }
        prev = a;
    }
    Ok((m, v))
}

fn check_unit_open(name: &'static str, value: f64) -> Result<(), RenewalError> {
    if !value.is_finite() || value <= 0.0 || value >= 1.0 {
        return Err(RenewalError::BadParameter { name, value });
    }
    Ok(())
}

/// The two-gap family `T in {1, n}` with `P(T = 1) = p` and the two-point
/// offer law calibrated so that declining never helps: `X in {eps, 1}` with
/// `P(X = 1) = pi` and `eps = p pi / (1 - p(1 - pi))`.
pub fn counterexample_instance(
    n: u32,
    p: f64,
    pi: f64,
) -> Result<(RenewalDist, FiniteDist), RenewalError> {
    if n < 2 {
        return Err(RenewalError::BadHorizon(n));
    }
    check_unit_open("p", p)?;
    check_unit_open("pi", pi)?;
    let gaps = RenewalDist::new(&[1, n], &[p, 1.0 - p])?;
    let eps = p * pi / (1.0 - p * (1.0 - pi));
    let offers = FiniteDist::from_probs(&[eps, 1.0], &[1.0 - pi, pi])
        .expect("eps lies strictly inside (0, 1)");
    Ok((gaps, offers))
}

/// Closed forms for the two-gap family: the ratio
/// `R_n = 1 + p(1-p) [ (1 - (p(1-pi))^n) / (1 - p(1-pi)) - 1 ]`
/// and the matching difference `D_n`.
pub fn counterexample_metrics(n: u32, p: f64, pi: f64) -> Result<(f64, f64), RenewalError> {
    if n < 2 {
        return Err(RenewalError::BadHorizon(n));
    }
    check_unit_open("p", p)?;
    check_unit_open("pi", pi)?;
    let q = p * (1.0 - pi);
    let geometric_sum = (1.0 - q.powi(n as i32)) / (1.0 - q) - 1.0;
    let ratio = 1.0 + p * (1.0 - p) * geometric_sum;
    let diff = p * (1.0 - p) * pi / (1.0 - q) * geometric_sum;
    Ok((ratio, diff))
}

/// The supremum of the family's limiting ratio over `p`:
/// `c_n = 1 + (2/(n+1))^{2/(n-1)} (n-1)/(n+1)`, increasing to 2.
pub fn counterexample_ratio_sup(n: u32) -> Result<f64, RenewalError> {
    if n < 2 {
        return Err(RenewalError::BadHorizon(n));
    }
    let nf = n as f64;
    Ok(1.0 + (2.0 / (nf + 1.0)).powf(2.0 / (nf - 1.0)) * (nf - 1.0) / (nf + 1.0))
}

/// Grid-search exploration of the two-gap family.  Reports the largest
/// ratio and difference found; no optimality claim is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploreResult {
    pub max_ratio: f64,
    pub ratio_at: (f64, f64),
    pub max_diff: f64,
    pub diff_at: (f64, f64),
}

pub fn explore_counterexample(n: u32, grid: usize) -> Result<ExploreResult, RenewalError> {
    if n < 2 {
        return Err(RenewalError::BadHorizon(n));
    }
    let grid = grid.max(8);
    let mut out = ExploreResult {
        max_ratio: 0.0,
        ratio_at: (0.0, 0.0),
        max_diff: 0.0,
        diff_at: (0.0, 0.0),
    };
    for i in 0..grid {
        let p = (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let pi = (j as f64 + 0.5) / grid as f64;
            let (r, d) = counterexample_metrics(n, p, pi)?;
            if r > out.max_ratio {
                out.max_ratio = r;
                out.ratio_at = (p, pi);
            }
            if d > out.max_diff {
                out.max_diff = d;
                out.diff_at = (p, pi);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hill_kertz::{alpha_n_cached, alpha_zero_cached, beta_n_cached};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(atoms: &[f64], probs: &[f64]) -> FiniteDist {
        FiniteDist::from_probs(atoms, probs).unwrap()
    }

    /// Exhaustive tree recursion over all gap/value outcome sequences.
    fn brute_force(gaps: &RenewalDist, d: &FiniteDist, n: u32) -> (f64, f64) {
        fn max_rec(gaps: &RenewalDist, d: &FiniteDist, n: u32, time: u32, cur: f64) -> f64 {
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
                            .map(|(&a, &q)| q * max_rec(gaps, d, n, time + k, cur.max(a)))
                            .sum::<f64>()
                    }
                })
                .sum()
        }
        fn val_rec(gaps: &RenewalDist, d: &FiniteDist, n: u32, time: u32) -> f64 {
            gaps.support()
                .iter()
                .zip(gaps.probs())
                .map(|(&k, &p)| {
                    if time + k > n {
                        0.0
                    } else {
                        let cont = val_rec(gaps, d, n, time + k);
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
        (max_rec(gaps, d, n, 0, 0.0), val_rec(gaps, d, n, 0))
    }

    #[test]
    fn construction_and_errors() {
        assert!(matches!(
            RenewalDist::new(&[], &[]),
            Err(RenewalError::Empty)
        ));
        assert!(matches!(
            RenewalDist::new(&[0], &[1.0]),
            Err(RenewalError::BadSupport(0))
        ));
        assert!(matches!(
            RenewalDist::new(&[1], &[-1.0]),
            Err(RenewalError::BadWeight(_))
        ));
        assert!(matches!(
            RenewalDist::new(&[1, 2], &[0.0, 0.0]),
            Err(RenewalError::ZeroTotalWeight)
        ));
        let t = RenewalDist::new(&[2, 1, 2], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.support(), &[1, 2]);
        assert!((t.probs()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn spec_round_trip() {
        let t = RenewalDist::new(&[1, 5], &[0.3, 0.7]).unwrap();
        let parsed = RenewalDist::parse_spec(&t.spec_string()).unwrap();
        assert_eq!(parsed, t);
        assert!(matches!(
            RenewalDist::parse_spec("1:0.3,5:0.3"),
            Err(RenewalError::ProbSum(_))
        ));
        assert!(matches!(
            RenewalDist::parse_spec("x:1"),
            Err(RenewalError::SpecSyntax(_))
        ));
    }

    #[test]
    fn unit_gaps_reduce_to_iid_stopping() {
        let d = dist(&[0.5, 1.0, 3.0], &[0.3, 0.4, 0.3]);
        for n in 1..=8u32 {
            // Direct i.i.d. induction.
            let mut v = 0.0;
            for _ in 0..n {
                v = d
                    .atoms()
                    .iter()
                    .zip(d.probs())
                    .map(|(&a, &q)| q * a.max(v))
                    .sum();
            }
            let engine = renewal_optimal_value(&RenewalDist::unit(), &d, n).unwrap();
            assert!((engine - v).abs() < 1e-14);

            // M_n = sum (a_i - a_{i-1}) (1 - F(a_i^-)^n).
            let mut m = 0.0;
            let mut prev = 0.0;
            for &a in d.atoms() {
                m += (a - prev) * (1.0 - d.below_prob(a).powi(n as i32));
                prev = a;
            }
            let engine_m = renewal_prophet_value(&RenewalDist::unit(), &d, n).unwrap();
            assert!((engine_m - m).abs() < 1e-14);
        }
    }

    #[test]
    fn horizon_zero_rejected() {
        let d = dist(&[1.0], &[1.0]);
        assert!(matches!(
            renewal_optimal_value(&RenewalDist::unit(), &d, 0),
            Err(RenewalError::BadHorizon(0))
        ));
        assert!(matches!(
            renewal_prophet_value(&RenewalDist::unit(), &d, 0),
            Err(RenewalError::BadHorizon(0))
        ));
    }

    #[test]
    fn calibrated_two_gap_family_pins_gamma_at_the_mean() {
        let (n, p, pi) = (6, 0.6, 0.3);
        let (gaps, offers) = counterexample_instance(n, p, pi).unwrap();
        let table = gamma_table(&gaps, &offers, n).unwrap();
        let mean = offers.mean();
        for &g in &table.gamma {
            assert!(
                (g - mean).abs() < 1e-12,
                "gamma {g} should equal E X = {mean}"
            );
        }
        let v = renewal_optimal_value(&gaps, &offers, n).unwrap();
        assert!((v - mean).abs() < 1e-12);
    }

    #[test]
    fn closed_forms_match_the_engine() {
        for n in 2..=12u32 {
            for &(p, pi) in &[(0.3, 0.4), (0.6, 0.1), (0.9, 0.7), (0.99, 0.0099)] {
                let (gaps, offers) = counterexample_instance(n, p, pi).unwrap();
                let m = renewal_prophet_value(&gaps, &offers, n).unwrap();
                let v = renewal_optimal_value(&gaps, &offers, n).unwrap();
                let (ratio, diff) = counterexample_metrics(n, p, pi).unwrap();
                assert!(
                    (m / v - ratio).abs() < 1e-10,
                    "ratio mismatch at n={n}, p={p}, pi={pi}: {} vs {ratio}",
                    m / v
                );
                assert!(
                    (m - v - diff).abs() < 1e-10,
                    "difference mismatch at n={n}, p={p}, pi={pi}"
                );
            }
        }
    }

    #[test]
    fn engine_matches_exhaustive_enumeration() {
        let gap_laws = [
            RenewalDist::unit(),
            RenewalDist::new(&[2], &[1.0]).unwrap(),
            RenewalDist::new(&[1, 2], &[0.3, 0.7]).unwrap(),
            RenewalDist::new(&[1, 3], &[0.5, 0.5]).unwrap(),
            RenewalDist::new(&[2, 5], &[0.4, 0.6]).unwrap(),
        ];
        let offer_laws = [
            dist(&[1.0], &[1.0]),
            dist(&[1.0, 2.0], &[0.6, 0.4]),
            dist(&[0.5, 1.0, 3.0], &[0.3, 0.5, 0.2]),
            dist(&[0.0, 1.0], &[0.5, 0.5]),
        ];
        for gaps in &gap_laws {
            for offers in &offer_laws {
                for n in 1..=6u32 {
                    let (m_oracle, v_oracle) = brute_force(gaps, offers, n);
                    let m = renewal_prophet_value(gaps, offers, n).unwrap();
                    let v = renewal_optimal_value(gaps, offers, n).unwrap();
                    assert!(
                        (m - m_oracle).abs() < 1e-12,
                        "M mismatch: gaps {} offers {} n {n}: {m} vs {m_oracle}",
                        gaps.spec_string(),
                        offers.spec_string()
                    );
                    assert!(
                        (v - v_oracle).abs() < 1e-12,
                        "V mismatch: gaps {} offers {} n {n}: {v} vs {v_oracle}",
                        gaps.spec_string(),
                        offers.spec_string()
                    );
                }
            }
        }
    }

    #[test]
    fn binomial_process_matches_geometric_gaps() {
        let d = dist(&[0.2, 0.7, 1.0], &[0.4, 0.35, 0.25]);
        for &p in &[0.2, 0.5, 0.9] {
            for n in [1u32, 3, 7, 12, 20] {
                let (m_iid, v_iid) = binomial_process_values(p, &d, n).unwrap();
                let gaps = RenewalDist::geometric(p, n).unwrap();
                let m = renewal_prophet_value(&gaps, &d, n).unwrap();
                let v = renewal_optimal_value(&gaps, &d, n).unwrap();
                assert!(
                    (m - m_iid).abs() < 1e-10,
                    "M: {m} vs {m_iid} (p={p}, n={n})"
                );
                assert!(
                    (v - v_iid).abs() < 1e-10,
                    "V: {v} vs {v_iid} (p={p}, n={n})"
                );
            }
        }
        // p = 1 collapses to unit gaps.
        let (m1, v1) = binomial_process_values(1.0, &d, 5).unwrap();
        assert!((m1 - renewal_prophet_value(&RenewalDist::unit(), &d, 5).unwrap()).abs() < 1e-14);
        assert!((v1 - renewal_optimal_value(&RenewalDist::unit(), &d, 5).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn binomial_process_obeys_the_iid_constants() {
        let d = dist(&[0.2, 0.7, 1.0], &[0.4, 0.35, 0.25]);
        for &p in &[0.3, 0.8] {
            for n in [2u32, 5, 10] {
                let (m, v) = binomial_process_values(p, &d, n).unwrap();
                let a_n = 1.0 + alpha_n_cached(n as u64);
                assert!(m <= a_n * v + 1e-12);
                // Offers live in [0, 1], so the difference constant applies.
                assert!(m - v <= beta_n_cached(n as u64) + 1e-12);
            }
        }
    }

    #[test]
    fn ratio_limit_as_pi_vanishes() {
        let (n, p) = (7u32, 0.6);
        let (r, _) = counterexample_metrics(n, p, 1e-9).unwrap();
        let limit = 1.0 + p * p - p.powi(n as i32 + 1);
        assert!((r - limit).abs() < 1e-7);
    }

    #[test]
    fn difference_limit_in_n() {
        let (p, pi) = (0.8, 0.15);
        let q = p * (1.0 - pi);
        let limit = p * p * (1.0 - p) * pi * (1.0 - pi) / ((1.0 - q) * (1.0 - q));
        let (_, d_big) = counterexample_metrics(900, p, pi).unwrap();
        assert!((d_big - limit).abs() < 1e-12);
    }

    #[test]
    fn difference_approaches_one_quarter() {
        let p = 0.99;
        let pi = (1.0 - p) / (2.0 - p);
        let (r, d) = counterexample_metrics(1000, p, pi).unwrap();
        assert!(d > 0.24, "D_1000 = {d}");
        assert!((d - 0.245024999485).abs() < 1e-9);
        assert!((r - 1.49004999897).abs() < 1e-9);
    }

    #[test]
    fn ratio_sup_values() {
        let c5 = counterexample_ratio_sup(5).unwrap();
        assert!((c5 - 1.3849).abs() < 1e-4);
        assert!(
            c5 > 1.0 + alpha_zero_cached(),
            "the Poisson constant fails here"
        );
        let c_big = counterexample_ratio_sup(1_000_000).unwrap();
        assert!((c_big - 2.0).abs() < 1e-3);
        assert!(matches!(
            counterexample_ratio_sup(1),
            Err(RenewalError::BadHorizon(1))
        ));
    }

    #[test]
    fn maximizing_p_reproduces_the_sup() {
        for n in [3u32, 5, 12, 40] {
            let nf = n as f64;
            let p_star = (2.0 / (nf + 1.0)).powf(1.0 / (nf - 1.0));
            let at_p_star = 1.0 + p_star * p_star - p_star.powi(n as i32 + 1);
            let sup = counterexample_ratio_sup(n).unwrap();
            assert!((at_p_star - sup).abs() < 1e-12);
        }
    }

    #[test]
    fn explore_reports_classical_scale_violations() {
        let result = explore_counterexample(40, 64).unwrap();
        // The family beats the Poisson-case ratio constant for large n ...
        assert!(result.max_ratio > 1.0 + alpha_zero_cached());
        // ... but the classical independent-case ceilings still hold.
        assert!(result.max_ratio < 2.0);
        assert!(result.max_diff < 0.25);
    }

    #[test]
    fn prophet_between_one_and_two_times_the_stopper() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=12u32);
            let count = rng.gen_range(1..=3usize);
            let mut support: Vec<u32> = (0..count).map(|_| rng.gen_range(1..=5)).collect();
            support.dedup();
            let weights: Vec<f64> = support.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
            let gaps = RenewalDist::new(&support, &weights).unwrap();
            let d = crate::bounds::random_instance_in(&mut rng, 0.01, 10.0, 4);
            let m = renewal_prophet_value(&gaps, &d, n).unwrap();
            let v = renewal_optimal_value(&gaps, &d, n).unwrap();
            assert!(v <= m + 1e-12, "V must not exceed M");
            assert!(
                m <= 2.0 * v + 1e-9,
                "classical doubling bound failed: M={m}, V={v} (gaps {}, offers {}, n={n})",
                gaps.spec_string(),
                d.spec_string()
            );
        }
    }
}
