//! One-sided confidence contours for an empirical distribution function.
//!
//! For `n` independent samples from a continuous distribution `F`, the
//! probability that the empirical distribution function shifted up by `ε`
//! stays above `F` everywhere does not depend on `F`:
//!
//! ```text
//! P(n, ε) = 1 − ε · Σ_{j=0}^{⌊n(1−ε)⌋} C(n,j) (1 − ε − j/n)^(n−j) (ε + j/n)^(j−1)
//! ```
//!
//! [`p_of_epsilon`] evaluates it, [`epsilon_of_p`] inverts it, and
//! [`mc_oracle_p`] estimates the same probability by brute force.

use std::f64::consts::PI;

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::StreamFactory;
use crate::{Error, Result};

/// Lower end of the bisection bracket for [`epsilon_of_p`].
const EPSILON_FLOOR: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;
const BISECTION_WIDTH: f64 = 1e-10;
/// Relative slack applied to `n(1−ε)` before flooring.
const FLOOR_SLACK: f64 = 1e-12;

const ORACLE_DOMAIN: u64 = 0x6f72_6163_6c65;

/// Sample size and relative shift of a contour, validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourQuery {
    n: usize,
    epsilon: f64,
}

impl ContourQuery {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("number of deliveries must be at least 1"));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::invalid(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(Self { n, epsilon })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Probability that the contour majorizes the true distribution function.
    pub fn probability(&self) -> f64 {
        let n = self.n;
        let eps = self.epsilon;
        if eps >= 1.0 {
            return 1.0;
        }
        let nf = n as f64;

        let reach = nf * (1.0 - eps);
        let upper = ((reach + FLOOR_SLACK * reach.max(1.0)).floor() as usize).min(n - 1);

        // With p = ε + j/n the j-th summand is C(n,j) p^(j−1) (1−p)^(n−j),
        // i.e. a binomial probability divided by p. For j = 0 the leading ε
        // cancels the 1/p.
        let mut sum = (nf * (-eps).ln_1p()).exp();
        for j in 1..=upper {
            let jf = j as f64;
            let mean_hits = jf + nf * eps;
            let mean_misses = (n - j) as f64 - nf * eps;
            if mean_misses <= 0.0 {
                // zero base raised to a positive power
                continue;
            }
            let p = mean_hits / nf;
            sum += eps * binomial_pmf(j, n, mean_hits, mean_misses) / p;
        }

        (1.0 - sum).clamp(0.0, 1.0)
    }
}

/// `C(n,k) p^k q^(n−k)` for `0 < k < n`, given `np` and `nq`.
///
/// Uses Loader's saddle-point form: Stirling remainders and the deviance
/// `bd0` are evaluated directly, so nothing of size `ln n!` is ever
/// subtracted and the result keeps full relative precision for large `n`.
fn binomial_pmf(k: usize, n: usize, np: f64, nq: f64) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    let rest = (n - k) as f64;
    let lc = stirling_remainder(n)
        - stirling_remainder(k)
        - stirling_remainder(n - k)
        - deviance(kf, np)
        - deviance(rest, nq);
    let lf = (2.0 * PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `ln n! − ln(√(2πn) (n/e)^n)`.
fn stirling_remainder(n: usize) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    if n <= 15 {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return ln_fact - (nf + 0.5) * nf.ln() + nf - 0.5 * (2.0 * PI).ln();
    }
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// `x ln(x/m) + m − x`, accurate when `x ≈ m`.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let v2 = v * v;
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let next = s + ej / (2.0 * j + 1.0);
            if next == s {
                return next;
            }
            s = next;
            j += 1.0;
        }
    }
    x * (x / m).ln() + m - x
}

/// Non-shortage probability `P(n, ε)`.
pub fn p_of_epsilon(n: usize, epsilon: f64) -> Result<f64> {
    Ok(ContourQuery::new(n, epsilon)?.probability())
}

/// Relative initial stock `ε(n, p)` solving `P(n, ε) = p`.
///
/// `P` is continuous and non-decreasing in `ε`, tends to 0 as `ε → 0⁺` and
/// equals 1 at `ε = 1`, so bisection on `[1e-12, 1]` always brackets the root.
pub fn epsilon_of_p(n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("number of deliveries must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let prob = |eps: f64| ContourQuery { n, epsilon: eps }.probability();

    let (mut lo, mut hi) = (EPSILON_FLOOR, 1.0_f64);
    if prob(lo) >= p {
        return Ok(lo);
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo < BISECTION_WIDTH {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if prob(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sorted delivery times on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    times: Vec<f64>,
    horizon: f64,
}

impl SamplePath {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::invalid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if let Some(bad) = times.iter().find(|t| !(**t >= 0.0 && **t <= horizon)) {
            return Err(Error::invalid(format!(
                "delivery time {bad} outside [0, {horizon}]"
            )));
        }
        if times.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("delivery times must be sorted"));
        }
        Ok(Self { times, horizon })
    }

    /// Sorts `times` first; only the order statistics matter.
    pub fn from_unsorted(mut times: Vec<f64>, horizon: f64) -> Result<Self> {
        times.sort_by(f64::total_cmp);
        Self::new(times, horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of deliveries at or before `t`.
    pub fn arrived_by(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }

    /// Fraction of samples at or before `t`; 1 from the horizon on.
    pub fn empirical_cdf(&self, t: f64) -> f64 {
        if t >= self.horizon || self.times.is_empty() {
            return if t >= self.horizon { 1.0 } else { 0.0 };
        }
        self.arrived_by(t) as f64 / self.times.len() as f64
    }

    /// Empirical CDF shifted up by `epsilon`, capped at 1.
    pub fn upper_contour(&self, epsilon: f64, t: f64) -> f64 {
        (self.empirical_cdf(t) + epsilon).min(1.0)
    }
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub trials: u64,
    pub successes: u64,
    pub probability: f64,
    pub std_error: f64,
}

impl OracleEstimate {
    pub(crate) fn from_counts(trials: u64, successes: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            trials,
            successes,
            probability: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

/// Brute-force estimate of `P(n, ε)` from uniform order statistics.
///
/// A trial succeeds when `u₍ₖ₎ − (k−1)/n ≤ ε` for every `k`: the identity
/// CDF minus the empirical step function peaks at left limits of the jumps.
pub fn mc_oracle_p(n: usize, epsilon: f64, trials: u64, seed: u64) -> Result<OracleEstimate> {
    ContourQuery::new(n, epsilon)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let streams = StreamFactory::new(seed, ORACLE_DOMAIN);
    let nf = n as f64;

    let successes = (0..trials)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf: &mut Vec<f64>, i| {
                let mut rng = streams.stream(i);
                buf.clear();
                buf.extend((0..n).map(|_| rng.sample::<f64, _>(Open01)));
                buf.sort_unstable_by(f64::total_cmp);
                buf.iter()
                    .enumerate()
                    .all(|(k, &u)| u - k as f64 / nf <= epsilon)
            },
        )
        .filter(|&ok| ok)
        .count() as u64;

    Ok(OracleEstimate::from_counts(trials, successes))
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit evaluations of the closed form (mpmath), independent of the
    // log-space summation used here.
    const REFERENCE: &[(usize, f64, f64)] = &[
        (2, 0.3, 0.39),
        (3, 0.5, 0.833_333_333_333_333_3),
        (10, 0.25, 0.755_086_275_166_015_6),
        (100, 0.1, 0.873_409_341_543_718_3),
        (1000, 0.03, 0.837_968_286_045_449_2),
        (10_000, 0.01, 0.865_563_968_481_210_5),
        (10_000, 0.005, 0.395_482_695_244_365_4),
    ];

    // ε(n, 0.9) from 200-step bisection on the same 40-digit evaluation.
    const EPSILON_AT_90: &[(usize, f64)] = &[
        (5, 0.446_980_061_212),
        (8, 0.358_313_115_176),
        (10, 0.322_601_559_626),
        (20, 0.231_555_349_409),
        (40, 0.165_471_639_936),
        (50, 0.148_398_125_739),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(n, eps, want) in REFERENCE {
            let got = p_of_epsilon(n, eps).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "P({n}, {eps}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn single_delivery_reduces_to_epsilon() {
        assert!((p_of_epsilon(1, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!((epsilon_of_p(1, 0.75).unwrap() - 0.75).abs() < 1e-10);
    }

    #[test]
    fn full_shift_is_certain() {
        assert_eq!(p_of_epsilon(7, 1.0).unwrap(), 1.0);
        assert_eq!(p_of_epsilon(1, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn epsilon_values_near_ninety_percent() {
        assert!((p_of_epsilon(5, 0.4470).unwrap() - 0.9).abs() < 1e-3);
        assert!((p_of_epsilon(50, 0.14840).unwrap() - 0.9).abs() < 1e-3);
        for &(n, want) in EPSILON_AT_90 {
            let got = epsilon_of_p(n, 0.9).unwrap();
            assert!((got - want).abs() < 1e-10, "eps({n}) = {got}");
        }
    }

    #[test]
    fn rejects_invalid_queries() {
        assert!(p_of_epsilon(0, 0.5).is_err());
        assert!(p_of_epsilon(3, 0.0).is_err());
        assert!(p_of_epsilon(3, 1.01).is_err());
        assert!(p_of_epsilon(3, f64::NAN).is_err());
        assert!(epsilon_of_p(0, 0.5).is_err());
        assert!(epsilon_of_p(3, 1.0).is_err());
        assert!(epsilon_of_p(3, 0.0).is_err());
        assert!(mc_oracle_p(3, 0.5, 0, 1).is_err());
    }

    #[test]
    fn breakpoints_are_continuous() {
        // ε = 1 − j/n makes the last summand vanish; neighbours must agree.
        for n in [3usize, 7, 20] {
            for j in 1..n {
                let eps = 1.0 - j as f64 / n as f64;
                let at = p_of_epsilon(n, eps).unwrap();
                let below = p_of_epsilon(n, eps - 1e-13).unwrap();
                let above = p_of_epsilon(n, eps + 1e-13).unwrap();
                assert!((at - below).abs() < 1e-9 && (at - above).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empirical_cdf_steps() {
        let path = SamplePath::new(vec![0.2, 0.6], 1.0).unwrap();
        assert_eq!(path.empirical_cdf(0.5), 0.5);
        assert_eq!(path.empirical_cdf(1.0), 1.0);
        assert_eq!(path.empirical_cdf(0.1), 0.0);
        // right-continuous at jumps
        assert_eq!(path.empirical_cdf(0.2), 0.5);
        assert_eq!(path.empirical_cdf(0.2 - 1e-9), 0.0);
        assert_eq!(path.empirical_cdf(0.6), 1.0);
        assert_eq!(path.empirical_cdf(0.6 - 1e-9), 0.5);
    }

    #[test]
    fn upper_contour_caps_at_one() {
        let path = SamplePath::new(vec![0.2, 0.6], 1.0).unwrap();
        assert!((path.upper_contour(0.3, 0.5) - 0.8).abs() < 1e-15);
        assert_eq!(path.upper_contour(0.3, 0.9), 1.0);
        for t in [0.0, 0.1, 0.4, 0.7, 2.0] {
            assert_eq!(path.upper_contour(1.0, t), 1.0);
        }
    }

    #[test]
    fn sample_path_validation() {
        assert!(SamplePath::new(vec![0.5, 0.2], 1.0).is_err());
        assert!(SamplePath::new(vec![0.5, 1.2], 1.0).is_err());
        assert!(SamplePath::new(vec![0.5], 0.0).is_err());
        let p = SamplePath::from_unsorted(vec![0.5, 0.2], 1.0).unwrap();
        assert_eq!(p.times(), &[0.2, 0.5]);
    }

    #[test]
    fn oracle_is_deterministic() {
        let a = mc_oracle_p(5, 0.3, 2000, 9).unwrap();
        let b = mc_oracle_p(5, 0.3, 2000, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a.successes,
            mc_oracle_p(5, 0.3, 2000, 10).unwrap().successes
        );
    }

    #[test]
    fn oracle_full_shift_always_succeeds() {
        let est = mc_oracle_p(5, 1.0, 100, 3).unwrap();
        assert_eq!(est.probability, 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn oracle_single_delivery() {
        let est = mc_oracle_p(1, 0.5, 1_000_000, 11).unwrap();
        assert!((est.probability - 0.5).abs() <= 3.0 * est.std_error);
    }

    #[test]
    fn oracle_agrees_for_five_deliveries() {
        let est = mc_oracle_p(5, 0.4470, 1_000_000, 12).unwrap();
        let sigma = (0.9f64 * 0.1 / 1e6).sqrt();
        assert!((est.probability - 0.9).abs() <= 3.0 * sigma, "{est:?}");
    }
}
