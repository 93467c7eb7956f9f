//! Convergence diagnostics and posterior summaries.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which chains enter the potential scale reduction factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhatMode {
    /// Whole chains.
    #[default]
    Unsplit,
    /// Each chain is cut into two halves first (middle draw dropped for odd
    /// lengths).
    Split,
}

/// Gelman–Rubin potential scale reduction factor.
///
/// With `m` chains of length `n`, chain means `x_j` and chain variances
/// `s_j^2` (denominator `n - 1`):
///
/// ```text
/// W = mean_j s_j^2
/// B = n / (m - 1) * sum_j (x_j - x)^2
/// V = (n - 1) / n * W + B / n
/// R = sqrt(V / W)
/// ```
///
/// Identical chains give `B = 0` and therefore `R = sqrt((n - 1) / n) <= 1`.
pub fn gelman_rubin<T: Scalar, C: AsRef<[T]>>(chains: &[C], mode: RhatMode) -> Result<T> {
    let split_storage: Vec<&[T]>;
    let chains: Vec<&[T]> = match mode {
        RhatMode::Unsplit => chains.iter().map(|c| c.as_ref()).collect(),
        RhatMode::Split => {
            split_storage = chains
                .iter()
                .flat_map(|c| {
                    let c = c.as_ref();
                    let half = c.len() / 2;
                    [&c[..half], &c[c.len() - half..]]
                })
                .collect();
            split_storage
        }
    };
    if chains.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: chains.len() });
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::DimensionMismatch("chains must have equal length".into()));
    }
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let nf = T::from_count(n);
    let mf = T::from_count(chains.len());
    let means: Vec<T> = chains.iter().map(|c| c.iter().copied().sum::<T>() / nf).collect();
    let vars: Vec<T> = chains
        .iter()
        .zip(&means)
        .map(|(c, &m)| c.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / (nf - T::one()))
        .collect();
    let w = vars.iter().copied().sum::<T>() / mf;
    if !(w > T::zero()) {
        return Err(Error::InvalidData("within-chain variance is zero".into()));
    }
    let grand = means.iter().copied().sum::<T>() / mf;
    let b = nf / (mf - T::one()) * means.iter().map(|&m| (m - grand) * (m - grand)).sum::<T>();
    let v = (nf - T::one()) / nf * w + b / nf;
    Ok((v / w).sqrt())
}

/// Shortest interval spanning `ceil(mass * N)` consecutive order statistics.
/// Ties between equally short windows go to the left-most one.
pub fn hpd_interval<T: Scalar>(samples: &[T], mass: T) -> Result<(T, T)> {
    if !(mass > T::zero() && mass < T::one()) {
        return Err(Error::InvalidParameter(format!("mass must lie in (0, 1), got {mass}")));
    }
    let needed = (T::one() / (T::one() - mass)).ceil().to_usize().unwrap_or(usize::MAX);
    if samples.len() < needed || samples.is_empty() {
        return Err(Error::InsufficientSamples { needed, got: samples.len() });
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidData("samples contain NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let count = (mass * T::from_count(sorted.len())).ceil().to_usize().unwrap().clamp(1, sorted.len());
    let mut best = 0;
    let mut best_width = sorted[count - 1] - sorted[0];
    for start in 1..=(sorted.len() - count) {
        let width = sorted[start + count - 1] - sorted[start];
        if width < best_width {
            best = start;
            best_width = width;
        }
    }
    Ok((sorted[best], sorted[best + count - 1]))
}

pub fn mean<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_count(v.len().max(1))
}

/// Sample standard deviation (denominator `N - 1`).
pub fn std_dev<T: Scalar>(v: &[T]) -> T {
    if v.len() < 2 {
        return T::zero();
    }
    let m = mean(v);
    (v.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_count(v.len() - 1)).sqrt()
}

/// Linear-interpolated quantile of an unsorted sample (type 7).
pub fn quantile<T: Scalar>(v: &[T], q: T) -> T {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let h = (T::from_count(s.len() - 1)) * q;
    let lo = h.floor().to_usize().unwrap();
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - T::from_count(lo)) * (s[hi] - s[lo])
}

/// Posterior summary of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSummary<T> {
    pub mean: T,
    pub sd: T,
    pub hpd_low: T,
    pub hpd_high: T,
    /// Only present when at least two chains were supplied.
    pub rhat: Option<T>,
}

/// Pools the chains for mean, SD and HPD; computes R-hat across them.
pub fn summarize<T: Scalar, C: AsRef<[T]>>(chains: &[C], mass: T, mode: RhatMode) -> Result<ParameterSummary<T>> {
    let pooled: Vec<T> = chains.iter().flat_map(|c| c.as_ref().iter().copied()).collect();
    if pooled.is_empty() {
        return Err(Error::EmptyDraws);
    }
    let (hpd_low, hpd_high) = hpd_interval(&pooled, mass)?;
    let rhat = if chains.len() >= 2 { gelman_rubin(chains, mode).ok() } else { None };
    Ok(ParameterSummary { mean: mean(&pooled), sd: std_dev(&pooled), hpd_low, hpd_high, rhat })
}

/// Five-number summary plus mean, as used for replicate tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber<T> {
    pub min: T,
    pub q1: T,
    pub median: T,
    pub q3: T,
    pub max: T,
    pub mean: T,
}

pub fn five_number<T: Scalar>(v: &[T]) -> Result<FiveNumber<T>> {
    if v.is_empty() {
        return Err(Error::EmptyDraws);
    }
    Ok(FiveNumber {
        min: quantile(v, T::zero()),
        q1: quantile(v, T::lit(0.25)),
        median: quantile(v, T::lit(0.5)),
        q3: quantile(v, T::lit(0.75)),
        max: quantile(v, T::one()),
        mean: mean(v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal_stream(seed: u64, n: usize, shift: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| shift + f64::sample_standard_normal(&mut rng)).collect()
    }

    #[test]
    fn identical_chains_at_most_one() {
        let c = normal_stream(1, 500, 0.0);
        let r = gelman_rubin(&[c.clone(), c], RhatMode::Unsplit).unwrap();
        assert!(r <= 1.0);
        assert!((r - (499.0f64 / 500.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn same_stream_converged() {
        let all = normal_stream(2, 20_000, 0.0);
        let r = gelman_rubin(&[&all[..10_000], &all[10_000..]], RhatMode::Unsplit).unwrap();
        assert!(r < 1.01, "rhat {r}");
    }

    #[test]
    fn separated_chains_flagged() {
        let a = normal_stream(3, 1_000, 0.0);
        let b = normal_stream(4, 1_000, 10.0);
        // B ~ n * 50, W ~ 1: R ~ sqrt(1 + 50) ~ 7.1
        let r = gelman_rubin(&[a, b], RhatMode::Unsplit).unwrap();
        assert!(r > 3.0, "rhat {r}");
    }

    #[test]
    fn split_detects_trend() {
        let a: Vec<f64> = (0..400).map(|i| i as f64 / 40.0).collect();
        let b = a.clone();
        assert!(gelman_rubin(&[&a, &b], RhatMode::Split).unwrap() > 1.5);
        assert!(gelman_rubin(&[&a, &b], RhatMode::Unsplit).unwrap() <= 1.0);
    }

    #[test]
    fn rhat_errors() {
        assert!(gelman_rubin(&[vec![1.0, 2.0]], RhatMode::Unsplit).is_err());
        assert!(gelman_rubin(&[vec![1.0, 2.0], vec![1.0]], RhatMode::Unsplit).is_err());
    }

    #[test]
    fn hpd_small_enumeration() {
        let (lo, hi) = hpd_interval(&[5.0, 3.0, 1.0, 4.0, 2.0], 0.6).unwrap();
        assert_eq!((lo, hi), (1.0, 3.0));
        assert!(matches!(
            hpd_interval(&[1.0, 2.0], 0.95),
            Err(Error::InsufficientSamples { needed: 20, got: 2 })
        ));
        assert!(hpd_interval(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn hpd_standard_normal() {
        let s = normal_stream(5, 100_000, 0.0);
        let (lo, hi) = hpd_interval(&s, 0.95).unwrap();
        assert!((lo + 1.96).abs() < 0.05 && (hi - 1.96).abs() < 0.05, "({lo}, {hi})");
    }

    #[test]
    fn quantiles() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        let f = five_number(&v).unwrap();
        assert_eq!((f.min, f.q1, f.median, f.q3, f.max, f.mean), (1.0, 2.0, 3.0, 4.0, 5.0, 3.0));
    }

    fn brute_force_hpd(v: &[f64], mass: f64) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let count = (mass * s.len() as f64).ceil() as usize;
        let mut best = f64::INFINITY;
        for i in 0..s.len() {
            for j in i..s.len() {
                if j - i + 1 >= count {
                    best = best.min(s[j] - s[i]);
                }
            }
        }
        best
    }

    proptest! {
        #[test]
        fn hpd_is_minimal(v in proptest::collection::vec(-50.0..50.0f64, 20..200), mass in 0.5..0.95f64) {
            let (lo, hi) = hpd_interval(&v, mass).unwrap();
            let inside = v.iter().filter(|&&x| x >= lo && x <= hi).count();
            prop_assert!(inside as f64 >= (mass * v.len() as f64).ceil());
            prop_assert!((hi - lo - brute_force_hpd(&v, mass)).abs() < 1e-12);
        }
    }
}
