//! Monte Carlo bookkeeping: running moments, binomial confidence intervals,
//! a Kolmogorov–Smirnov test, and an order-stable parallel trial driver.

use rayon::prelude::*;
use std::ops::Range;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Trials per work unit for the parallel driver. Fixed so that the reduction
/// tree, and therefore every floating-point sum, is independent of the
/// worker count.
pub const CHUNK: u64 = 2048;

/// Running mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean, `s / sqrt(N)`.
    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Survival function of the Kolmogorov distribution, `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.27 {
        // Series below converges too slowly here; the value is 1 to double precision.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Outcome of a one-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
///
/// The p-value uses the asymptotic Kolmogorov law with Stephens' small-sample
/// correction of the scale factor.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> KsOutcome {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max(hi - f).max(f - lo);
    }
    let sqrt_n = n.sqrt();
    let scale = sqrt_n + 0.12 + 0.11 / sqrt_n;
    KsOutcome {
        statistic: d,
        p_value: kolmogorov_sf(scale * d),
    }
}

/// Evaluate `work` on consecutive chunks of `0..trials` in parallel and return
/// the chunk results in index order.
pub fn run_chunked<T, F>(trials: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            work(start..(start + CHUNK).min(trials))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::new();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::new();
        let mut b = Moments::new();
        xs[..333].iter().for_each(|&x| a.push(x));
        xs[333..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert_eq!(a.count(), 1000);
        assert_relative_eq!(a.mean(), all.mean(), max_relative = 1e-12);
        assert_relative_eq!(a.variance(), all.variance(), max_relative = 1e-10);
    }

    #[test]
    fn wilson_known_value() {
        // 10/100 at 95%: textbook value (0.0552, 0.1744).
        let (lo, hi) = wilson_interval(10, 100, Z95);
        assert!((lo - 0.0552).abs() < 1e-3);
        assert!((hi - 0.1744).abs() < 1e-3);
        let (lo, hi) = wilson_interval(0, 100, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // Tabulated critical values: P(K > 1.3581) = 0.05, P(K > 1.9495) = 0.001.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.9495) - 0.001).abs() < 2e-5);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn chunk_results_come_back_in_order() {
        let starts = run_chunked(5 * CHUNK + 3, |r| r.start);
        assert_eq!(starts.len(), 6);
        assert!(starts.windows(2).all(|w| w[1] == w[0] + CHUNK));
        let total: u64 = run_chunked(5 * CHUNK + 3, |r| r.end - r.start).iter().sum();
        assert_eq!(total, 5 * CHUNK + 3);
    }
}
