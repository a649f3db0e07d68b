//! Maximum-likelihood support detection with the content known at the
//! receiver, genie-restricted variants, and the Monte Carlo error harness.
//!
//! With `A` and the full-length content `c` known, every support `b` maps to
//! one constellation point `A (b ⊙ c)`. The ML detector picks the point
//! nearest to `y`. The genie detectors only choose between the true support
//! and its single-swap neighbours (all of them, or one picked at random);
//! their hypothesis sets are subsets of the full one that contain the truth.

pub mod codebook;

use crate::error::{Error, Result};
use crate::linalg::dist_sqr;
use crate::model::{
    assemble_c2, channel, complex_gaussian_vec, sample_matrix, sample_support, MatrixKind, Measurement, ProblemDims,
    SensingMatrixSample, Snr, SupportMask,
};
use crate::seed::MasterSeed;
use crate::special::binomial_u128;
use crate::stats::{run_chunked, wilson_interval, Z95};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

/// Default cap on the number of supports an exhaustive search may visit.
pub const DEFAULT_HYPOTHESIS_CAP: u128 = 1 << 20;

const TRIAL_STREAM: &str = "support";
const NEIGHBOUR_STREAM: &str = "support-neighbour";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DetectorMode {
    /// Search over all `C(n, q)` supports.
    #[value(name = "full")]
    FullMl,
    /// True support and all of its `q (n - q)` nearest neighbours.
    #[value(name = "nn-genie")]
    NearestNeighborsGenie,
    /// True support and one nearest neighbour chosen at random.
    #[value(name = "single-genie")]
    SingleNearestNeighborGenie,
}

impl DetectorMode {
    pub const ALL: [DetectorMode; 3] = [
        DetectorMode::FullMl,
        DetectorMode::NearestNeighborsGenie,
        DetectorMode::SingleNearestNeighborGenie,
    ];
}

/// Bit key of a support: position `k` sets bit `n - 1 - k`, so comparing keys
/// numerically is the same as comparing masks lexicographically.
fn key_of(mask: &SupportMask) -> u64 {
    let n = mask.len();
    mask.positions().iter().fold(0u64, |acc, &k| acc | 1u64 << (n - 1 - k))
}

fn mask_of(key: u64, n: usize) -> SupportMask {
    SupportMask::from_bits((0..n).map(|k| key >> (n - 1 - k) & 1 == 1).collect())
}

fn check_enumerable(dims: ProblemDims, cap: u128) -> Result<()> {
    if dims.n() > 64 {
        return Err(Error::InvalidDims(format!(
            "exhaustive detection supports n <= 64, got {dims}"
        )));
    }
    let count = binomial_u128(dims.n() as u64, dims.q() as u64).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::BudgetExceeded { count, cap });
    }
    Ok(())
}

/// Candidate supports with their noiseless constellation points.
struct Hypotheses {
    p: usize,
    keys: Vec<u64>,
    points: Vec<Complex64>,
}

impl Hypotheses {
    /// Column `k` of `A` weighted by `c_k`, stored contiguously per column.
    fn weighted_columns(a: &SensingMatrixSample, c: &[Complex64]) -> Vec<Complex64> {
        let e = a.entries();
        let (p, n) = (e.rows(), e.cols());
        let mut out = Vec::with_capacity(n * p);
        for (k, &ck) in c.iter().enumerate() {
            for r in 0..p {
                out.push(e[(r, k)] * ck);
            }
        }
        out
    }

    /// Every support, in combination order.
    fn all(n: usize, q: usize, p: usize, cols: &[Complex64]) -> Self {
        let count = binomial_u128(n as u64, q as u64).expect("checked by caller") as usize;
        let mut keys = Vec::with_capacity(count);
        let mut points = Vec::with_capacity(count * p);
        let mut idx: Vec<usize> = (0..q).collect();
        // prefix[i] = sum of columns idx[0..=i]
        let mut prefix = vec![Complex64::new(0.0, 0.0); q * p];
        let fill_from = |prefix: &mut Vec<Complex64>, idx: &[usize], from: usize| {
            for i in from..q {
                for r in 0..p {
                    let base = if i == 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        prefix[(i - 1) * p + r]
                    };
                    prefix[i * p + r] = base + cols[idx[i] * p + r];
                }
            }
        };
        fill_from(&mut prefix, &idx, 0);
        loop {
            keys.push(idx.iter().fold(0u64, |acc, &k| acc | 1u64 << (n - 1 - k)));
            points.extend_from_slice(&prefix[(q - 1) * p..q * p]);
            let Some(i) = (0..q).rev().find(|&i| idx[i] < n - q + i) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..q {
                idx[j] = idx[j - 1] + 1;
            }
            fill_from(&mut prefix, &idx, i);
        }
        Hypotheses { p, keys, points }
    }

    /// The listed supports only.
    fn from_keys(n: usize, p: usize, cols: &[Complex64], keys: Vec<u64>) -> Self {
        let mut points = Vec::with_capacity(keys.len() * p);
        for &key in &keys {
            let mut acc = vec![Complex64::new(0.0, 0.0); p];
            for k in 0..n {
                if key >> (n - 1 - k) & 1 == 1 {
                    for r in 0..p {
                        acc[r] += cols[k * p + r];
                    }
                }
            }
            points.extend(acc);
        }
        Hypotheses { p, keys, points }
    }

    fn distances(&self, y: &[Complex64]) -> Vec<f64> {
        self.points.chunks_exact(self.p).map(|pt| dist_sqr(y, pt)).collect()
    }

    fn index_of(&self, key: u64) -> Option<usize> {
        self.keys.iter().position(|&k| k == key)
    }
}

/// Index in `subset` with the smallest distance; ties go to the smaller key.
fn argmin(keys: &[u64], dist: &[f64], subset: impl IntoIterator<Item = usize>) -> usize {
    let mut best: Option<usize> = None;
    for i in subset {
        best = match best {
            None => Some(i),
            Some(b) if dist[i] < dist[b] || (dist[i] == dist[b] && keys[i] < keys[b]) => Some(i),
            keep => keep,
        };
    }
    best.expect("hypothesis set is never empty")
}

fn check_shapes(y: &Measurement, a: &SensingMatrixSample, c: &[Complex64], dims: ProblemDims) -> Result<()> {
    let e = a.entries();
    if e.rows() != dims.p() || e.cols() != dims.n() {
        return Err(Error::InvalidDims(format!(
            "sensing matrix is {}x{}, expected {}x{}",
            e.rows(),
            e.cols(),
            dims.p(),
            dims.n()
        )));
    }
    if y.y().len() != dims.p() {
        return Err(Error::LengthMismatch {
            expected: dims.p(),
            actual: y.y().len(),
        });
    }
    if c.len() != dims.n() {
        return Err(Error::LengthMismatch {
            expected: dims.n(),
            actual: c.len(),
        });
    }
    Ok(())
}

/// Exhaustive ML search: `argmin_b |y - A (b ⊙ c)|^2` over all `C(n, q)`
/// supports, ties broken toward the lexicographically smallest mask.
pub fn ml_support_detect(
    y: &Measurement,
    a: &SensingMatrixSample,
    c: &[Complex64],
    dims: ProblemDims,
    cap: u128,
) -> Result<SupportMask> {
    check_shapes(y, a, c, dims)?;
    check_enumerable(dims, cap)?;
    let cols = Hypotheses::weighted_columns(a, c);
    let h = Hypotheses::all(dims.n(), dims.q(), dims.p(), &cols);
    let dist = h.distances(y.y());
    let best = argmin(&h.keys, &dist, 0..h.keys.len());
    Ok(mask_of(h.keys[best], dims.n()))
}

/// All single-swap neighbours of `truth`, ordered by (removed, added) position.
fn neighbour_keys(truth: u64, n: usize) -> Vec<u64> {
    let inside: Vec<u64> = (0..n).map(|k| 1u64 << (n - 1 - k)).filter(|b| truth & b != 0).collect();
    let outside: Vec<u64> = (0..n).map(|k| 1u64 << (n - 1 - k)).filter(|b| truth & b == 0).collect();
    let mut out = Vec::with_capacity(inside.len() * outside.len());
    for &i in &inside {
        for &o in &outside {
            out.push(truth & !i | o);
        }
    }
    out
}

/// Uniformly chosen single-swap neighbour, or `None` when there is none.
fn pick_neighbour<R: Rng + ?Sized>(truth: u64, n: usize, rng: &mut R) -> Option<u64> {
    let all = neighbour_keys(truth, n);
    if all.is_empty() {
        None
    } else {
        Some(all[rng.random_range(0..all.len())])
    }
}

/// Genie-aided detection over the true support and its nearest neighbours.
///
/// `SingleNearestNeighborGenie` draws its one neighbour from `rng`;
/// `NearestNeighborsGenie` does not touch `rng`.
pub fn genie_restricted_detect<R: Rng + ?Sized>(
    y: &Measurement,
    a: &SensingMatrixSample,
    c: &[Complex64],
    true_mask: &SupportMask,
    mode: DetectorMode,
    rng: &mut R,
) -> Result<SupportMask> {
    let e = a.entries();
    let dims = ProblemDims::new(e.cols(), e.rows(), true_mask.popcount())?;
    check_shapes(y, a, c, dims)?;
    if true_mask.len() != dims.n() {
        return Err(Error::LengthMismatch {
            expected: dims.n(),
            actual: true_mask.len(),
        });
    }
    if dims.n() > 64 {
        return Err(Error::InvalidDims(format!(
            "genie detection supports n <= 64, got {dims}"
        )));
    }
    let truth = key_of(true_mask);
    let keys = match mode {
        DetectorMode::FullMl => {
            return Err(Error::InvalidArgument("genie detection needs a restricted mode".into()));
        }
        DetectorMode::NearestNeighborsGenie => {
            let mut k = vec![truth];
            k.extend(neighbour_keys(truth, dims.n()));
            k
        }
        DetectorMode::SingleNearestNeighborGenie => {
            let mut k = vec![truth];
            k.extend(pick_neighbour(truth, dims.n(), rng));
            k
        }
    };
    let cols = Hypotheses::weighted_columns(a, c);
    let h = Hypotheses::from_keys(dims.n(), dims.p(), &cols, keys);
    let dist = h.distances(y.y());
    let best = argmin(&h.keys, &dist, 0..h.keys.len());
    Ok(mask_of(h.keys[best], dims.n()))
}

/// Empirical support-error probability at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorProbEstimate {
    pub p_err: f64,
    pub trials: u64,
    pub errors_observed: u64,
    pub wilson_ci_95: (f64, f64),
    /// Mismatched mask positions per position, auxiliary.
    pub position_error_rate: f64,
}

impl ErrorProbEstimate {
    pub fn from_counts(errors: u64, trials: u64, position_errors: u64, n: usize) -> Self {
        ErrorProbEstimate {
            p_err: errors as f64 / trials as f64,
            trials,
            errors_observed: errors,
            wilson_ci_95: wilson_interval(errors, trials, Z95),
            position_error_rate: position_errors as f64 / (trials as f64 * n as f64),
        }
    }

    /// Half the width of the 95% Wilson interval.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.wilson_ci_95.1 - self.wilson_ci_95.0)
    }
}

/// Monte Carlo support-error probability for one detector.
pub fn support_error_mc(
    dims: ProblemDims,
    kind: MatrixKind,
    snrs: &[Snr],
    mode: DetectorMode,
    trials: u64,
    seed: MasterSeed,
    cap: u128,
) -> Result<Vec<ErrorProbEstimate>> {
    Ok(support_error_mc_coupled(dims, kind, snrs, &[mode], trials, seed, cap)?.remove(0))
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    errors: u64,
    position_errors: u64,
}

/// Error estimates for several detectors on shared random draws, indexed
/// `[mode][snr]`.
///
/// Trial `t` draws `A`, the support, the content and unit noise from stream
/// `("support", [t])`, and the single-genie neighbour from
/// `("support-neighbour", [t])`, so each trial is identical whichever modes
/// and SNRs are requested. Because every genie hypothesis set is a subset of
/// the larger one and contains the truth, error counts are ordered
/// single ≤ nearest-neighbours ≤ full for every seed.
pub fn support_error_mc_coupled(
    dims: ProblemDims,
    kind: MatrixKind,
    snrs: &[Snr],
    modes: &[DetectorMode],
    trials: u64,
    seed: MasterSeed,
    cap: u128,
) -> Result<Vec<Vec<ErrorProbEstimate>>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if modes.is_empty() {
        return Err(Error::InvalidArgument("at least one detector mode is required".into()));
    }
    let full = modes.contains(&DetectorMode::FullMl);
    if full {
        check_enumerable(dims, cap)?;
    } else if dims.n() > 64 {
        return Err(Error::InvalidDims(format!(
            "genie detection supports n <= 64, got {dims}"
        )));
    }
    let (n, p, q) = (dims.n(), dims.p(), dims.q());

    let chunks = run_chunked(trials, |range| -> Result<Vec<Counts>> {
        let mut counts = vec![Counts::default(); modes.len() * snrs.len()];
        for t in range {
            let mut rng = seed.stream(TRIAL_STREAM, &[t]);
            let a = sample_matrix(kind, dims, &mut rng)?;
            let mask = sample_support(dims, &mut rng);
            let content = complex_gaussian_vec(n, &mut rng);
            let x = assemble_c2(&mask, &content)?;
            let truth = key_of(&mask);
            let picked = pick_neighbour(truth, n, &mut seed.stream(NEIGHBOUR_STREAM, &[t]));

            let cols = Hypotheses::weighted_columns(&a, &content);
            let h = if full {
                Hypotheses::all(n, q, p, &cols)
            } else {
                let mut keys = vec![truth];
                keys.extend(neighbour_keys(truth, n));
                Hypotheses::from_keys(n, p, &cols, keys)
            };
            let truth_ix = h.index_of(truth).expect("truth is a hypothesis");
            let nn_ix: Vec<usize> = (0..h.keys.len())
                .filter(|&i| (h.keys[i] ^ truth).count_ones() <= 2)
                .collect();
            let mut single_ix = vec![truth_ix];
            single_ix.extend(picked.map(|k| h.index_of(k).expect("neighbour is a hypothesis")));

            for (s, &snr) in snrs.iter().enumerate() {
                // Same unit-noise draws at every SNR.
                let y = channel(&x, &a, snr, &mut rng.clone())?;
                let dist = h.distances(y.y());
                for (m, mode) in modes.iter().enumerate() {
                    let best = match mode {
                        DetectorMode::FullMl => argmin(&h.keys, &dist, 0..h.keys.len()),
                        DetectorMode::NearestNeighborsGenie => argmin(&h.keys, &dist, nn_ix.iter().copied()),
                        DetectorMode::SingleNearestNeighborGenie => argmin(&h.keys, &dist, single_ix.iter().copied()),
                    };
                    let wrong = (h.keys[best] ^ truth).count_ones() as u64;
                    let slot = &mut counts[m * snrs.len() + s];
                    slot.errors += (wrong > 0) as u64;
                    slot.position_errors += wrong;
                }
            }
        }
        Ok(counts)
    });

    let mut total = vec![Counts::default(); modes.len() * snrs.len()];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(chunk?) {
            t.errors += c.errors;
            t.position_errors += c.position_errors;
        }
    }
    Ok((0..modes.len())
        .map(|m| {
            (0..snrs.len())
                .map(|s| {
                    let c = total[m * snrs.len() + s];
                    ErrorProbEstimate::from_counts(c.errors, trials, c.position_errors, n)
                })
                .collect()
        })
        .collect())
}
