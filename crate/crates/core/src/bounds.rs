//! Mutual-information bounds of the sparse channel and the rate region they
//! imply.
//!
//! The support carries `log2 C(n, q)` bits that must be paid for out of the
//! channel's mutual information. That mutual information is bounded above by
//! `p log2(1 + SNR)` (only the output power is constrained) and below by the
//! ergodic capacity of the `p x q` MIMO channel obtained when the receiver
//! is also told the support.

use crate::error::{Error, Result};
use crate::linalg::hpd_log_det;
use crate::model::{sample_matrix, sample_support, MatrixKind, ProblemDims, Snr};
use crate::seed::MasterSeed;
use crate::special::log2_binomial;
use crate::stats::{run_chunked, Moments, Z95};
use serde::Serialize;
use std::f64::consts::LN_2;

/// Stream label for the MIMO Monte Carlo.
pub const MIMO_STREAM: &str = "mimo";

/// Entropy of a uniformly distributed support, `log2 C(n, q)` bits.
pub fn support_entropy_bits(n: u64, q: u64) -> f64 {
    log2_binomial(n, q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    MimoGaussian,
    MimoFourier,
    UpperBound,
    Exact,
}

impl From<MatrixKind> for BoundKind {
    fn from(kind: MatrixKind) -> Self {
        match kind {
            MatrixKind::Gaussian => BoundKind::MimoGaussian,
            MatrixKind::Fourier => BoundKind::MimoFourier,
        }
    }
}

/// A mutual-information value in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEstimate {
    pub mean_bits: f64,
    pub std_error_bits: f64,
    pub trials: u64,
    pub kind: BoundKind,
}

impl BoundEstimate {
    /// A closed-form value with no sampling error.
    pub fn exact(bits: f64, kind: BoundKind) -> Self {
        BoundEstimate {
            mean_bits: bits,
            std_error_bits: 0.0,
            trials: 1,
            kind,
        }
    }
}

/// `p log2(1 + SNR)`.
pub fn upper_bound_imup(p: usize, snr: Snr) -> BoundEstimate {
    BoundEstimate::exact(p as f64 * snr.linear().ln_1p() / LN_2, BoundKind::UpperBound)
}

/// Monte Carlo estimate of `E log2 det(I_p + (SNR/q) A0 A0^H)`.
///
/// Each trial draws a fresh sensing matrix and a fresh uniform support; `A0`
/// holds the support columns. Trial `t` uses stream `("mimo", [t])` of
/// `seed`, so the estimate does not depend on thread count and the same
/// matrices are reused across SNR values.
pub fn mimo_mi_mc(
    dims: ProblemDims,
    kind: MatrixKind,
    snr: Snr,
    trials: u64,
    seed: MasterSeed,
) -> Result<BoundEstimate> {
    Ok(mimo_mi_mc_grid(dims, kind, &[snr], trials, seed)?[0])
}

/// [`mimo_mi_mc`] on several SNR values with shared draws.
///
/// Entry `i` equals `mimo_mi_mc(dims, kind, snrs[i], trials, seed)` exactly.
pub fn mimo_mi_mc_grid(
    dims: ProblemDims,
    kind: MatrixKind,
    snrs: &[Snr],
    trials: u64,
    seed: MasterSeed,
) -> Result<Vec<BoundEstimate>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if kind == MatrixKind::Fourier && dims.p() > dims.n() {
        return Err(Error::InvalidDims(format!(
            "Fourier sampling needs p <= n (got {dims})"
        )));
    }
    let q = dims.q() as f64;
    let chunks = run_chunked(trials, |range| -> Result<Vec<Moments>> {
        let mut acc = vec![Moments::new(); snrs.len()];
        for t in range {
            let mut rng = seed.stream(MIMO_STREAM, &[t]);
            let a = sample_matrix(kind, dims, &mut rng)?;
            let support = sample_support(dims, &mut rng);
            let gram = a.entries().column_gram(&support.positions());
            for (m, snr) in acc.iter_mut().zip(snrs) {
                let g = gram.identity_plus_scaled(snr.linear() / q);
                let ld = hpd_log_det(&g)
                    .filter(|v| v.is_finite())
                    .ok_or(Error::NonFiniteDeterminant { trial: t })?;
                m.push(ld / LN_2);
            }
        }
        Ok(acc)
    });
    let mut total = vec![Moments::new(); snrs.len()];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(chunk?) {
            t.merge(&c);
        }
    }
    Ok(total
        .into_iter()
        .map(|m| BoundEstimate {
            mean_bits: m.mean(),
            std_error_bits: m.std_error(),
            trials: m.count(),
            kind: kind.into(),
        })
        .collect())
}

/// A pair of support and content rates, in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRegionPoint {
    pub r_b_bits: f64,
    pub r_c_bits: f64,
}

impl RateRegionPoint {
    pub fn new(r_b_bits: f64, r_c_bits: f64) -> Result<Self> {
        if !(r_b_bits >= 0.0 && r_c_bits >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rates must be nonnegative (R_b={r_b_bits}, R_c={r_c_bits})"
            )));
        }
        Ok(RateRegionPoint { r_b_bits, r_c_bits })
    }

    /// Content rate per measurement, `R_c / p`.
    pub fn r_cp(&self, p: usize) -> f64 {
        self.r_c_bits / p as f64
    }

    pub fn total(&self) -> f64 {
        self.r_b_bits + self.r_c_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    /// `I - (R_b + R_c)`.
    pub margin_bits: f64,
    /// Margin in units of the estimate's standard error (infinite for exact values).
    pub margin_sigmas: f64,
}

/// `R_b + R_c <= I_M`, judged against the point estimate.
pub fn rate_region_feasible(point: RateRegionPoint, i_m: &BoundEstimate) -> Feasibility {
    let margin = i_m.mean_bits - point.total();
    let margin_sigmas = if i_m.std_error_bits > 0.0 {
        margin / i_m.std_error_bits
    } else if margin == 0.0 {
        0.0
    } else {
        margin.signum() * f64::INFINITY
    };
    Feasibility {
        feasible: margin >= 0.0,
        margin_bits: margin,
        margin_sigmas,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AchievableRate {
    pub r_c_bits: f64,
    /// False when the lower bound cannot even pay for the support entropy.
    pub support_recoverable: bool,
}

/// `max(0, I_MIMO - H(b))`.
pub fn achievable_rc(i_mimo: &BoundEstimate, h_b: f64) -> AchievableRate {
    let rc = i_mimo.mean_bits - h_b;
    AchievableRate {
        r_c_bits: rc.max(0.0),
        support_recoverable: rc >= 0.0,
    }
}

/// SNR at which the MIMO lower bound first pays for `H(b) + R_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrThreshold {
    pub snr_db: f64,
    /// 95% interval from the standard error divided by the local slope.
    pub ci_95_db: (f64, f64),
    pub target_bits: f64,
    pub estimate: BoundEstimate,
    /// Local slope of the estimate, bits per dB.
    pub slope_bits_per_db: f64,
    pub iterations: u32,
}

/// Bisection on `[lo_db, hi_db]` for `mimo_mi_mc = log2 C(n, q) + r_c`,
/// stopped once the bracket is narrower than `tol_db`.
///
/// Every evaluation reuses the same trial streams, so the estimate is
/// monotone in SNR and the search is well defined for any trial count.
pub fn mimo_snr_threshold(
    dims: ProblemDims,
    kind: MatrixKind,
    r_c_bits: f64,
    trials: u64,
    seed: MasterSeed,
    (lo_db, hi_db): (f64, f64),
    tol_db: f64,
) -> Result<SnrThreshold> {
    if !(r_c_bits >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "R_c must be nonnegative, got {r_c_bits}"
        )));
    }
    if !(lo_db < hi_db && tol_db > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need lo < hi and tol > 0 (lo={lo_db}, hi={hi_db}, tol={tol_db})"
        )));
    }
    let target = support_entropy_bits(dims.n() as u64, dims.q() as u64) + r_c_bits;
    let eval = |db: f64| -> Result<BoundEstimate> { mimo_mi_mc(dims, kind, Snr::from_db(db)?, trials, seed) };
    let (f_lo, f_hi) = (eval(lo_db)?.mean_bits, eval(hi_db)?.mean_bits);
    if !(f_lo < target && f_hi >= target) {
        return Err(Error::NonBracketing {
            target,
            lo_db,
            hi_db,
            f_lo,
            f_hi,
        });
    }
    let (mut lo, mut hi) = (lo_db, hi_db);
    let mut iterations = 0;
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if eval(mid)?.mean_bits < target {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let snr_db = 0.5 * (lo + hi);
    let estimate = eval(snr_db)?;
    let slope = eval(snr_db + 0.5)?.mean_bits - eval(snr_db - 0.5)?.mean_bits;
    let half = if slope > 0.0 {
        Z95 * estimate.std_error_bits / slope
    } else {
        f64::INFINITY
    };
    Ok(SnrThreshold {
        snr_db,
        ci_95_db: (snr_db - half, snr_db + half),
        target_bits: target,
        estimate,
        slope_bits_per_db: slope,
        iterations,
    })
}
