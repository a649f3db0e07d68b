//! Large-dimension approximations: support entropy per dimension, the
//! high-SNR gap between the MIMO lower bound and `p log2(1 + SNR)` for
//! Gaussian and partial-Fourier matrices, and the SNR needed to carry the
//! support plus a content rate.

use crate::error::{Error, Result};
use crate::special::log2_binomial;
use serde::Serialize;
use std::f64::consts::LOG2_E;

/// Sampling ratio `p/n`, occupancy `q/n` and their quotient `beta = q/p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticRatios {
    p_r: f64,
    q_r: f64,
}

impl AsymptoticRatios {
    pub fn new(p_r: f64, q_r: f64) -> Result<Self> {
        if !(p_r > 0.0 && p_r <= 1.0 && q_r > 0.0 && q_r <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ratios must lie in (0, 1] (p_R={p_r}, q_R={q_r})"
            )));
        }
        Ok(AsymptoticRatios { p_r, q_r })
    }

    pub fn p_r(&self) -> f64 {
        self.p_r
    }

    pub fn q_r(&self) -> f64 {
        self.q_r
    }

    pub fn beta(&self) -> f64 {
        self.q_r / self.p_r
    }

    pub fn is_sub_landau(&self) -> bool {
        self.beta() > 1.0
    }
}

/// `-x log2 x - (1-x) log2(1-x)`, with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x), "binary_entropy: {x} outside [0, 1]");
    fn term(v: f64) -> f64 {
        if v == 0.0 {
            0.0
        } else {
            -v * v.log2()
        }
    }
    term(x) + term(1.0 - x)
}

/// Stirling form of the support entropy, `n H(q_R)`.
pub fn stirling_support_entropy(n: u64, q_r: f64) -> f64 {
    n as f64 * binary_entropy(q_r)
}

/// High-SNR gap per measurement for i.i.d. Gaussian matrices,
/// `log2 e + (beta - 1) log2((beta - 1)/beta)`.
pub fn gap_gaussian(beta: f64) -> Result<f64> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Gaussian gap needs beta > 1 (sub-Landau), got {beta}"
        )));
    }
    let bm1 = beta - 1.0;
    // (beta-1) * log2(1 - 1/beta), evaluated with ln_1p to stay accurate for large beta.
    Ok(LOG2_E + bm1 * (-1.0 / beta).ln_1p() * LOG2_E)
}

/// `psi = p_R / (q_R - p_R)`, the high-SNR fixed point for partial-Fourier matrices.
pub fn fourier_psi(p_r: f64, q_r: f64) -> Result<f64> {
    check_fourier_domain(p_r, q_r)?;
    Ok(p_r / (q_r - p_r))
}

fn check_fourier_domain(p_r: f64, q_r: f64) -> Result<()> {
    if !(p_r > 0.0 && p_r < q_r && q_r <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Fourier gap needs 0 < p_R < q_R <= 1 (p_R={p_r}, q_R={q_r})"
        )));
    }
    Ok(())
}

/// High-SNR gap per measurement for random row/column DFT submatrices.
pub fn gap_fourier(p_r: f64, q_r: f64) -> Result<f64> {
    let psi = fourier_psi(p_r, q_r)?;
    let ratio = q_r / p_r;
    Ok(binary_entropy(p_r) / p_r + psi.log2() - ratio * (q_r / (q_r - p_r)).log2() + q_r.log2())
}

/// SNR solving `log2(1 + SNR) = H(q_R)/p_R + r_cp + c_gap`.
///
/// Returns the linear value; it is zero when the exponent is zero, so this
/// is a plain `f64` rather than an `Snr`.
pub fn required_snr(q_r: f64, p_r: f64, r_cp: f64, c_gap: f64) -> Result<f64> {
    if !(p_r > 0.0) || !(0.0..=1.0).contains(&q_r) {
        return Err(Error::InvalidArgument(format!(
            "need p_R > 0 and q_R in [0, 1] (p_R={p_r}, q_R={q_r})"
        )));
    }
    Ok((binary_entropy(q_r) / p_r + r_cp + c_gap).exp2() - 1.0)
}

/// Very sparse form, `(1/q_R)^(q_R/p_R) 2^(c_gap + r_cp) - 1`.
pub fn required_snr_very_sparse(q_r: f64, p_r: f64, r_cp: f64, c_gap: f64) -> Result<f64> {
    if !(q_r > 0.0 && q_r < 1.0 && p_r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "very sparse approximation needs 0 < q_R < 1 and p_R > 0 (q_R={q_r}, p_R={p_r})"
        )));
    }
    Ok((1.0 / q_r).powf(q_r / p_r) * (c_gap + r_cp).exp2() - 1.0)
}

/// Linear SNR expressed in dB (negative infinity for zero).
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Spectrum split into `k` equal subbands, `q_R k` of them occupied in each
/// interval of length `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubbandScenario {
    k: u64,
    bandwidth_hz: f64,
    interval_s: f64,
    q_r: f64,
    p_r: f64,
    r_c_bits: f64,
}

impl SubbandScenario {
    pub fn new(k: u64, bandwidth_hz: f64, interval_s: f64, q_r: f64, p_r: f64, r_c_bits: f64) -> Result<Self> {
        if k == 0 || !(bandwidth_hz > 0.0) || !(interval_s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need K >= 1, W > 0, T > 0 (K={k}, W={bandwidth_hz}, T={interval_s})"
            )));
        }
        if !(q_r > 0.0 && q_r <= 1.0 && p_r > 0.0 && p_r <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "ratios must lie in (0, 1] (q_R={q_r}, p_R={p_r})"
            )));
        }
        let occupied = q_r * k as f64;
        if (occupied - occupied.round()).abs() > 1e-9 * occupied.max(1.0) || occupied.round() < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "q_R * K must be a positive integer (q_R={q_r}, K={k})"
            )));
        }
        if bandwidth_hz * interval_s < k as f64 {
            return Err(Error::InvalidArgument(format!(
                "W*T={} must be at least K={k}",
                bandwidth_hz * interval_s
            )));
        }
        if !(r_c_bits >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "R_c must be nonnegative, got {r_c_bits}"
            )));
        }
        Ok(SubbandScenario {
            k,
            bandwidth_hz,
            interval_s,
            q_r,
            p_r,
            r_c_bits,
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn occupied_subbands(&self) -> u64 {
        (self.q_r * self.k as f64).round() as u64
    }

    /// Nyquist samples per interval, `W T`.
    pub fn nyquist_samples(&self) -> f64 {
        self.bandwidth_hz * self.interval_s
    }

    /// Samples actually taken per interval, `p_R W T`.
    pub fn samples(&self) -> f64 {
        self.p_r * self.nyquist_samples()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubbandRequirement {
    /// Linear SNR.
    pub snr: f64,
    pub snr_db: f64,
    /// `K H(q_R)`.
    pub stirling_entropy_bits: f64,
    /// `log2 C(K, q_R K)`.
    pub exact_entropy_bits: f64,
    /// `K / (W T)`, the inverse of the frequencies resolvable per subband.
    pub resolvable_factor: f64,
}

/// SNR with `log2(1 + SNR) = (K H(q_R) + R_c) / (p_R W T) + c_gap`.
pub fn subband_required_snr(s: &SubbandScenario, c_gap: f64) -> SubbandRequirement {
    let stirling = s.k as f64 * binary_entropy(s.q_r);
    let exponent = (stirling + s.r_c_bits) / s.samples() + c_gap;
    let snr = exponent.exp2() - 1.0;
    SubbandRequirement {
        snr,
        snr_db: to_db(snr),
        stirling_entropy_bits: stirling,
        exact_entropy_bits: log2_binomial(s.k, s.occupied_subbands()),
        resolvable_factor: s.k as f64 / s.nyquist_samples(),
    }
}
