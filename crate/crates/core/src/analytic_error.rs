//! Nearest-neighbour pairwise error probability of maximum-likelihood
//! support detection and the union bound over all nearest neighbours.
//!
//! Confusing support element `k` with `m` moves the noiseless point by
//! `x_m a_m - x_k a_k`, a complex Gaussian `p`-vector whose per-element
//! variance is `2 sigma^2 = |x_m|^2 + |x_k|^2`. Its normalized length
//! `d = |dy| / sigma` is Chi with `2p` degrees of freedom and independent of
//! `sigma`, which for unit-power Gaussian content has density
//! `8 sigma^3 exp(-2 sigma^2)`. The error probability is the average of
//! `erfc(d sigma sqrt(SNR / q) / 2) / 2` over both.

use crate::error::{Error, Result};
use crate::model::Snr;
use crate::quadrature::integrate;
use crate::special::{erfc, ln_gamma};
use std::cell::Cell;
use std::f64::consts::LN_2;

/// Chi density with `2p` degrees of freedom:
/// `2^(1-p) d^(2p-1) exp(-d^2/2) / Gamma(p)`.
pub fn chi_pdf_d(d: f64, p: u32) -> f64 {
    assert!(p >= 1, "chi_pdf_d needs p >= 1");
    if d <= 0.0 {
        return 0.0;
    }
    let pf = p as f64;
    ((1.0 - pf) * LN_2 - ln_gamma(pf) + (2.0 * pf - 1.0) * d.ln() - 0.5 * d * d).exp()
}

/// `P(d > d_max)` for the Chi law with `2p` degrees of freedom.
///
/// For integer `p` this is the regularized upper incomplete gamma
/// `Q(p, d_max^2/2) = exp(-x) sum_{k<p} x^k / k!`.
pub fn chi_tail(d_max: f64, p: u32) -> f64 {
    let x = 0.5 * d_max * d_max;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..p {
        term *= x / k as f64;
        sum += term;
    }
    (-x).exp() * sum
}

/// Density of `sigma = sqrt((|x_m|^2 + |x_k|^2) / 2)`, `8 sigma^3 exp(-2 sigma^2)`.
pub fn sigma_pdf(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    8.0 * sigma.powi(3) * (-2.0 * sigma * sigma).exp()
}

/// CDF matching [`sigma_pdf`], `1 - exp(-2 s^2)(1 + 2 s^2)`.
pub fn sigma_cdf(sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let u = 2.0 * sigma * sigma;
    // -expm1(-u) - u exp(-u) keeps precision near zero.
    -(-u).exp_m1() - u * (-u).exp()
}

/// `P(sigma > sigma_max)`.
pub fn sigma_tail(sigma_max: f64) -> f64 {
    let u = 2.0 * sigma_max * sigma_max;
    (-u).exp() * (1.0 + u)
}

/// Error probability given `d` and `sigma`: `erfc(0.5 d sigma sqrt(SNR/q)) / 2`.
pub fn pairwise_error_cond(d: f64, sigma: f64, q: u32, snr: Snr) -> f64 {
    0.5 * erfc(0.5 * d * sigma * (snr.linear() / q as f64).sqrt())
}

/// Numerical-integration contract for [`pairwise_error`]: adaptive
/// Gauss–Kronrod 7/15 panels on `[0, d_max] x [0, sigma_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub d_max: f64,
    pub sigma_max: f64,
    /// Panel budget per one-dimensional integral.
    pub max_panels: usize,
}

pub const DEFAULT_ABS_TOL: f64 = 1e-10;

impl QuadratureSpec {
    /// Truncation limits chosen so each neglected tail holds less than
    /// `abs_tol / 10` of its density's mass.
    pub fn for_measurements(p: u32, abs_tol: f64) -> Self {
        let budget = abs_tol / 10.0;
        let mut d_max = (2.0 * p as f64).sqrt();
        while chi_tail(d_max, p) >= budget {
            d_max += 0.25;
        }
        let mut sigma_max = 1.0;
        while sigma_tail(sigma_max) >= budget {
            sigma_max += 0.125;
        }
        QuadratureSpec {
            abs_tol,
            d_max,
            sigma_max,
            max_panels: 2000,
        }
    }

    /// Default tolerance `1e-10`.
    pub fn default_for(p: u32) -> Self {
        Self::for_measurements(p, DEFAULT_ABS_TOL)
    }

    /// Upper bound on the integral mass lost by truncation (the integrand never exceeds 1/2).
    pub fn truncated_mass(&self, p: u32) -> f64 {
        0.5 * (chi_tail(self.d_max, p) + sigma_tail(self.sigma_max))
    }
}

/// Pairwise error probability with its total error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseError {
    pub value: f64,
    /// Quadrature error estimate plus truncated mass.
    pub error_bound: f64,
}

/// Average of the conditional error over the Chi law of `d` and the law of `sigma`.
pub fn pairwise_error(p: u32, q: u32, snr: Snr, quad: &QuadratureSpec) -> Result<f64> {
    Ok(pairwise_error_detailed(p, q, snr, quad)?.value)
}

pub fn pairwise_error_detailed(p: u32, q: u32, snr: Snr, quad: &QuadratureSpec) -> Result<PairwiseError> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidArgument(format!(
            "p and q must be positive (p={p}, q={q})"
        )));
    }
    let truncated = quad.truncated_mass(p);
    if truncated > quad.abs_tol / 10.0 {
        return Err(Error::InvalidArgument(format!(
            "truncation [0,{}]x[0,{}] drops mass {truncated:e} > abs_tol/10",
            quad.d_max, quad.sigma_max
        )));
    }
    let inner_tol = quad.abs_tol / 4.0;
    let inner_err = Cell::new(0.0f64);
    let inner_fail: Cell<Option<f64>> = Cell::new(None);
    let outer = integrate(
        |sigma| {
            let ps = sigma_pdf(sigma);
            if ps == 0.0 {
                return 0.0;
            }
            match integrate(
                |d| pairwise_error_cond(d, sigma, q, snr) * chi_pdf_d(d, p),
                0.0,
                quad.d_max,
                inner_tol,
                quad.max_panels,
            ) {
                Ok(r) => {
                    inner_err.set(inner_err.get().max(r.abs_error));
                    ps * r.value
                }
                Err(Error::Quadrature { achieved, .. }) => {
                    inner_fail.set(Some(achieved));
                    0.0
                }
                Err(_) => unreachable!("integrate only fails with Quadrature"),
            }
        },
        0.0,
        quad.sigma_max,
        quad.abs_tol / 2.0,
        quad.max_panels,
    )?;
    if let Some(achieved) = inner_fail.get() {
        return Err(Error::Quadrature {
            requested: inner_tol,
            achieved,
        });
    }
    Ok(PairwiseError {
        value: outer.value,
        error_bound: outer.abs_error + inner_err.get() + truncated,
    })
}

/// `q (n - q)` times the pairwise error: the union over nearest neighbours
/// only. Not clamped to 1.
pub fn union_bound(n: u32, p: u32, q: u32, snr: Snr, quad: &QuadratureSpec) -> Result<f64> {
    if q > n {
        return Err(Error::InvalidDims(format!("q={q} exceeds n={n}")));
    }
    let neighbours = nearest_neighbour_count(n, q);
    if neighbours == 0 {
        return Ok(0.0);
    }
    Ok(neighbours as f64 * pairwise_error(p, q, snr, quad)?)
}

/// Number of single-swap neighbours of a support, `q (n - q)`.
pub fn nearest_neighbour_count(n: u32, q: u32) -> u64 {
    q as u64 * (n - q) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chi_reduces_to_rayleigh() {
        assert_abs_diff_eq!(chi_pdf_d(1.0, 1), (-0.5f64).exp(), epsilon = 1e-15);
        for d in [0.1, 0.7, 2.0, 3.5] {
            assert_abs_diff_eq!(chi_pdf_d(d, 1), d * (-0.5 * d * d).exp(), epsilon = 1e-15);
        }
        assert_eq!(chi_pdf_d(0.0, 3), 0.0);
    }

    #[test]
    fn chi_mode_for_three_measurements() {
        // Mode at sqrt(2p - 1) = sqrt(5).
        let m = 5f64.sqrt();
        let h = 1e-4;
        let left = chi_pdf_d(m, 3) - chi_pdf_d(m - h, 3);
        let right = chi_pdf_d(m + h, 3) - chi_pdf_d(m, 3);
        assert!(left > 0.0 && right < 0.0);
    }

    #[test]
    fn densities_normalize() {
        for p in [1u32, 2, 3, 5] {
            let spec = QuadratureSpec::default_for(p);
            let r = integrate(|d| chi_pdf_d(d, p), 0.0, spec.d_max, 1e-12, 500).unwrap();
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-8);
        }
        let r = integrate(sigma_pdf, 0.0, 8.0, 1e-13, 500).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
        let m2 = integrate(|s| s * s * sigma_pdf(s), 0.0, 8.0, 1e-13, 500).unwrap();
        assert_abs_diff_eq!(m2.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn tails_match_quadrature() {
        let r = integrate(|d| chi_pdf_d(d, 3), 4.0, 40.0, 1e-14, 500).unwrap();
        assert_abs_diff_eq!(chi_tail(4.0, 3), r.value, epsilon = 1e-12);
        let r = integrate(sigma_pdf, 1.5, 20.0, 1e-14, 500).unwrap();
        assert_abs_diff_eq!(sigma_tail(1.5), r.value, epsilon = 1e-12);
        assert_abs_diff_eq!(sigma_cdf(1.5) + sigma_tail(1.5), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_error_values() {
        let snr = Snr::new(6.2517).unwrap();
        assert_eq!(pairwise_error_cond(0.0, 1.0, 6, snr), 0.5);
        let arg = 0.5 * 2.0 * 1.0 * (6.2517f64 / 6.0).sqrt();
        assert_abs_diff_eq!(arg, 1.0207, epsilon = 1e-4);
        let v = pairwise_error_cond(2.0, 1.0, 6, snr);
        assert_abs_diff_eq!(v, 0.5 * erfc(arg), epsilon = 1e-16);
        assert_abs_diff_eq!(v, 0.0745, epsilon = 1e-4);
        assert!(pairwise_error_cond(1.0, 1.0, 6, Snr::infinite()) == 0.0);
    }

    #[test]
    fn truncation_respects_budget() {
        for p in 1..=8 {
            let spec = QuadratureSpec::default_for(p);
            assert!(spec.truncated_mass(p) <= spec.abs_tol / 10.0);
        }
    }

    #[test]
    fn undersized_limits_rejected() {
        let mut spec = QuadratureSpec::default_for(3);
        spec.d_max = 2.0;
        assert!(matches!(
            pairwise_error(3, 6, Snr::from_db(10.0).unwrap(), &spec),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pairwise_error_is_monotone_in_snr() {
        let spec = QuadratureSpec::default_for(3);
        let vals: Vec<f64> = (0..=8)
            .map(|i| pairwise_error(3, 6, Snr::from_db(5.0 * i as f64).unwrap(), &spec).unwrap())
            .collect();
        assert!(vals.iter().all(|&v| v > 0.0 && v < 0.5));
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn pairwise_error_is_monotone_in_p() {
        let snr = Snr::from_db(15.0).unwrap();
        let vals: Vec<f64> = (1..=6)
            .map(|p| pairwise_error(p, 6, snr, &QuadratureSpec::default_for(p)).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn scaling_q_and_snr_together_is_invariant() {
        let spec = QuadratureSpec::default_for(3);
        for db in [0.0, 12.0, 27.0] {
            let snr = Snr::from_db(db).unwrap();
            let snr4 = Snr::new(4.0 * snr.linear()).unwrap();
            assert_eq!(
                pairwise_error(3, 6, snr, &spec).unwrap(),
                pairwise_error(3, 24, snr4, &spec).unwrap()
            );
        }
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let snr = Snr::from_db(20.0).unwrap();
        let coarse = QuadratureSpec::default_for(3);
        let fine = QuadratureSpec::for_measurements(3, coarse.abs_tol / 2.0);
        let a = pairwise_error(3, 6, snr, &coarse).unwrap();
        let b = pairwise_error(3, 6, snr, &fine).unwrap();
        assert!((a - b).abs() < coarse.abs_tol);
    }

    #[test]
    fn union_bound_multiplier() {
        let spec = QuadratureSpec::default_for(3);
        let snr = Snr::from_db(22.0).unwrap();
        assert_eq!(nearest_neighbour_count(10, 6), 24);
        let pe = pairwise_error(3, 6, snr, &spec).unwrap();
        assert_eq!(union_bound(10, 3, 6, snr, &spec).unwrap(), 24.0 * pe);
        assert_eq!(union_bound(6, 3, 6, snr, &spec).unwrap(), 0.0);
        assert!(union_bound(5, 3, 6, snr, &spec).is_err());
    }
}
