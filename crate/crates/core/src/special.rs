//! Special functions used by the entropy and error-probability formulas.

use std::f64::consts::LN_2;

/// Complementary error function (fdlibm rational approximations, full double precision).
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `log2 C(n, k)`.
///
/// Exact integer arithmetic while the coefficient fits in 128 bits, log-gamma
/// beyond that.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n, "log2_binomial: k = {k} > n = {n}");
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    if let Some(c) = binomial_u128(n, k) {
        return log2_u128(c);
    }
    (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)) / LN_2
}

/// `C(n, k)` if it fits in a `u128`.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn log2_u128(v: u128) -> f64 {
    let bits = 128 - v.leading_zeros();
    if bits <= 64 {
        return (v as u64 as f64).log2();
    }
    // Keep 64 leading bits so rounding to f64 happens once.
    let shift = bits - 64;
    let top = (v >> shift) as u64;
    (top as f64).log2() + shift as f64
}
