//! Independent reference computations checked against the library.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use std::f64::consts::PI;
use sublandau::bounds::{mimo_mi_mc, support_entropy_bits};
use sublandau::linalg::{hpd_log_det, CMatrix};
use sublandau::model::{
    assemble_c2, channel, complex_gaussian_vec, make_dims, sample_fourier_matrix, sample_gaussian_matrix,
    sample_support, SensingMatrixSample,
};
use sublandau::special::log2_binomial;
use sublandau::{MasterSeed, MatrixKind, Snr};

fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

#[test]
fn gaussian_entries_have_unit_power_and_no_correlation() {
    let dims = make_dims(10, 3, 6).unwrap();
    let mut rng = MasterSeed::new(1).stream("oracle-gauss", &[]);
    let (mut power, mut re2, mut im2, mut cross, mut count, mut pairs) =
        (0.0, 0.0, 0.0, Complex64::new(0.0, 0.0), 0.0, 0.0);
    for _ in 0..4000 {
        let a = sample_gaussian_matrix(dims, &mut rng);
        let e = a.entries();
        for r in 0..3 {
            for k in 0..10 {
                let v = e[(r, k)];
                power += v.norm_sqr();
                re2 += v.re * v.re;
                im2 += v.im * v.im;
                count += 1.0;
            }
            cross += e[(r, 0)] * e[(r, 1)].conj();
            pairs += 1.0;
        }
    }
    assert!((power / count - 1.0).abs() < 0.02);
    assert!((re2 / count - 0.5).abs() < 0.01);
    assert!((im2 / count - 0.5).abs() < 0.01);
    assert!((cross / pairs).norm() < 0.03);
}

#[test]
fn supports_are_uniform() {
    let dims = make_dims(10, 3, 6).unwrap();
    let mut rng = MasterSeed::new(2).stream("oracle-support", &[]);
    let draws = 210 * 500;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..draws {
        let m = sample_support(dims, &mut rng);
        assert_eq!(m.popcount(), 6);
        *counts.entry(m.to_string()).or_default() += 1;
    }
    assert_eq!(counts.len(), 210);
    let expected = draws as f64 / 210.0;
    let stat: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = ChiSquared::new(209.0).unwrap().sf(stat);
    assert!(p > 1e-3, "chi-square {stat}, p = {p}");
}

#[test]
fn fourier_rows_are_orthogonal() {
    let dims = make_dims(16, 5, 8).unwrap();
    let mut rng = MasterSeed::new(3).stream("oracle-fourier", &[]);
    for _ in 0..50 {
        let a = sample_fourier_matrix(dims, &mut rng).unwrap();
        let e = a.entries();
        assert!(e.as_slice().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
        let g = e.mul_adjoint(e);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 16.0 } else { 0.0 };
                assert!((g[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        let mut rows = a.row_indices().unwrap().to_vec();
        rows.sort_unstable();
        rows.dedup();
        assert_eq!(rows.len(), 5);
    }
}

#[test]
fn full_dft_determinant() {
    let a = SensingMatrixSample::fourier_from_rows(4, &[0, 1, 2, 3]).unwrap();
    let det = to_nalgebra(a.entries()).determinant();
    assert!((det.norm() - 16.0).abs() < 1e-10);
    // Entry convention exp(+2 pi i r k / n).
    let z = a.entries()[(1, 1)];
    assert!((z - Complex64::from_polar(1.0, 2.0 * PI / 4.0)).norm() < 1e-14);
}

#[test]
fn log_det_matches_nalgebra() {
    let mut rng = MasterSeed::new(4).stream("oracle-logdet", &[]);
    for size in 1..=6 {
        let b = CMatrix::from_fn(size, size + 2, |_, _| complex_gaussian_vec(1, &mut rng)[0]);
        let m = b.mul_adjoint(&b).identity_plus_scaled(0.7);
        let det = to_nalgebra(&m).determinant();
        assert!(det.im.abs() < 1e-8 * det.re);
        assert!((hpd_log_det(&m).unwrap() - det.re.ln()).abs() < 1e-10);
    }
}

#[test]
fn log2_binomial_against_big_integers() {
    for (n, k) in [(10u64, 6u64), (60, 30), (130, 65), (1000, 500), (1000, 3)] {
        let mut c = BigUint::one();
        for i in 0..k {
            c = c * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        let bits = c.bits();
        let shift = bits.saturating_sub(60);
        let mantissa = (&c >> shift).to_f64().unwrap();
        let want = mantissa.log2() + shift as f64;
        let got = log2_binomial(n, k);
        assert!((got - want).abs() < 1e-9 * want.max(1.0), "C({n},{k}): {got} vs {want}");
    }
    assert!((support_entropy_bits(10, 6) - 210f64.log2()).abs() < 1e-14);
}

/// `E log2(1 + SNR |a|^2)` with `|a|^2 ~ Exp(1)`, by composite Simpson.
fn scalar_rayleigh_capacity(snr: f64) -> f64 {
    let (upper, steps) = (60.0, 600_000);
    let h = upper / steps as f64;
    let f = |t: f64| (-t).exp() * (snr * t).ln_1p() / std::f64::consts::LN_2;
    let mut s = f(0.0) + f(upper);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn single_antenna_mimo_matches_quadrature() {
    let dims = make_dims(4, 1, 1).unwrap();
    for snr_db in [0.0, 10.0, 20.0] {
        let snr = Snr::from_db(snr_db).unwrap();
        let e = mimo_mi_mc(dims, MatrixKind::Gaussian, snr, 200_000, MasterSeed::new(5)).unwrap();
        let want = scalar_rayleigh_capacity(snr.linear());
        assert!(
            (e.mean_bits - want).abs() < 4.0 * e.std_error_bits,
            "{snr_db} dB: {} vs {want}",
            e.mean_bits
        );
    }
}

#[test]
fn received_power_matches_signal_plus_noise() {
    let dims = make_dims(10, 3, 6).unwrap();
    let snr = Snr::from_db(10.0).unwrap();
    let mut rng = MasterSeed::new(6).stream("oracle-power", &[]);
    let (mut power, mut count) = (0.0, 0.0);
    for _ in 0..100_000 {
        let a = sample_gaussian_matrix(dims, &mut rng);
        let mask = sample_support(dims, &mut rng);
        let x = assemble_c2(&mask, &complex_gaussian_vec(10, &mut rng)).unwrap();
        let y = channel(&x, &a, snr, &mut rng).unwrap();
        assert!((y.noise_variance() - 0.6).abs() < 1e-12);
        power += y.y().iter().map(|v| v.norm_sqr()).sum::<f64>();
        count += 3.0;
    }
    let want = 6.0 * (1.0 + 1.0 / snr.linear());
    assert!((power / count - want).abs() < 0.02 * want);
}
