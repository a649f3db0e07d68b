//! The sparse sensing channel `y = A x + z`.
//!
//! A length-`n` vector with `q` nonzero entries is observed through `p`
//! noisy linear measurements. The sensing matrix is either i.i.d. complex
//! Gaussian (sparse sensing) or `p` randomly chosen rows of the scaled
//! inverse DFT (sparse sampling). The support is carried as a 0/1 mask.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

/// Ambient dimension `n`, number of measurements `p` and support size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemDims {
    n: usize,
    p: usize,
    q: usize,
}

impl ProblemDims {
    pub fn new(n: usize, p: usize, q: usize) -> Result<Self> {
        if n == 0 || p == 0 || q == 0 {
            return Err(Error::InvalidDims(format!(
                "n, p, q must be positive (got n={n}, p={p}, q={q})"
            )));
        }
        if q > n {
            return Err(Error::InvalidDims(format!("support size q={q} exceeds n={n}")));
        }
        Ok(ProblemDims { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Sampling ratio `p / n`.
    pub fn p_ratio(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// Occupancy `q / n`.
    pub fn q_ratio(&self) -> f64 {
        self.q as f64 / self.n as f64
    }

    /// `q / p`; above 1 means sampling below the Landau rate.
    pub fn beta(&self) -> f64 {
        self.q as f64 / self.p as f64
    }

    pub fn is_sub_landau(&self) -> bool {
        self.q > self.p
    }
}

impl fmt::Display for ProblemDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, p={}, q={}", self.n, self.p, self.q)
    }
}

/// Validate and build [`ProblemDims`].
pub fn make_dims(n: usize, p: usize, q: usize) -> Result<ProblemDims> {
    ProblemDims::new(n, p, q)
}

/// Per-measurement signal-to-noise ratio as a linear power ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Snr(f64);

impl Snr {
    pub fn new(linear: f64) -> Result<Self> {
        if linear > 0.0 && !linear.is_nan() {
            Ok(Snr(linear))
        } else {
            Err(Error::InvalidArgument(format!("SNR must be positive, got {linear}")))
        }
    }

    pub fn from_db(db: f64) -> Result<Self> {
        Self::new(10f64.powf(db / 10.0))
    }

    /// Noiseless limit, for identifiability checks.
    pub fn infinite() -> Self {
        Snr(f64::INFINITY)
    }

    pub fn linear(&self) -> f64 {
        self.0
    }

    pub fn db(&self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Draw one circularly-symmetric complex Gaussian with `E|x|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn complex_gaussian_vec<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// i.i.d. circularly-symmetric complex Gaussian entries of unit variance.
    Gaussian,
    /// Random rows of the unnormalized inverse DFT matrix.
    Fourier,
}

/// One realization of the `p x n` sensing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrixSample {
    kind: MatrixKind,
    entries: CMatrix,
    row_indices: Option<Vec<usize>>,
}

impl SensingMatrixSample {
    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// DFT row indices; `None` for the Gaussian kind.
    pub fn row_indices(&self) -> Option<&[usize]> {
        self.row_indices.as_deref()
    }

    /// Column `k` scaled by `weight`.
    pub fn scaled_column(&self, k: usize, weight: Complex64) -> Vec<Complex64> {
        (0..self.entries.rows())
            .map(|r| self.entries[(r, k)] * weight)
            .collect()
    }

    /// Inverse-DFT rows with entry `(j, k) = exp(2 pi i r_j k / n)`.
    pub fn fourier_from_rows(n: usize, rows: &[usize]) -> Result<Self> {
        let mut seen = vec![false; n];
        for &r in rows {
            if r >= n || seen[r] {
                return Err(Error::InvalidArgument(format!(
                    "row indices must be distinct and below n={n}: {rows:?}"
                )));
            }
            seen[r] = true;
        }
        let entries = CMatrix::from_fn(rows.len(), n, |j, k| {
            // Reduce the phase index mod n before scaling so large n keeps full precision.
            let m = (rows[j] * k) % n;
            Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)
        });
        Ok(SensingMatrixSample {
            kind: MatrixKind::Fourier,
            entries,
            row_indices: Some(rows.to_vec()),
        })
    }

    pub fn from_entries(kind: MatrixKind, entries: CMatrix) -> Self {
        SensingMatrixSample {
            kind,
            entries,
            row_indices: None,
        }
    }
}

pub fn sample_gaussian_matrix<R: Rng + ?Sized>(dims: ProblemDims, rng: &mut R) -> SensingMatrixSample {
    let entries = CMatrix::from_fn(dims.p(), dims.n(), |_, _| complex_gaussian(rng));
    SensingMatrixSample::from_entries(MatrixKind::Gaussian, entries)
}

/// `p` distinct rows chosen uniformly without replacement.
pub fn sample_fourier_matrix<R: Rng + ?Sized>(dims: ProblemDims, rng: &mut R) -> Result<SensingMatrixSample> {
    if dims.p() > dims.n() {
        return Err(Error::InvalidDims(format!(
            "Fourier sampling needs p <= n (got {dims})"
        )));
    }
    let rows = rand::seq::index::sample(rng, dims.n(), dims.p()).into_vec();
    SensingMatrixSample::fourier_from_rows(dims.n(), &rows)
}

pub fn sample_matrix<R: Rng + ?Sized>(kind: MatrixKind, dims: ProblemDims, rng: &mut R) -> Result<SensingMatrixSample> {
    match kind {
        MatrixKind::Gaussian => Ok(sample_gaussian_matrix(dims, rng)),
        MatrixKind::Fourier => sample_fourier_matrix(dims, rng),
    }
}

/// Support as a length-`n` 0/1 mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportMask(Vec<bool>);

impl SupportMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        SupportMask(bits)
    }

    pub fn from_positions(n: usize, positions: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n];
        for &k in positions {
            if k >= n || bits[k] {
                return Err(Error::InvalidArgument(format!(
                    "support positions must be distinct and below n={n}: {positions:?}"
                )));
            }
            bits[k] = true;
        }
        Ok(SupportMask(bits))
    }

    pub fn full(n: usize) -> Self {
        SupportMask(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Support positions in increasing order.
    pub fn positions(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect()
    }

    /// Positions outside the support, increasing.
    pub fn complement_positions(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &b)| !b).map(|(k, _)| k).collect()
    }

    /// Mask with `remove` switched off and `add` switched on.
    pub fn swapped(&self, remove: usize, add: usize) -> SupportMask {
        let mut bits = self.0.clone();
        bits[remove] = false;
        bits[add] = true;
        SupportMask(bits)
    }

    /// Number of positions where the masks differ.
    pub fn hamming(&self, other: &SupportMask) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for SupportMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Uniform over all `C(n, q)` masks.
pub fn sample_support<R: Rng + ?Sized>(dims: ProblemDims, rng: &mut R) -> SupportMask {
    let positions = rand::seq::index::sample(rng, dims.n(), dims.q()).into_vec();
    SupportMask::from_positions(dims.n(), &positions).expect("index::sample yields distinct indices")
}

/// Sparse vector `x` together with the content it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    x: Vec<Complex64>,
    content: Vec<Complex64>,
    support: SupportMask,
}

impl SparseVector {
    pub fn x(&self) -> &[Complex64] {
        &self.x
    }

    /// Length-`q` content (C1) or length-`n` pre-mask content (C2).
    pub fn content(&self) -> &[Complex64] {
        &self.content
    }

    pub fn support(&self) -> &SupportMask {
        &self.support
    }

    /// The nonzero-position values in increasing index order.
    pub fn support_values(&self) -> Vec<Complex64> {
        self.support.positions().into_iter().map(|k| self.x[k]).collect()
    }
}

/// Construction C1: place the `q` content values at the support positions in
/// increasing index order.
pub fn assemble_c1(support: &SupportMask, content_q: &[Complex64]) -> Result<SparseVector> {
    let positions = support.positions();
    if content_q.len() != positions.len() {
        return Err(Error::LengthMismatch {
            expected: positions.len(),
            actual: content_q.len(),
        });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); support.len()];
    for (&k, &v) in positions.iter().zip(content_q) {
        x[k] = v;
    }
    Ok(SparseVector {
        x,
        content: content_q.to_vec(),
        support: support.clone(),
    })
}

/// Construction C2: `x = b ⊙ c` for a full-length content vector.
pub fn assemble_c2(support: &SupportMask, content_n: &[Complex64]) -> Result<SparseVector> {
    if content_n.len() != support.len() {
        return Err(Error::LengthMismatch {
            expected: support.len(),
            actual: content_n.len(),
        });
    }
    let x = support
        .bits()
        .iter()
        .zip(content_n)
        .map(|(&b, &c)| if b { c } else { Complex64::new(0.0, 0.0) })
        .collect();
    Ok(SparseVector {
        x,
        content: content_n.to_vec(),
        support: support.clone(),
    })
}

/// Output of one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    y: Vec<Complex64>,
    noise_variance: f64,
}

impl Measurement {
    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    /// Complex noise variance per element, `q / SNR`.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// `y = A x + z`, `z` i.i.d. circular complex Gaussian of variance `q / SNR`.
///
/// Unit-variance noise is always drawn and then scaled, so the random stream
/// consumption does not depend on the SNR.
pub fn channel<R: Rng + ?Sized>(
    x: &SparseVector,
    a: &SensingMatrixSample,
    snr: Snr,
    rng: &mut R,
) -> Result<Measurement> {
    let entries = a.entries();
    if entries.cols() != x.x().len() {
        return Err(Error::LengthMismatch {
            expected: entries.cols(),
            actual: x.x().len(),
        });
    }
    let q = x.support().popcount() as f64;
    let noise_variance = q / snr.linear();
    let scale = noise_variance.sqrt();
    let mut y = entries.mul_vec(x.x());
    for yi in y.iter_mut() {
        let z = complex_gaussian(rng);
        *yi += z * scale;
    }
    Ok(Measurement { y, noise_variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::MasterSeed;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dims_examples() {
        let d = make_dims(10, 3, 6).unwrap();
        assert_eq!(d.beta(), 2.0);
        assert!(d.is_sub_landau());
        assert!((d.p_ratio() - 0.3).abs() < 1e-15);
        let d = make_dims(4, 2, 4).unwrap();
        assert_eq!(d.q_ratio(), 1.0);
        assert!(matches!(make_dims(5, 2, 6), Err(Error::InvalidDims(_))));
        assert!(make_dims(0, 2, 1).is_err());
        assert!(make_dims(5, 0, 1).is_err());
        assert!(make_dims(5, 2, 0).is_err());
    }

    #[test]
    fn snr_db_round_trip() {
        for db in [-20.0, -3.0, 0.0, 7.96, 25.0, 60.0] {
            let s = Snr::from_db(db).unwrap();
            assert!((s.db() - db).abs() <= 1e-12 * db.abs().max(1.0));
        }
        assert_eq!(Snr::from_db(0.0).unwrap().linear(), 1.0);
        assert!(Snr::new(0.0).is_err());
        assert!(Snr::new(-1.0).is_err());
    }

    #[test]
    fn gaussian_matrix_is_seed_deterministic() {
        let dims = make_dims(10, 3, 6).unwrap();
        let seed = MasterSeed::new(11);
        let a = sample_gaussian_matrix(dims, &mut seed.stream("a", &[0]));
        let b = sample_gaussian_matrix(dims, &mut seed.stream("a", &[0]));
        assert_eq!(a, b);
        assert_eq!(a.entries().rows(), 3);
        assert_eq!(a.entries().cols(), 10);
        assert!(a.row_indices().is_none());
    }

    #[test]
    fn fourier_rows_validated() {
        assert!(SensingMatrixSample::fourier_from_rows(4, &[0, 0]).is_err());
        assert!(SensingMatrixSample::fourier_from_rows(4, &[4]).is_err());
        let dims = make_dims(4, 5, 2).unwrap();
        assert!(sample_fourier_matrix(dims, &mut MasterSeed::new(1).stream("f", &[])).is_err());
    }

    #[test]
    fn c1_places_content_in_index_order() {
        let mask = SupportMask::from_bits(vec![false, true, true, false]);
        let v = assemble_c1(&mask, &[c(1.0, 2.0), c(3.0, 4.0)]).unwrap();
        assert_eq!(v.x(), &[c(0.0, 0.0), c(1.0, 2.0), c(3.0, 4.0), c(0.0, 0.0)]);
        assert_eq!(v.support_values(), vec![c(1.0, 2.0), c(3.0, 4.0)]);
        assert!(matches!(
            assemble_c1(&mask, &[c(1.0, 0.0)]),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
        let full = SupportMask::full(3);
        let content = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        assert_eq!(assemble_c1(&full, &content).unwrap().x(), &content);
    }

    #[test]
    fn c2_edge_masks() {
        let content = [c(1.0, -1.0), c(2.0, 0.5), c(-3.0, 0.0)];
        let zero = SupportMask::from_bits(vec![false; 3]);
        assert!(assemble_c2(&zero, &content)
            .unwrap()
            .x()
            .iter()
            .all(|v| *v == c(0.0, 0.0)));
        assert_eq!(assemble_c2(&SupportMask::full(3), &content).unwrap().x(), &content);
        assert!(assemble_c2(&zero, &content[..2]).is_err());
    }

    #[test]
    fn noiseless_channel_is_exact_product() {
        let dims = make_dims(6, 3, 2).unwrap();
        let seed = MasterSeed::new(3);
        let mut rng = seed.stream("t", &[]);
        let a = sample_gaussian_matrix(dims, &mut rng);
        let b = sample_support(dims, &mut rng);
        let x = assemble_c2(&b, &complex_gaussian_vec(6, &mut rng)).unwrap();
        let m = channel(&x, &a, Snr::infinite(), &mut rng).unwrap();
        assert_eq!(m.noise_variance(), 0.0);
        assert_eq!(m.y(), a.entries().mul_vec(x.x()).as_slice());
    }

    #[test]
    fn channel_is_deterministic_given_stream() {
        let dims = make_dims(6, 3, 2).unwrap();
        let seed = MasterSeed::new(5);
        let mut rng = seed.stream("t", &[]);
        let a = sample_gaussian_matrix(dims, &mut rng);
        let b = sample_support(dims, &mut rng);
        let x = assemble_c2(&b, &complex_gaussian_vec(6, &mut rng)).unwrap();
        let snr = Snr::from_db(10.0).unwrap();
        let m1 = channel(&x, &a, snr, &mut seed.stream("noise", &[1])).unwrap();
        let m2 = channel(&x, &a, snr, &mut seed.stream("noise", &[1])).unwrap();
        assert_eq!(m1, m2);
        assert!((m1.noise_variance() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn full_support_sample_is_all_ones() {
        let dims = make_dims(7, 2, 7).unwrap();
        let mut rng = MasterSeed::new(9).stream("s", &[]);
        for _ in 0..20 {
            assert_eq!(sample_support(dims, &mut rng), SupportMask::full(7));
        }
    }

    #[test]
    fn swap_and_hamming() {
        let m = SupportMask::from_positions(5, &[0, 2]).unwrap();
        let s = m.swapped(2, 4);
        assert_eq!(s.positions(), vec![0, 4]);
        assert_eq!(m.hamming(&s), 2);
        assert_eq!(m.to_string(), "10100");
        assert_eq!(m.complement_positions(), vec![1, 3, 4]);
    }
}
