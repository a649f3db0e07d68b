//! A tiny random codebook run end to end over the sparse channel.
//!
//! Each message `w` owns `N` i.i.d. complex-Gaussian content vectors, one per
//! channel use. A fresh sensing matrix and a fresh uniform support are drawn
//! for every use; the receiver knows the matrices but not the supports.
//!
//! With `support_known_at_tx = false` the codebook covers the content only.
//! The receiver decodes `w` by ML, averaging the likelihood over the unknown
//! supports, then detects each support with [`ml_support_detect`].
//! With `support_known_at_tx = true` there is one codeword per (support
//! sequence, message) pair and the receiver decodes both jointly.

use super::{check_enumerable, ml_support_detect, Hypotheses};
use crate::error::{Error, Result};
use crate::model::{
    assemble_c2, channel, complex_gaussian_vec, sample_matrix, sample_support, MatrixKind, Measurement, ProblemDims,
    SensingMatrixSample, Snr, SupportMask,
};
use crate::seed::MasterSeed;
use crate::special::binomial_u128;
use crate::stats::{run_chunked, wilson_interval, Z95};
use num_complex::Complex64;
use serde::Serialize;

/// Largest codebook the demo will enumerate.
pub const CODEBOOK_CAP: u128 = 1 << 16;

const CODEBOOK_STREAM: &str = "codebook";
const TRIAL_STREAM: &str = "codebook-trial";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodebookDemoConfig {
    pub dims: ProblemDims,
    pub kind: MatrixKind,
    pub block_length: usize,
    pub num_messages: u64,
    pub snr: Snr,
    pub support_known_at_tx: bool,
}

impl CodebookDemoConfig {
    pub fn new(
        dims: ProblemDims,
        kind: MatrixKind,
        block_length: usize,
        num_messages: u64,
        snr: Snr,
        support_known_at_tx: bool,
    ) -> Result<Self> {
        if block_length == 0 {
            return Err(Error::InvalidArgument("block length must be at least 1".into()));
        }
        if num_messages == 0 {
            return Err(Error::InvalidArgument("codebook needs at least one message".into()));
        }
        let cfg = CodebookDemoConfig {
            dims,
            kind,
            block_length,
            num_messages,
            snr,
            support_known_at_tx,
        };
        let count = cfg.codeword_count();
        if count > CODEBOOK_CAP {
            return Err(Error::BudgetExceeded {
                count,
                cap: CODEBOOK_CAP,
            });
        }
        check_enumerable(dims, CODEBOOK_CAP)?;
        Ok(cfg)
    }

    /// Messages set to `round(2^(N R_c))` for a content rate in bits per use.
    pub fn from_rate(
        dims: ProblemDims,
        kind: MatrixKind,
        block_length: usize,
        r_c_bits: f64,
        snr: Snr,
        support_known_at_tx: bool,
    ) -> Result<Self> {
        if !(r_c_bits >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "rate must be nonnegative, got {r_c_bits}"
            )));
        }
        let m = (block_length as f64 * r_c_bits).exp2().round();
        if !(m <= CODEBOOK_CAP as f64) {
            return Err(Error::BudgetExceeded {
                count: if m.is_finite() { m as u128 } else { u128::MAX },
                cap: CODEBOOK_CAP,
            });
        }
        Self::new(dims, kind, block_length, (m as u64).max(1), snr, support_known_at_tx)
    }

    /// Content rate actually carried, `log2(M) / N`.
    pub fn rate_bits(&self) -> f64 {
        (self.num_messages as f64).log2() / self.block_length as f64
    }

    /// Number of codewords: `M`, or `C(n, q)^N M` when the transmitter knows the supports.
    pub fn codeword_count(&self) -> u128 {
        if !self.support_known_at_tx {
            return self.num_messages as u128;
        }
        let per_use = binomial_u128(self.dims.n() as u64, self.dims.q() as u64).unwrap_or(u128::MAX);
        let mut total = self.num_messages as u128;
        for _ in 0..self.block_length {
            total = total.saturating_mul(per_use);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CodebookOutcome {
    pub trials: u64,
    pub message_errors: u64,
    pub support_sequence_errors: u64,
    pub message_error_rate: f64,
    pub support_sequence_error_rate: f64,
    pub message_ci_95: (f64, f64),
}

/// Content vectors indexed `[codeword][use]`, each of length `n`.
type Codebook = Vec<Vec<Vec<Complex64>>>;

fn draw_codebook(cfg: &CodebookDemoConfig, seed: MasterSeed) -> Codebook {
    let mut rng = seed.stream(CODEBOOK_STREAM, &[]);
    (0..cfg.codeword_count())
        .map(|_| {
            (0..cfg.block_length)
                .map(|_| complex_gaussian_vec(cfg.dims.n(), &mut rng))
                .collect()
        })
        .collect()
}

/// All supports as masks, in the enumeration order of [`Hypotheses::all`].
fn support_list(dims: ProblemDims) -> Vec<SupportMask> {
    let n = dims.n();
    let zeros = vec![Complex64::new(0.0, 0.0); n * dims.p()];
    Hypotheses::all(n, dims.q(), dims.p(), &zeros)
        .keys
        .into_iter()
        .map(|k| super::mask_of(k, n))
        .collect()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Index of the smallest score; ties go to the lower index.
fn best_index(scores: impl Iterator<Item = f64>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.enumerate() {
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i, s));
        }
    }
    best.map_or(0, |(i, _)| i)
}

/// Content-only codebook: ML message decoding, then per-use support detection.
fn decode_unknown(
    cfg: &CodebookDemoConfig,
    book: &Codebook,
    a: &[SensingMatrixSample],
    y: &[Measurement],
) -> Result<(usize, Vec<SupportMask>)> {
    let (n, p, q) = (cfg.dims.n(), cfg.dims.p(), cfg.dims.q());
    let var = y[0].noise_variance();
    let scores = book.iter().map(|word| {
        let mut score = 0.0;
        for i in 0..cfg.block_length {
            let cols = Hypotheses::weighted_columns(&a[i], &word[i]);
            let dist = Hypotheses::all(n, q, p, &cols).distances(y[i].y());
            score += if var > 0.0 {
                let ll: Vec<f64> = dist.iter().map(|d| -d / var).collect();
                -log_sum_exp(&ll)
            } else {
                dist.iter().copied().fold(f64::INFINITY, f64::min)
            };
        }
        score
    });
    let w = best_index(scores);
    let supports = (0..cfg.block_length)
        .map(|i| ml_support_detect(&y[i], &a[i], &book[w][i], cfg.dims, CODEBOOK_CAP))
        .collect::<Result<Vec<_>>>()?;
    Ok((w, supports))
}

/// Joint ML over every (support sequence, message) codeword. Codeword index
/// is `w * S^N + sum_i s_i S^(N-1-i)` with `S = C(n, q)`.
fn decode_known(
    cfg: &CodebookDemoConfig,
    book: &Codebook,
    masks: &[SupportMask],
    a: &[SensingMatrixSample],
    y: &[Measurement],
) -> (usize, Vec<usize>) {
    let s = masks.len();
    let per_message = book.len() / cfg.num_messages as usize;
    let scores = book.iter().enumerate().map(|(idx, word)| {
        let seq = support_sequence(idx % per_message, s, cfg.block_length);
        (0..cfg.block_length)
            .map(|i| {
                let x = assemble_c2(&masks[seq[i]], &word[i]).expect("lengths match");
                crate::linalg::dist_sqr(y[i].y(), &a[i].entries().mul_vec(x.x()))
            })
            .sum::<f64>()
    });
    let best = best_index(scores);
    (
        best / per_message,
        support_sequence(best % per_message, s, cfg.block_length),
    )
}

fn support_sequence(mut index: usize, s: usize, len: usize) -> Vec<usize> {
    let mut seq = vec![0; len];
    for slot in seq.iter_mut().rev() {
        *slot = index % s;
        index /= s;
    }
    seq
}

/// Message and support-sequence error rates of the codebook over `trials`
/// independent blocks. The codebook is drawn once from `seed`.
pub fn codebook_demo(cfg: &CodebookDemoConfig, trials: u64, seed: MasterSeed) -> Result<CodebookOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let book = draw_codebook(cfg, seed);
    let masks = support_list(cfg.dims);
    let s = masks.len();
    let per_message = book.len() / cfg.num_messages as usize;

    let chunks = run_chunked(trials, |range| -> Result<(u64, u64)> {
        let (mut msg_err, mut sup_err) = (0u64, 0u64);
        for t in range {
            let mut rng = seed.stream(TRIAL_STREAM, &[t]);
            let w = rand::Rng::random_range(&mut rng, 0..cfg.num_messages) as usize;
            let mut a = Vec::with_capacity(cfg.block_length);
            let mut truth = Vec::with_capacity(cfg.block_length);
            let mut y = Vec::with_capacity(cfg.block_length);
            for _ in 0..cfg.block_length {
                a.push(sample_matrix(cfg.kind, cfg.dims, &mut rng)?);
                truth.push(sample_support(cfg.dims, &mut rng));
            }
            let word = if cfg.support_known_at_tx {
                let seq_index = truth.iter().fold(0usize, |acc, m| {
                    acc * s + masks.iter().position(|x| x == m).expect("listed")
                });
                &book[w * per_message + seq_index]
            } else {
                &book[w]
            };
            for i in 0..cfg.block_length {
                let x = assemble_c2(&truth[i], &word[i])?;
                y.push(channel(&x, &a[i], cfg.snr, &mut rng)?);
            }
            let (w_hat, supports_ok) = if cfg.support_known_at_tx {
                let (w_hat, seq) = decode_known(cfg, &book, &masks, &a, &y);
                (w_hat, seq.iter().zip(&truth).all(|(&j, m)| &masks[j] == m))
            } else {
                let (w_hat, detected) = decode_unknown(cfg, &book, &a, &y)?;
                (w_hat, detected == truth)
            };
            msg_err += (w_hat != w) as u64;
            sup_err += (!supports_ok) as u64;
        }
        Ok((msg_err, sup_err))
    });

    let (mut msg_err, mut sup_err) = (0u64, 0u64);
    for c in chunks {
        let (m, s) = c?;
        msg_err += m;
        sup_err += s;
    }
    Ok(CodebookOutcome {
        trials,
        message_errors: msg_err,
        support_sequence_errors: sup_err,
        message_error_rate: msg_err as f64 / trials as f64,
        support_sequence_error_rate: sup_err as f64 / trials as f64,
        message_ci_95: wilson_interval(msg_err, trials, Z95),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_dims;

    fn tiny(n_uses: usize, m: u64, db: f64, known: bool) -> CodebookDemoConfig {
        let dims = make_dims(4, 2, 2).unwrap();
        CodebookDemoConfig::new(dims, MatrixKind::Gaussian, n_uses, m, Snr::from_db(db).unwrap(), known).unwrap()
    }

    #[test]
    fn cap_is_enforced() {
        let dims = make_dims(4, 2, 2).unwrap();
        let snr = Snr::from_db(10.0).unwrap();
        assert!(matches!(
            CodebookDemoConfig::new(dims, MatrixKind::Gaussian, 8, 4, snr, true),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(CodebookDemoConfig::new(dims, MatrixKind::Gaussian, 2, 4, snr, true).is_ok());
        assert!(CodebookDemoConfig::from_rate(dims, MatrixKind::Gaussian, 8, 2.5, snr, false).is_err());
        assert!(CodebookDemoConfig::new(dims, MatrixKind::Gaussian, 8, 0, snr, false).is_err());
    }

    #[test]
    fn from_rate_rounds() {
        let dims = make_dims(4, 2, 2).unwrap();
        let cfg = CodebookDemoConfig::from_rate(dims, MatrixKind::Gaussian, 8, 0.25, Snr::from_db(0.0).unwrap(), false)
            .unwrap();
        assert_eq!(cfg.num_messages, 4);
        assert_eq!(cfg.rate_bits(), 0.25);
        assert_eq!(tiny(2, 4, 0.0, true).codeword_count(), 144);
    }

    #[test]
    fn sequence_index_roundtrip() {
        assert_eq!(support_sequence(0, 6, 3), vec![0, 0, 0]);
        assert_eq!(support_sequence(6 * 6 * 2 + 6 * 5 + 1, 6, 3), vec![2, 5, 1]);
    }

    #[test]
    fn noiseless_decoding_is_exact() {
        for known in [false, true] {
            let cfg = tiny(2, 4, 0.0, known);
            let cfg = CodebookDemoConfig {
                snr: Snr::infinite(),
                ..cfg
            };
            let out = codebook_demo(&cfg, 100, MasterSeed::new(5)).unwrap();
            assert_eq!(out.message_errors, 0);
            assert_eq!(out.support_sequence_errors, 0);
        }
    }

    #[test]
    fn single_message_never_errs() {
        let out = codebook_demo(&tiny(3, 1, -10.0, false), 50, MasterSeed::new(2)).unwrap();
        assert_eq!(out.message_errors, 0);
    }

    #[test]
    fn known_mode_improves_with_snr() {
        let lo = codebook_demo(&tiny(2, 4, 0.0, true), 400, MasterSeed::new(8)).unwrap();
        let hi = codebook_demo(&tiny(2, 4, 20.0, true), 400, MasterSeed::new(8)).unwrap();
        assert!(hi.message_error_rate < lo.message_error_rate);
        assert!(hi.support_sequence_error_rate < lo.support_sequence_error_rate);
    }
}
