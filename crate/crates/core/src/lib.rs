//! Information rates, SNR requirements and support-detection error analysis
//! for sparse signals measured with fewer samples than the Landau rate.
//!
//! A signal `x` of length `n` has `q` nonzero entries on an unknown support
//! and is observed through `p < q` noisy linear measurements `y = A x + z`.
//! The support itself carries information, so recovering it costs rate.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic_error;
pub mod asymptotics;
pub mod bounds;
pub mod cli;
pub mod detection;
pub mod error;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod seed;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use model::{MatrixKind, ProblemDims, Snr, SupportMask};
pub use seed::MasterSeed;
