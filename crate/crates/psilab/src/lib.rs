//! Numerical laboratory for the fine-scale statistics of prime numbers.
//!
//! The crate computes, to controlled accuracy, the classical quantities that
//! measure how regularly primes are distributed at short range:
//!
//! * the Chebyshev function psi(x) and the von Mangoldt coefficients it sums,
//! * exponential sums over primes S(alpha), their integer counterpart
//!   T(alpha), and the truncated mean square of the difference,
//! * the variance J(X,h) of prime counts over sliding windows of length h,
//!   together with an exponentially smoothed variant and the Laplace-transform
//!   bridge between the two,
//! * Fejer and sinc-squared kernels, their masses and log-weighted masses,
//!   and the band-limited taper used to sandwich mean squares,
//! * the pair-correlation form factor F(X,T) over tables of zeta zero
//!   ordinates,
//! * the main terms, error envelopes, and admissible parameter ranges of the
//!   asymptotic predictions tying all of the above together.
//!
//! Everything is deterministic: heavy reductions run over a fixed chunk
//! decomposition whose partial results are merged in chunk order, so enabling
//! the `parallel` feature (or changing the thread count) never changes a bit
//! of output.

// Validation reads !(x >= k) so NaN fails closed; frozen reference constants
// keep their full decimal expansions past f64 resolution.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod baseline;
pub mod checks;
pub mod error;
pub mod expsum;
pub mod kernels;
pub mod mangoldt;
pub mod models;
pub mod paircorr;
pub mod quad;
pub mod sum;
pub mod variance;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
