//! Special functions, log-space probability arithmetic and symmetric
//! eigendecomposition used by every NFA computation.
//!
//! Probabilities leave this module as [`LogProb`] values (base-10 logs), so
//! tails far below `f64::MIN_POSITIVE` remain representable.

mod binomial;
mod chi2;
mod eig;
mod gamma;
mod logprob;

pub use binomial::{binomial_tail, ln_beta_inc_upper_tail};
pub use chi2::{chi2_isf, chi2_sf};
pub use eig::{symmetric_eig, SpectralDecomposition};
pub use gamma::{ln_gamma, ln_gamma_q};
pub use logprob::LogProb;
