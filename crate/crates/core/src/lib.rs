//! Spectral and simulation tools for variance bounding of reversible
//! Markov chains.
//!
//! Finite kernels are checked for detailed balance, diagonalized through
//! their `pi`-symmetrization, classified by the top of the mean-zero
//! spectrum, and compared in the off-diagonal order. Continuous-state
//! Metropolis–Hastings samplers come with grid checks of the proposal
//! conditions and with seeded simulation for Monte Carlo diagnostics.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod jacobi;
pub mod kernel;
pub mod mh_continuous;
pub mod mh_finite;
pub mod peskun;
pub mod random;
pub mod simulate;
pub mod spectral;
pub mod variance;

pub use error::{Error, Result};
pub use kernel::ReversibleKernel;
pub use simulate::Estimate;
pub use spectral::{classify, eigendecompose, Classification, SpectralDecomposition};
pub use variance::{AsymptoticVariance, Functional};
