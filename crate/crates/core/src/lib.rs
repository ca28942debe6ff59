//! Exact and efficient interval estimators for hierarchical models with
//! partially specified priors.
//!
//! The library turns a sampling model plus a *conditional* prior (the marginal
//! hyper-prior being unknown) into a plausibility function for the parameter
//! of interest, and inverts that function into an interval estimate whose
//! joint-distribution coverage is guaranteed at the nominal level.
//!
//! Three concrete models are provided on top of the generic machinery:
//!
//! * [`normal`] — the normal hierarchical (shrinkage) model, with the prior
//!   scale either known or unknown;
//! * [`poisson`] — the Poisson/Gamma hierarchical model with known shape and
//!   unknown scale, plus the classical and empirical-Bayes rate intervals;
//! * [`binom`] — the two-sample binomial rate-difference model with a known
//!   prior on the difference.
//!
//! The crate is `no_std`-compatible (`alloc` required); enable the `libm`
//! feature when building without `std`.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` deliberately rejects NaN in domain checks; coefficient tables
// keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("either the `std` or the `libm` feature must be enabled");

extern crate alloc;

pub mod binom;
pub mod dist;
mod error;
pub mod im;
mod math;
pub mod normal;
pub mod poisson;
pub mod special;
pub mod stream;

pub use error::{Error, Result};
pub use im::IntervalEstimate;
pub use stream::RandomStream;
