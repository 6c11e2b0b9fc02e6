//! Exact deciders for contextuality of finite measurement behaviors.
//!
//! A behavior assigns a joint outcome distribution to every context of a
//! measurement scenario. This crate decides, in exact rational arithmetic,
//! whether such a behavior is contextual in the standard sense (no global
//! joint distribution reproduces all context distributions) and in the
//! extended sense that also covers disturbing behaviors (no joint over the
//! observable-context incidence pairs reproduces the context distributions
//! while coupling the copies of each observable as the chosen criterion
//! demands). Both reduce to LP feasibility, solved by a certified rational
//! simplex: the answer always comes with a witness distribution or a Farkas
//! certificate that re-checks by direct arithmetic.
//!
//! On top of the deciders sit behavior transforms (nesting, coarse-graining,
//! post-processing, consistification and its inverse), monotonicity checks
//! for those transforms, a randomized counterexample search, and a small
//! number-theoretic model of the same construction.

pub mod deciders;
pub mod error;
pub mod format;
pub mod lp;
pub mod model;
pub mod numlab;
pub mod principles;
pub mod scalar;
pub mod transforms;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;
pub use scalar::Scalar;

/// Default scalar: arbitrary-precision rational.
pub type Rational = num_rational::BigRational;

/// Crate-wide result type.
pub type Result<T, E = Error> = std::result::Result<T, E>;
