//! Scalar abstraction for probability arithmetic.
//!
//! Every verdict in this crate hinges on exact comparisons (a marginal either
//! equals another or it does not; an LP row either balances or it does not),
//! so the scalar must be an ordered field with exact arithmetic. The `Ord`
//! bound rules out floating-point types on purpose.

use std::fmt;

use num_traits::{FromPrimitive, Num, Signed};

/// Exact ordered-field scalar, e.g. `Ratio<i64>` or the default
/// [`crate::Rational`].
pub trait Scalar:
    Num + Signed + Ord + Clone + FromPrimitive + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Exact value of `num/den`. Panics on a zero denominator.
    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_int(num) / Self::from_int(den)
    }

    fn from_int(n: i64) -> Self {
        Self::from_i64(n).expect("scalar admits i64 values")
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + Ord
        + Clone
        + FromPrimitive
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
