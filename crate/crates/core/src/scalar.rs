//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::TotalOrder;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar the geometry, split solvers and forests are generic over: `f32` or `f64`.
pub trait Scalar:
    Float
    + TotalOrder
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Type name recorded in model documents.
    const NAME: &'static str;

    /// Converts from `f64`, rounding to the nearest representable value.
    fn of(v: f64) -> Self;

    /// Widens (or passes through) to `f64`.
    fn as_f64(self) -> f64;

    fn of_usize(v: usize) -> Self {
        Self::of(v as f64)
    }

    /// Relative slack used when deciding that two computed objectives are tied.
    fn tie_tolerance() -> Self {
        Self::epsilon() * Self::of(64.0)
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
    #[inline]
    fn of(v: f64) -> Self {
        v
    }
    #[inline]
    fn as_f64(self) -> f64 {
        self
    }
}

/// `a` is better than `b` by more than the tie tolerance (relative to their magnitude).
#[inline]
pub(crate) fn clearly_greater<F: Scalar>(a: F, b: F) -> bool {
    let scale = a.abs().max(b.abs()).max(F::one());
    a - b > F::tie_tolerance() * scale
}

/// `a` and `b` agree to within the tie tolerance.
#[inline]
pub(crate) fn nearly_equal<F: Scalar>(a: F, b: F) -> bool {
    !clearly_greater(a, b) && !clearly_greater(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tie_helpers() {
        assert!(nearly_equal(0.3_f64, 0.1 + 0.2));
        assert!(clearly_greater(0.31_f64, 0.3));
        assert!(!clearly_greater(0.3_f32, 0.1 + 0.2));
    }
}
