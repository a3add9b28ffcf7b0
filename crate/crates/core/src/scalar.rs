//! Scalar abstraction shared by every geometric routine in the crate.
//!
//! All tolerances are expressed relative to the precision of the scalar, so
//! `f32` instances get proportionally looser thresholds than `f64` ones.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type usable by the engine: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Relative tie band for tropical argmax detection.
    const TIE_REL: f64;
    /// Strictness threshold on normalized LP slack.
    const LP_EPS: f64;
    /// Threshold on normalized singular values for general-position checks.
    const GP_EPS: f64;
    /// Relative pivot tolerance inside the simplex kernel.
    const PIVOT_EPS: f64;
    /// Default half-width of the bounding box used to certify unbounded regions.
    const BOX_RADIUS: f64;
    /// Largest box the enumerator will grow to.
    const BOX_RADIUS_MAX: f64;

    /// Converts an `f64` literal. Panics only on values that are not representable at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const TIE_REL: f64 = 1e-9;
    const LP_EPS: f64 = 1e-7;
    const GP_EPS: f64 = 1e-8;
    const PIVOT_EPS: f64 = 1e-11;
    const BOX_RADIUS: f64 = 1e6;
    const BOX_RADIUS_MAX: f64 = 1e12;
}

impl Scalar for f32 {
    const TIE_REL: f64 = 1e-5;
    const LP_EPS: f64 = 1e-3;
    const GP_EPS: f64 = 1e-4;
    const PIVOT_EPS: f64 = 1e-5;
    const BOX_RADIUS: f64 = 1e3;
    const BOX_RADIUS_MAX: f64 = 1e5;
}
