//! Scalar abstraction: everything numeric in this crate is generic over a
//! floating-point type, with concrete `f64` aliases at the crate root.

use std::fmt;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar (f32 or f64).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Converts a fixed `f64` constant (e.g. a tolerance) into `Self`.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(|| {
            if v > 0.0 {
                Self::max_value()
            } else {
                Self::min_value()
            }
        })
    }

    /// Lossy view as `f64`, used for sampling decisions and reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
