//! The scalar abstraction all numeric code is written against.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar of the library.
///
/// Blanket-implemented for any type with the listed bounds, which in
/// practice means `f32` and `f64`. Core math never names a concrete
/// float, so both precisions share one code path; the crate-root aliases
/// pick `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for values no float can
    /// represent (never for the in-range constants used internally).
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    /// Slack under which a direction counts as already unit-norm and is
    /// kept bit-exact instead of being renormalized: `1e-12` for `f64`,
    /// widened to `16 * epsilon` for coarser scalars.
    #[inline]
    fn unit_norm_tolerance() -> Self {
        let wide = Self::epsilon() * Self::of(16.0);
        let floor = Self::of(1e-12);
        if wide > floor {
            wide
        } else {
            floor
        }
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}
