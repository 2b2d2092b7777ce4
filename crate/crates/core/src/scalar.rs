//! Scalar abstraction shared by every routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Real floating-point scalar: implemented for `f32` and `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` constant into the scalar type.
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }

    /// Converts to `f64` for reporting and error payloads.
    fn f(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance `x` clamped from below to a small multiple of machine epsilon,
    /// so that `f64` defaults stay meaningful when instantiated at `f32`.
    fn tol(x: f64) -> Self {
        let floor = Self::default_epsilon() * Self::c(64.0);
        let t = Self::c(x);
        if t > floor {
            t
        } else {
            floor
        }
    }

    fn of_usize(k: usize) -> Self {
        Self::c(k as f64)
    }

    /// Smallest positive normal value.
    fn tiny() -> Self;

    fn not_a_number() -> Self;

    /// Largest finite value.
    fn huge() -> Self;
}

impl Real for f32 {
    fn tiny() -> Self {
        f32::MIN_POSITIVE
    }
    fn not_a_number() -> Self {
        f32::NAN
    }
    fn huge() -> Self {
        f32::MAX
    }
}

impl Real for f64 {
    fn tiny() -> Self {
        f64::MIN_POSITIVE
    }
    fn not_a_number() -> Self {
        f64::NAN
    }
    fn huge() -> Self {
        f64::MAX
    }
}
