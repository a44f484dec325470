//! Scalar abstraction: every numerical routine in this crate is generic over a
//! floating-point type implementing [`Real`]. `f32` and `f64` both qualify;
//! the concrete aliases at the crate root pin the common choice.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// Combines the linear-algebra requirements of `nalgebra` with the numeric
/// conversion traits from `num-traits`.
pub trait Real:
    nalgebra::RealField + Copy + Default + FromPrimitive + ToPrimitive + std::fmt::LowerExp
{
}

impl<T> Real for T where
    T: nalgebra::RealField + Copy + Default + FromPrimitive + ToPrimitive + std::fmt::LowerExp
{
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in scalar type")
}

/// Converts the working scalar into `f64` for reporting and error payloads.
#[inline]
pub fn approx_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
