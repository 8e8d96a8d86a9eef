//! Floating-point scalar abstraction shared by the planar geometry code.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating point: `f32` or `f64`.
///
/// Geographic coordinates are always `f64`; everything downstream of the
/// planar projection (grid index, DBSCAN, silhouette, hulls) is generic over
/// this trait.
pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; every value we feed in is representable
    /// (possibly rounded) in both `f32` and `f64`.
    fn of(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("finite f64 converts")
    }

    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).expect("float converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
