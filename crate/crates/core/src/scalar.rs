use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar type the embeddings are computed in.
///
/// Implemented for `f32` and `f64`. Grid keys are always integers, so the
/// scalar type only affects coordinates, distances and embedding values.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }

    #[inline]
    fn from_key(v: i64) -> Self {
        Self::from_i64(v).expect("grid index representable in scalar type")
    }

    /// Lossy view used for error messages and reports.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Absolute tolerance used where the construction is closed-form but
    /// float association can still move the last bits.
    fn default_tolerance() -> Self;
}

impl Scalar for f32 {
    fn default_tolerance() -> Self {
        1e-4
    }
}

impl Scalar for f64 {
    fn default_tolerance() -> Self {
        1e-9
    }
}

/// `1.5 * r`, the cover radius at scale `r`.
#[inline]
pub(crate) fn cover_radius<T: Scalar>(r: T) -> T {
    T::lit(1.5) * r
}

/// Total order on finite scalars. Diagram constructors reject NaN, so the
/// fallback branch is unreachable for validated data.
#[inline]
pub(crate) fn cmp_finite<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}
