//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the pipeline is generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent it at all.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar literal out of range")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count out of scalar range")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order for finite scalars; NaN sorts as equal, callers validate finiteness upstream.
pub(crate) fn cmp<T: Scalar>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}
