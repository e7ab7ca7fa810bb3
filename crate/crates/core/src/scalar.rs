//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the solvers are generic over.
///
/// Everything is written against this trait so that `f32` runs are possible
/// for quick experiments; the reference results are all produced in `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in target scalar")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in target scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Gamma function, evaluated in double precision.
    fn gamma(self) -> Self {
        Self::lit(libm::tgamma(self.as_f64()))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Rounds `total / step` to an integer count if it is one within `rel_tol`.
pub(crate) fn integer_ratio<T: Real>(total: T, step: T, rel_tol: f64) -> Option<usize> {
    let ratio = (total / step).as_f64();
    if !ratio.is_finite() || ratio < 0.0 {
        return None;
    }
    let n = ratio.round();
    if (ratio - n).abs() <= rel_tol * ratio.max(1.0) {
        Some(n as usize)
    } else {
        None
    }
}
