//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
///
/// The associated constants carry the precision-dependent thresholds used by
/// the linear-algebra kernel. The `f64` values are the contract values; the
/// `f32` values are scaled to single-precision round-off.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Relative eigenvalue floor below which a Gram matrix counts as singular.
    const GRAM_RCOND: f64;
    /// Relative asymmetry tolerated before a matrix is rejected as non-Hermitian.
    const HERMITIAN_TOL: f64;
    /// Relative floor for the Schur complement behind the angle error bound.
    const BOUND_RCOND: f64;

    /// Converts an `f64` literal. Panics only for values not representable at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f64 {
    const GRAM_RCOND: f64 = 1e-12;
    const HERMITIAN_TOL: f64 = 1e-10;
    const BOUND_RCOND: f64 = 1e-12;
}

impl Real for f32 {
    const GRAM_RCOND: f64 = 1e-6;
    const HERMITIAN_TOL: f64 = 1e-4;
    const BOUND_RCOND: f64 = 1e-6;
}
