//! Scalar abstraction shared by the geometric and algebraic layers.
//!
//! Everything geometric in this crate is generic over a [`Scalar`]: affine
//! maps, systems, code points and piecewise inverses can be instantiated with
//! floating point types for measurement work and with [`Rational`] wherever a
//! result has to be certified exactly.  [`RealScalar`] marks the subset of
//! scalars with a square root, which the point-cloud metrics require.

use num_rational::BigRational;
use num_traits::{Float, NumCast, Signed, ToPrimitive};
use std::fmt::{Debug, Display};

/// Exact rational scalar used for all certified arithmetic.
pub type Rational = BigRational;

/// Field-like scalar: ring operations, sign, order and an f64 projection.
pub trait Scalar:
    num_traits::Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// Builds the scalar `num / den`; exact types keep the quotient exact.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Possibly lossy projection to `f64`.
    fn to_f64_lossy(&self) -> f64;
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f32 / den as f32
    }

    fn to_f64_lossy(&self) -> f64 {
        *self as f64
    }
}

impl Scalar for Rational {
    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(num.into(), den.into())
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Scalars with floating-point semantics; point-cloud distances live here.
pub trait RealScalar: Scalar + Float {
    /// Converts an `f64` parameter (tolerance, resolution) into the scalar.
    fn from_f64(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("finite f64 converts into a real scalar")
    }
}

impl RealScalar for f64 {}
impl RealScalar for f32 {}
