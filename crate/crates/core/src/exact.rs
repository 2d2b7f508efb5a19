//! Exact rational and complex-rational helpers.
//!
//! Reports print rationals as `p/q` strings and external files may supply
//! entries either as JSON numbers (read exactly as dyadic rationals) or as
//! `p/q` strings for values such as 1/3 that have no finite binary expansion.

use crate::scalar::Rational;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Complex number with exact rational real and imaginary parts.
pub type ExactComplex = Complex<Rational>;

/// Complex f64, used on the measurement paths.
pub type Complex64 = Complex<f64>;

pub fn exact_complex(re: Rational, im: Rational) -> ExactComplex {
    Complex::new(re, im)
}

pub fn exact_complex_to_f64(z: &ExactComplex) -> Complex64 {
    Complex::new(
        z.re.to_f64().unwrap_or(f64::NAN),
        z.im.to_f64().unwrap_or(f64::NAN),
    )
}

/// Parses `p`, `-p/q` or a plain decimal integer into a rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den.is_zero() {
                None
            } else {
                Some(BigRational::new(num, den))
            }
        }
        None => {
            let int: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(int))
        }
    }
}

/// Formats a rational as `p/q` (or plain `p` for integers).
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Exact conversion of a finite f64 into the dyadic rational it denotes.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

/// Returns `√v` exactly when `v` is the square of a rational.
pub fn exact_sqrt(v: &Rational) -> Option<Rational> {
    if v.is_negative() {
        return None;
    }
    let num = v.numer().magnitude();
    let den = v.denom().magnitude();
    let num_root = num.sqrt();
    let den_root = den.sqrt();
    if &num_root.clone() * &num_root == *num && &den_root.clone() * &den_root == *den {
        Some(BigRational::new(
            BigInt::from(num_root),
            BigInt::from(den_root),
        ))
    } else {
        None
    }
}

/// Denominator bound applied to inexact square roots (~2⁻⁸⁰ resolution).
fn sqrt_denominator() -> BigInt {
    BigInt::one() << 80
}

/// Deterministic rational approximation of `√v` for `v ≥ 0`.
///
/// Perfect squares are returned exactly.  Otherwise one Newton step refines
/// the f64 square root and the result is floored onto the fixed grid
/// `k / 2⁸⁰`, keeping the error below `2⁻⁸⁰` while bounding denominator
/// growth in downstream products.
pub fn rational_sqrt(v: &Rational) -> Rational {
    if v.is_zero() {
        return Rational::zero();
    }
    assert!(!v.is_negative(), "rational_sqrt needs a nonnegative input");
    if let Some(root) = exact_sqrt(v) {
        return root;
    }
    let seed = v.to_f64().unwrap_or(f64::MAX).sqrt();
    let mut r = rational_from_f64(seed).unwrap_or_else(|| v.clone());
    if r.is_zero() {
        // Subnormal underflow: fall back to the grid resolution.
        r = BigRational::new(BigInt::one(), sqrt_denominator());
    }
    // One Newton step: error drops to ~1e-32 relative.
    r = (&r + v / &r) / BigRational::from_integer(2.into());
    // Snap onto k / 2^80 to stop denominator blow-up in later products.
    let den = sqrt_denominator();
    let scaled = (&r * BigRational::from_integer(den.clone())).floor();
    BigRational::new(scaled.to_integer(), den)
}

/// Greatest integer square root helper exposed for perfect-square folding.
pub fn integer_sqrt_exact(n: u64) -> Option<u64> {
    let root = BigUint::from(n).sqrt();
    let root_u64 = root.to_u64()?;
    (root_u64 * root_u64 == n).then_some(root_u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["2/3", "-7/5", "4", "0"] {
            let q = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
        }
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("a/b").is_none());
    }

    #[test]
    fn f64_conversion_is_exact_for_dyadics() {
        assert_eq!(rational_from_f64(0.375).unwrap(), rat(3, 8));
    }

    #[test]
    fn perfect_squares_take_the_exact_path() {
        assert_eq!(rational_sqrt(&rat(9, 16)), rat(3, 4));
        assert_eq!(exact_sqrt(&rat(2, 1)), None);
        assert_eq!(integer_sqrt_exact(4), Some(2));
        assert_eq!(integer_sqrt_exact(3), None);
    }

    #[test]
    fn newton_sqrt_is_tight() {
        let two = rat(2, 1);
        let r = rational_sqrt(&two);
        let err = (&r * &r - &two).abs();
        assert!(err < rat(1, 1_000_000_000_000_000_000)); // far below any check tolerance
    }
}
