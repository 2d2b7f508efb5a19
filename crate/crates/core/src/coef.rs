//! Exact coefficients for the word algebra.
//!
//! A coefficient is a finite sum of terms
//!
//! ```text
//!     amp · (√d)^radical · e^(2πi·phase)
//! ```
//!
//! with `amp` a complex number with rational parts, `radical ∈ {0, 1}`, and
//! `phase` a rational number of turns.  This is exactly what the checks need:
//! plain complex rationals for the Cuntz/covariance identities, `√d` for the
//! normalized shift on the transfer side, and rational-turn phases for the
//! gauge action at arbitrary roots of unity.
//!
//! Canonical form: quarter turns are folded into the amplitude as powers of
//! `i`, so stored phases lie in `[0, 1/4)`; `√d` for perfect-square `d` is
//! folded into the amplitude; zero amplitudes are dropped.  Distinct stored
//! keys can still combine to zero through cyclotomic relations (e.g.
//! `1 + e(1/3) + e(2/3) = 0`), so an empty term list certifies zero but a
//! nonempty one does not refute it; every verification here compares sums
//! built the same way on both sides, where cancellation is termwise.

use crate::exact::{exact_sqrt, format_rational, ExactComplex};
use crate::scalar::{Rational, Scalar};
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct CoefKey {
    radical: bool,
    /// Turns in `[0, 1/4)`.
    phase: Rational,
}

/// Element of ℚ(i)[√d, roots of unity], kept in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Coef {
    terms: BTreeMap<CoefKey, ExactComplex>,
}

fn times_i(z: &ExactComplex) -> ExactComplex {
    Complex::new(-z.im.clone(), z.re.clone())
}

/// Reduce `phase` modulo 1, then fold whole quarter turns into the amplitude.
fn fold_quarters(phase: &Rational, amp: ExactComplex) -> (Rational, ExactComplex) {
    let wrapped = phase - phase.floor();
    let quarters = (&wrapped * Rational::from_integer(BigInt::from(4)))
        .floor()
        .to_integer()
        .to_u8()
        .expect("wrapped phase is in [0,1)");
    let mut amp = amp;
    for _ in 0..quarters {
        amp = times_i(&amp);
    }
    let rem = wrapped - Rational::from_ratio(quarters as i64, 4);
    (rem, amp)
}

impl Coef {
    pub fn zero() -> Self {
        Coef::default()
    }

    pub fn from_complex(z: ExactComplex) -> Self {
        let mut c = Coef::zero();
        c.push(Rational::zero(), false, z, 1);
        c
    }

    pub fn from_rational(q: Rational) -> Self {
        Coef::from_complex(Complex::new(q, Rational::zero()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Coef::from_rational(Rational::from_ratio(num, den))
    }

    pub fn one() -> Self {
        Coef::from_ratio(1, 1)
    }

    /// The root of unity `e^(2πi·turns)`.
    pub fn root_of_unity(turns: &Rational) -> Self {
        let mut c = Coef::zero();
        c.push(
            turns.clone(),
            false,
            Complex::new(Rational::one(), Rational::zero()),
            1,
        );
        c
    }

    /// `√d` (exactly folded when `d` is a perfect square).
    pub fn sqrt_d(d: usize) -> Self {
        let mut c = Coef::zero();
        c.push(
            Rational::zero(),
            true,
            Complex::new(Rational::one(), Rational::zero()),
            d,
        );
        c
    }

    /// `d^(−1/2)`, stored as `(1/d)·√d`.
    pub fn inv_sqrt_d(d: usize) -> Self {
        assert!(d >= 1, "alphabet size must be positive");
        let mut c = Coef::zero();
        c.push(
            Rational::zero(),
            true,
            Complex::new(Rational::from_ratio(1, d as i64), Rational::zero()),
            d,
        );
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Merge a term whose key is already canonical.
    fn insert_canonical(&mut self, key: CoefKey, amp: ExactComplex) {
        if amp.re.is_zero() && amp.im.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| Complex::new(Rational::zero(), Rational::zero()));
        *entry = Complex::new(&entry.re + &amp.re, &entry.im + &amp.im);
        if entry.re.is_zero() && entry.im.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Fold the phase into `[0, 1/4)` (the radical part is already canonical).
    fn push_phase(&mut self, phase: Rational, radical: bool, amp: ExactComplex) {
        let (phase, amp) = fold_quarters(&phase, amp);
        self.insert_canonical(CoefKey { radical, phase }, amp);
    }

    /// Full canonicalization: fold phase quarters and, for perfect-square
    /// `d`, fold the radical into the amplitude.  Only constructors and
    /// `mul` create new radical parts, so only they need `d`.
    fn push(&mut self, phase: Rational, radical: bool, amp: ExactComplex, d: usize) {
        if amp.re.is_zero() && amp.im.is_zero() {
            return;
        }
        let mut amp = amp;
        let mut radical = radical;
        if radical {
            if let Some(root) = exact_sqrt(&Rational::from_integer(BigInt::from(d))) {
                amp = Complex::new(&amp.re * &root, &amp.im * &root);
                radical = false;
            }
        }
        self.push_phase(phase, radical, amp);
    }

    pub fn add(&self, other: &Coef) -> Coef {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.insert_canonical(k.clone(), v.clone());
        }
        out
    }

    pub fn neg(&self) -> Coef {
        let mut out = Coef::zero();
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), -v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Coef) -> Coef {
        self.add(&other.neg())
    }

    /// Product in ℚ(i)[√d, phases]; `√d·√d` becomes the rational `d`.
    pub fn mul(&self, other: &Coef, d: usize) -> Coef {
        let mut out = Coef::zero();
        for (k1, a1) in &self.terms {
            for (k2, a2) in &other.terms {
                let mut amp = a1 * a2;
                let radical = match (k1.radical, k2.radical) {
                    (true, true) => {
                        let df = Rational::from_integer(BigInt::from(d));
                        amp = Complex::new(&amp.re * &df, &amp.im * &df);
                        false
                    }
                    (r1, r2) => r1 ^ r2,
                };
                out.push(&k1.phase + &k2.phase, radical, amp, d);
            }
        }
        out
    }

    pub fn conj(&self) -> Coef {
        let mut out = Coef::zero();
        for (k, v) in &self.terms {
            out.push_phase(-k.phase.clone(), k.radical, v.conj());
        }
        out
    }

    /// Multiply by the root of unity `e^(2πi·turns)` — the gauge scaling.
    pub fn rotate(&self, turns: &Rational) -> Coef {
        let mut out = Coef::zero();
        for (k, v) in &self.terms {
            out.push_phase(&k.phase + turns, k.radical, v.clone());
        }
        out
    }

    pub fn scale_complex(&self, z: &ExactComplex) -> Coef {
        let mut out = Coef::zero();
        for (k, v) in &self.terms {
            out.insert_canonical(k.clone(), v * z);
        }
        out
    }

    /// Lossy numeric value (uses `d` to realize the radical).
    pub fn to_complex64(&self, d: usize) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for (k, v) in &self.terms {
            let mut w = Complex::new(v.re.to_f64_lossy(), v.im.to_f64_lossy());
            if k.radical {
                w *= (d as f64).sqrt();
            }
            let angle = 2.0 * std::f64::consts::PI * k.phase.to_f64_lossy();
            if !k.phase.is_zero() {
                w *= Complex::new(angle.cos(), angle.sin());
            }
            acc += w;
        }
        acc
    }

    pub fn abs64(&self, d: usize) -> f64 {
        self.to_complex64(d).norm()
    }

    /// When the coefficient is a plain complex rational, return it.
    pub fn as_plain(&self) -> Option<ExactComplex> {
        if self.terms.is_empty() {
            return Some(Complex::new(Rational::zero(), Rational::zero()));
        }
        if self.terms.len() == 1 {
            let (k, v) = self.terms.iter().next().unwrap();
            if !k.radical && k.phase.is_zero() {
                return Some(v.clone());
            }
        }
        None
    }

    /// Iterate canonical parts as `(phase, radical, amplitude)`.
    pub fn parts(&self) -> impl Iterator<Item = (&Rational, bool, &ExactComplex)> {
        self.terms.iter().map(|(k, v)| (&k.phase, k.radical, v))
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}+{}i)", format_rational(&v.re), format_rational(&v.im))?;
            if k.radical {
                write!(f, "·√d")?;
            }
            if !k.phase.is_zero() {
                write!(f, "·e({})", format_rational(&k.phase))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn turns(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn quarter_turns_fold_into_gaussian_units() {
        let i = Coef::root_of_unity(&turns(1, 4));
        assert_eq!(
            i.as_plain().unwrap(),
            Complex::new(Rational::zero(), Rational::one())
        );
        let minus_one = Coef::root_of_unity(&turns(1, 2));
        assert_eq!(
            minus_one.as_plain().unwrap(),
            Complex::new(-Rational::one(), Rational::zero())
        );
        // e(5/4) = e(1/4) = i.
        assert_eq!(Coef::root_of_unity(&turns(5, 4)), i);
    }

    #[test]
    fn cube_root_powers_cycle_exactly() {
        let w = Coef::root_of_unity(&turns(1, 3));
        let w3 = w.mul(&w, 2).mul(&w, 2);
        assert_eq!(w3, Coef::one());
        assert!(!w.mul(&w, 2).sub(&w).is_zero());
        // Rotation by the conjugate phase inverts the gauge scaling.
        assert_eq!(w.rotate(&turns(-1, 3)), Coef::one());
    }

    #[test]
    fn radical_squares_to_d_and_perfect_squares_fold() {
        let r3 = Coef::sqrt_d(3);
        assert_eq!(r3.mul(&r3, 3), Coef::from_ratio(3, 1));
        let r4 = Coef::sqrt_d(4);
        assert_eq!(r4, Coef::from_ratio(2, 1));
        // Ŝ*Ŝ-style arithmetic: (d^(-1/2))²·d = 1.
        let inv = Coef::inv_sqrt_d(3);
        assert_eq!(inv.mul(&inv, 3).mul(&Coef::from_ratio(3, 1), 3), Coef::one());
    }

    #[test]
    fn conjugation_is_an_involution_and_respects_products() {
        let z = Coef::from_complex(Complex::new(turns(1, 2), turns(-2, 3)))
            .mul(&Coef::root_of_unity(&turns(1, 3)), 2)
            .add(&Coef::sqrt_d(2));
        assert_eq!(z.conj().conj(), z);
        let w = Coef::root_of_unity(&turns(1, 6)).scale_complex(&Complex::new(
            turns(3, 1),
            turns(1, 5),
        ));
        assert_eq!(z.mul(&w, 2).conj(), z.conj().mul(&w.conj(), 2));
    }

    #[test]
    fn numeric_view_matches_the_symbols() {
        let z = Coef::inv_sqrt_d(2);
        assert!((z.to_complex64(2).re - 0.5f64.sqrt()).abs() < 1e-15);
        let w = Coef::root_of_unity(&turns(1, 3));
        let v = w.to_complex64(2);
        assert!((v.re + 0.5).abs() < 1e-15);
        assert!((v.im - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn addition_cancels_termwise() {
        let w = Coef::root_of_unity(&turns(1, 3)).scale_complex(&Complex::new(
            turns(2, 7),
            turns(0, 1),
        ));
        assert!(w.sub(&w).is_zero());
        assert_eq!(w.add(&w.neg()), Coef::zero());
    }
}
