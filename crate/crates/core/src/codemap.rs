//! Code map: from symbolic words to points of the attractor.
//!
//! The value `code_point(sys, w, x) = γ_{w₀} ∘ … ∘ γ_{w_{n−1}}(x)` converges,
//! as the word grows, to a point of the attractor independent of `x`; the
//! certified rate is `code_error_bound`.  Over [`Rational`] scalars every
//! result here is exact, which the algebraic layers rely on.

use crate::ifs::Ifs;
use crate::scalar::{Rational, Scalar};
use crate::word::{Word, WordError};

/// Applies the composition selected by `word` to `x` (first letter outermost).
pub fn code_point<S: Scalar>(sys: &Ifs<S>, word: &Word, x: &[S]) -> Result<Vec<S>, WordError> {
    let d = sys.branch_count();
    let mut y = x.to_vec();
    for letter in word.letters().rev() {
        if !(1..=d).contains(&letter) {
            return Err(WordError::LetterOutOfRange { letter, d });
        }
        y = sys.map(letter).apply(&y);
    }
    Ok(y)
}

/// Certified tail bound `c^depth · diam` for truncating an infinite code.
pub fn code_error_bound<S: Scalar>(sys: &Ifs<S>, depth: usize, diam: f64) -> f64 {
    sys.contraction_ratio().powi(depth as i32) * diam
}

/// Canonical base point: the fixed point of the first map, solved exactly.
pub fn canonical_base_point<S: Scalar>(sys: &Ifs<S>) -> Vec<S> {
    sys.map(1)
        .affine()
        .fixed_point()
        .expect("a contraction has I − A invertible")
}

/// Coded points `x_w = γ_w(x*)` for every word of the given depth,
/// in lexicographic word order.
pub fn coded_points<S: Scalar>(sys: &Ifs<S>, depth: usize) -> Vec<(Word, Vec<S>)> {
    let d = sys.branch_count();
    let base = canonical_base_point(sys);
    let mut level: Vec<(Word, Vec<S>)> = vec![(Word::empty(), base)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * d);
        for i in 1..=d {
            for (w, p) in &level {
                // x_{i·w} = γ_i(x_w); prepending keeps lexicographic order.
                next.push((w.prepend(i, d).unwrap(), sys.map(i).apply(p)));
            }
        }
        level = next;
    }
    level
}

/// A point of the lifted system: base point plus the code accumulated so far.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedPoint<S = f64> {
    pub point: Vec<S>,
    pub code: Word,
}

impl<S: Scalar> LiftedPoint<S> {
    pub fn new(point: Vec<S>, code: Word) -> Self {
        LiftedPoint { point, code }
    }

    /// Leading letter of the code: the strong-separation witness telling
    /// which branch produced this point.
    pub fn leading_letter(&self) -> Option<usize> {
        (!self.code.is_empty()).then(|| self.code.letter(0))
    }
}

/// One step of the lifted system: `γ̃_i(x, ω) = (γ_i(x), i·ω)`.
pub fn lift<S: Scalar>(
    sys: &Ifs<S>,
    letter: usize,
    p: &LiftedPoint<S>,
) -> Result<LiftedPoint<S>, WordError> {
    let d = sys.branch_count();
    if !(1..=d).contains(&letter) {
        return Err(WordError::LetterOutOfRange { letter, d });
    }
    Ok(LiftedPoint {
        point: sys.map(letter).apply(&p.point),
        code: p.code.prepend(letter, d)?,
    })
}

/// Exact-rational view of a system, the form the algebraic layers consume.
pub type ExactIfs = Ifs<Rational>;
