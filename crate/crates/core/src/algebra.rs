//! Exact *-algebra of finite sums `Σ c_{μν} S_μ S_ν*`.
//!
//! The monomials multiply by the word rule
//! `(S_μS_ν*)(S_αS_β*) = S_{μα′}S_β*` when `α = να′`, `S_μS_{βν′}*` when
//! `ν = αν′`, and `0` otherwise; coefficients are exact (see [`Coef`]).
//! Elements at different cylinder depths are compared through `refine`,
//! which rewrites `S_μS_ν* = Σ_i S_{μi}S_{νi}*` without changing the value.

use crate::coef::Coef;
use crate::exact::{format_rational, parse_rational, ExactComplex};
use crate::scalar::{Rational, Scalar};
use crate::word::{Word, WordError};
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("alphabet sizes differ: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("({re}) + ({im})i does not have unit modulus")]
    NotUnitModulus { re: String, im: String },
    #[error("depth {got} is smaller than the element's maximal word length {required}")]
    DepthTooSmall { required: usize, got: usize },
    #[error("computation needs {needed} words, over the cap {cap}")]
    BudgetExceeded { needed: usize, cap: usize },
    #[error("malformed element: {0}")]
    Parse(String),
}

/// Finitely supported `(μ, ν) → coefficient` map over a `d`-letter alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    d: usize,
    terms: BTreeMap<(Word, Word), Coef>,
}

impl AlgebraElement {
    pub fn zero(d: usize) -> Self {
        assert!(d >= 1, "alphabet size must be positive");
        AlgebraElement {
            d,
            terms: BTreeMap::new(),
        }
    }

    /// The empty-word diagonal monomial — the unit of the algebra.
    pub fn one(d: usize) -> Self {
        let mut e = AlgebraElement::zero(d);
        e.add_term(Word::empty(), Word::empty(), Coef::one());
        e
    }

    pub fn monomial(d: usize, mu: Word, nu: Word, coef: Coef) -> Self {
        let mut e = AlgebraElement::zero(d);
        e.add_term(mu, nu, coef);
        e
    }

    /// The isometry `s_i` — the monomial `((i), ∅)`.
    pub fn generator(d: usize, i: usize) -> Result<Self, AlgebraError> {
        let mu = Word::new(&[i], d)?;
        Ok(AlgebraElement::monomial(d, mu, Word::empty(), Coef::one()))
    }

    /// `S = Σ_i s_i` (unnormalized shift).
    pub fn shift_element(d: usize) -> Self {
        let mut e = AlgebraElement::zero(d);
        for i in 1..=d {
            e.add_term(
                Word::new(&[i], d).expect("letter in range"),
                Word::empty(),
                Coef::one(),
            );
        }
        e
    }

    /// `Ŝ = d^(−1/2)·S`, the isometry normalized so `Ŝ*Ŝ = 1`.
    pub fn normalized_shift(d: usize) -> Self {
        AlgebraElement::shift_element(d).scale(&Coef::inv_sqrt_d(d))
    }

    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Word, &Coef)> {
        self.terms.iter().map(|((m, n), c)| (m, n, c))
    }

    /// Syntactic zero: no terms at the current depths.  `is_exactly_zero`
    /// additionally refines to a common depth first.
    pub fn is_syntactically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mu: Word, nu: Word, coef: Coef) {
        if coef.is_zero() {
            return;
        }
        let key = (mu, nu);
        let entry = self.terms.entry(key.clone()).or_insert_with(Coef::zero);
        *entry = entry.add(&coef);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_alphabet(other)?;
        let mut out = self.clone();
        for ((m, n), c) in &other.terms {
            out.add_term(m.clone(), n.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        AlgebraElement {
            d: self.d,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Coef) -> Self {
        let mut out = AlgebraElement::zero(self.d);
        for ((m, n), e) in &self.terms {
            out.add_term(m.clone(), n.clone(), e.mul(c, self.d));
        }
        out
    }

    pub fn scale_complex(&self, z: &ExactComplex) -> Self {
        let mut out = AlgebraElement::zero(self.d);
        for ((m, n), e) in &self.terms {
            out.add_term(m.clone(), n.clone(), e.scale_complex(z));
        }
        out
    }

    fn check_alphabet(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.d != other.d {
            return Err(AlgebraError::AlphabetMismatch {
                left: self.d,
                right: other.d,
            });
        }
        Ok(())
    }

    /// Word-rule product, extended bilinearly.
    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_alphabet(other)?;
        let mut out = AlgebraElement::zero(self.d);
        for ((mu, nu), c) in &self.terms {
            for ((alpha, beta), e) in &other.terms {
                if let Some(alpha_tail) = alpha.strip_prefix(nu) {
                    out.add_term(mu.concat(&alpha_tail), beta.clone(), c.mul(e, self.d));
                } else if let Some(nu_tail) = nu.strip_prefix(alpha) {
                    out.add_term(mu.clone(), beta.concat(&nu_tail), c.mul(e, self.d));
                }
            }
        }
        Ok(out)
    }

    /// `(μ, ν, c) ↦ (ν, μ, conj c)`.
    pub fn adjoint(&self) -> Self {
        let mut out = AlgebraElement::zero(self.d);
        for ((m, n), c) in &self.terms {
            out.add_term(n.clone(), m.clone(), c.conj());
        }
        out
    }

    pub fn degree(mu: &Word, nu: &Word) -> i64 {
        mu.len() as i64 - nu.len() as i64
    }

    /// Gauge action at the root of unity `e^(2πi·turns)`: the coefficient at
    /// `(μ, ν)` rotates by `(|μ|−|ν|)·turns`.
    pub fn gauge(&self, turns: &Rational) -> Self {
        let mut out = AlgebraElement::zero(self.d);
        for ((m, n), c) in &self.terms {
            let deg = Rational::from_integer(BigInt::from(Self::degree(m, n)));
            out.add_term(m.clone(), n.clone(), c.rotate(&(turns * deg)));
        }
        out
    }

    /// Gauge action with the unit given as an exact complex number; only the
    /// Gaussian units lie on the rational circle, anything else is rejected.
    pub fn gauge_at(&self, re: &Rational, im: &Rational) -> Result<Self, AlgebraError> {
        let err = || AlgebraError::NotUnitModulus {
            re: format_rational(re),
            im: format_rational(im),
        };
        if &(re * re) + &(im * im) != Rational::one() {
            return Err(err());
        }
        let turns = if re.is_one() && im.is_zero() {
            Rational::zero()
        } else if re.is_zero() && im.is_one() {
            Rational::from_ratio(1, 4)
        } else if (-re.clone()).is_one() && im.is_zero() {
            Rational::from_ratio(1, 2)
        } else if re.is_zero() && (-im.clone()).is_one() {
            Rational::from_ratio(3, 4)
        } else {
            // |z| = 1 with rational parts and rational angle happens only at
            // the four Gaussian units; other rational points of the circle
            // (3/5, 4/5) are not roots of unity, so reject them too.
            return Err(err());
        };
        Ok(self.gauge(&turns))
    }

    /// Rewrite every term with `|μ| < depth` through
    /// `S_μS_ν* = Σ_i S_{μi}S_{νi}*` until all left words have length ≥
    /// `depth`.  The value of the element is unchanged.
    pub fn refine(&self, depth: usize) -> Self {
        let mut out = AlgebraElement::zero(self.d);
        for ((m, n), c) in &self.terms {
            if m.len() >= depth {
                out.add_term(m.clone(), n.clone(), c.clone());
            } else {
                for u in Word::all_of_length(depth - m.len(), self.d) {
                    out.add_term(m.concat(&u), n.concat(&u), c.clone());
                }
            }
        }
        out
    }

    fn max_left_len(&self) -> usize {
        self.terms.keys().map(|(m, _)| m.len()).max().unwrap_or(0)
    }

    pub fn max_word_len(&self) -> usize {
        self.terms
            .keys()
            .map(|(m, n)| m.len().max(n.len()))
            .max()
            .unwrap_or(0)
    }

    /// Canonical form: all left words refined to the maximal left length.
    /// Distinct monomials with a fixed left length are linearly independent,
    /// so the canonical form of a zero element has no terms (up to exotic
    /// cancellations inside a single coefficient, which never arise from
    /// termwise-constructed differences; see the coefficient docs).
    pub fn canonical(&self) -> Self {
        self.refine(self.max_left_len())
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.canonical().terms.is_empty()
    }

    pub fn equals_mod_refinement(&self, other: &Self) -> Result<bool, AlgebraError> {
        self.check_alphabet(other)?;
        let depth = self.max_left_len().max(other.max_left_len());
        Ok(self.refine(depth) == other.refine(depth))
    }

    /// Numeric size estimate: coefficient magnitudes of the canonical form.
    pub fn coefficient_norm(&self) -> f64 {
        self.canonical()
            .terms
            .values()
            .map(|c| c.abs64(self.d))
            .fold(0.0, f64::max)
    }
}

/// One checked relation: its label and whether the residual vanished exactly.
#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub exactly_zero: bool,
    pub residual_terms: usize,
}

/// Result of checking the defining isometry relations for alphabet size `d`.
#[derive(Clone, Debug, Serialize)]
pub struct CuntzReport {
    pub d: usize,
    pub relations: Vec<RelationCheck>,
    pub all_exact: bool,
}

/// Check `s_i*s_j = δ_ij·1` for all pairs and `Σ_i s_is_i* = 1`.
pub fn verify_cuntz(d: usize) -> Result<CuntzReport, AlgebraError> {
    let one = AlgebraElement::one(d);
    let mut relations = Vec::new();
    let mut record = |name: String, residual: AlgebraElement| {
        let canonical = residual.canonical();
        relations.push(RelationCheck {
            relation: name,
            exactly_zero: canonical.is_syntactically_zero(),
            residual_terms: canonical.term_count(),
        });
    };
    for i in 1..=d {
        let si = AlgebraElement::generator(d, i)?;
        for j in 1..=d {
            let sj = AlgebraElement::generator(d, j)?;
            let mut residual = si.adjoint().multiply(&sj)?;
            if i == j {
                residual = residual.sub(&one)?;
            }
            record(format!("s{i}*·s{j} − {}·1", usize::from(i == j)), residual);
        }
    }
    let mut range_sum = AlgebraElement::zero(d);
    for i in 1..=d {
        let si = AlgebraElement::generator(d, i)?;
        range_sum = range_sum.add(&si.multiply(&si.adjoint())?)?;
    }
    record("Σ s_i·s_i* − 1".to_string(), range_sum.sub(&one)?);
    let all_exact = relations.iter().all(|r| r.exactly_zero);
    Ok(CuntzReport {
        d,
        relations,
        all_exact,
    })
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    mu: String,
    nu: String,
    re: String,
    im: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    sqrt_d: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct ElementDto {
    d: usize,
    terms: Vec<TermDto>,
}

impl AlgebraElement {
    /// JSON form: one record per `(μ, ν, coefficient part)`, rationals as
    /// `"p/q"` strings; `sqrt_d`/`phase` appear only on extended parts.
    pub fn to_json(&self) -> String {
        let mut terms = Vec::new();
        for ((m, n), c) in &self.terms {
            for (phase, radical, amp) in c.parts() {
                terms.push(TermDto {
                    mu: m.to_string(),
                    nu: n.to_string(),
                    re: format_rational(&amp.re),
                    im: format_rational(&amp.im),
                    sqrt_d: radical,
                    phase: (!phase.is_zero()).then(|| format_rational(phase)),
                });
            }
        }
        serde_json::to_string(&ElementDto { d: self.d, terms }).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AlgebraError> {
        let dto: ElementDto =
            serde_json::from_str(text).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        if dto.d == 0 {
            return Err(AlgebraError::Parse("alphabet size must be ≥ 1".into()));
        }
        let mut out = AlgebraElement::zero(dto.d);
        for t in dto.terms {
            let mu = Word::parse(&t.mu, dto.d)?;
            let nu = Word::parse(&t.nu, dto.d)?;
            let rational = |s: &str| {
                parse_rational(s)
                    .ok_or_else(|| AlgebraError::Parse(format!("bad rational {s:?}")))
            };
            let amp = Complex::new(rational(&t.re)?, rational(&t.im)?);
            let mut coef = Coef::from_complex(amp);
            if t.sqrt_d {
                coef = coef.mul(&Coef::sqrt_d(dto.d), dto.d);
            }
            if let Some(p) = t.phase {
                coef = coef.rotate(&rational(&p)?);
            }
            out.add_term(mu, nu, coef);
        }
        Ok(out)
    }
}
