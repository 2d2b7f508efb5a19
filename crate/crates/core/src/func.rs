//! Symbolic function expressions with twin exact/`f64` evaluation.
//!
//! The representation layers never work with opaque closures: a function is a
//! small expression tree built from constants, coordinates, polynomials, hat
//! bumps, partition weights and compositions with (piecewise) affine maps.
//! The tree evaluates at exact rational points — so algebra coefficients stay
//! exact — and at `f64` points for the cheap numeric checks; piece and
//! support decisions on the `f64` path are taken in exact arithmetic on the
//! dyadic rational of the input, so both paths always pick the same branch.
//!
//! Alongside the tree each [`SampledFunction`] carries a Lipschitz bound and
//! a sup-norm bound, propagated through every combinator; the depth
//! refinement and well-definedness guards consume those instead of trying to
//! differentiate the tree.

use crate::exact::{rational_from_f64, rational_sqrt, ExactComplex};
use crate::linalg::AffineMap;
use crate::partition::PartitionData;
use crate::piecewise::PiecewiseAffineMap;
use crate::scalar::{Rational, Scalar};
use num_complex::Complex;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;
use thiserror::Error;

pub type Complex64 = Complex<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FnError {
    #[error("no piece of the piecewise map contains {0:?}")]
    PieceNotFound(Vec<f64>),
    #[error("square root of a negative value")]
    SqrtOfNegative,
    #[error("square root of a non-real value")]
    SqrtOfNonReal,
}

/// Expression tree; every node evaluates exactly at rational points.
#[derive(Debug, Clone)]
enum FnExpr {
    Const(ExactComplex),
    /// The `i`-th coordinate of the argument.
    Coord(usize),
    /// Univariate polynomial `Σ coeffs[j]·x_coord^j` (Horner evaluation).
    Poly { coord: usize, coeffs: Vec<Rational> },
    /// `max(0, 1 − ‖x − center‖/radius)`.
    Hat {
        center: Vec<Rational>,
        radius: Rational,
    },
    /// Normalized partition weight (`None` = the residual slot).
    PartitionWeight {
        data: Arc<PartitionData>,
        slot: Option<usize>,
    },
    Sqrt(Box<FnExpr>),
    Add(Box<FnExpr>, Box<FnExpr>),
    Mul(Box<FnExpr>, Box<FnExpr>),
    Scale(ExactComplex, Box<FnExpr>),
    Conj(Box<FnExpr>),
    /// `inner(map(x))` with the map kept in both arithmetics.
    AffineArg {
        exact: AffineMap<Rational>,
        float: AffineMap<f64>,
        inner: Box<FnExpr>,
    },
    /// `inner(pw(x))`; the piece is always located exactly.
    PiecewiseArg {
        exact: PiecewiseAffineMap<Rational>,
        inner: Box<FnExpr>,
    },
}

impl FnExpr {
    fn eval_exact(&self, x: &[Rational]) -> Result<ExactComplex, FnError> {
        match self {
            FnExpr::Const(z) => Ok(z.clone()),
            FnExpr::Coord(i) => Ok(real(x[*i].clone())),
            FnExpr::Poly { coord, coeffs } => {
                let t = &x[*coord];
                let mut acc = Rational::zero();
                for c in coeffs.iter().rev() {
                    acc = acc * t + c;
                }
                Ok(real(acc))
            }
            FnExpr::Hat { center, radius } => {
                let sq: Rational = center
                    .iter()
                    .zip(x)
                    .map(|(c, xi)| {
                        let diff = xi - c;
                        &diff * &diff
                    })
                    .sum();
                if sq >= radius * radius {
                    return Ok(real(Rational::zero()));
                }
                Ok(real(Rational::one() - rational_sqrt(&sq) / radius))
            }
            FnExpr::PartitionWeight { data, slot } => Ok(real(data.weight_exact(*slot, x))),
            FnExpr::Sqrt(inner) => {
                let v = inner.eval_exact(x)?;
                if !v.im.is_zero() {
                    return Err(FnError::SqrtOfNonReal);
                }
                if v.re.is_negative() {
                    return Err(FnError::SqrtOfNegative);
                }
                Ok(real(rational_sqrt(&v.re)))
            }
            FnExpr::Add(a, b) => Ok(a.eval_exact(x)? + b.eval_exact(x)?),
            FnExpr::Mul(a, b) => Ok(a.eval_exact(x)? * b.eval_exact(x)?),
            FnExpr::Scale(z, inner) => Ok(z * inner.eval_exact(x)?),
            FnExpr::Conj(inner) => Ok(inner.eval_exact(x)?.conj()),
            FnExpr::AffineArg { exact, inner, .. } => inner.eval_exact(&exact.apply(x)),
            FnExpr::PiecewiseArg { exact, inner } => {
                let mapped = exact.apply(x).ok_or_else(|| {
                    FnError::PieceNotFound(x.iter().map(Scalar::to_f64_lossy).collect())
                })?;
                inner.eval_exact(&mapped)
            }
        }
    }

    fn eval_f64(&self, x: &[f64]) -> Result<Complex64, FnError> {
        match self {
            FnExpr::Const(z) => Ok(Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())),
            FnExpr::Coord(i) => Ok(Complex::new(x[*i], 0.0)),
            FnExpr::Poly { coord, coeffs } => {
                let t = x[*coord];
                let mut acc = 0.0;
                for c in coeffs.iter().rev() {
                    acc = acc * t + c.to_f64_lossy();
                }
                Ok(Complex::new(acc, 0.0))
            }
            FnExpr::Hat { center, radius } => {
                let dist = center
                    .iter()
                    .zip(x)
                    .map(|(c, xi)| {
                        let d = xi - c.to_f64_lossy();
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt();
                Ok(Complex::new(
                    (1.0 - dist / radius.to_f64_lossy()).max(0.0),
                    0.0,
                ))
            }
            FnExpr::PartitionWeight { data, slot } => {
                Ok(Complex::new(data.weight_f64(*slot, x), 0.0))
            }
            FnExpr::Sqrt(inner) => {
                let v = inner.eval_f64(x)?;
                if v.im != 0.0 {
                    return Err(FnError::SqrtOfNonReal);
                }
                if v.re < 0.0 {
                    // Roundoff below an exact zero is forgiven; a genuinely
                    // negative radicand is not.
                    if v.re > -1e-9 {
                        return Ok(Complex::new(0.0, 0.0));
                    }
                    return Err(FnError::SqrtOfNegative);
                }
                Ok(Complex::new(v.re.sqrt(), 0.0))
            }
            FnExpr::Add(a, b) => Ok(a.eval_f64(x)? + b.eval_f64(x)?),
            FnExpr::Mul(a, b) => Ok(a.eval_f64(x)? * b.eval_f64(x)?),
            FnExpr::Scale(z, inner) => {
                let zf = Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy());
                Ok(zf * inner.eval_f64(x)?)
            }
            FnExpr::Conj(inner) => Ok(inner.eval_f64(x)?.conj()),
            FnExpr::AffineArg { float, inner, .. } => inner.eval_f64(&float.apply(x)),
            FnExpr::PiecewiseArg { exact, inner } => {
                // Decide the piece exactly on the dyadic rational of x, then
                // follow that piece in f64 arithmetic.
                let x_rat: Vec<Rational> = x
                    .iter()
                    .map(|&v| rational_from_f64(v).ok_or(FnError::PieceNotFound(x.to_vec())))
                    .collect::<Result<_, _>>()?;
                let k = exact
                    .locate(&x_rat)
                    .ok_or(FnError::PieceNotFound(x.to_vec()))?;
                let float_map = exact.pieces()[k].map.map_scalars(Scalar::to_f64_lossy);
                inner.eval_f64(&float_map.apply(x))
            }
        }
    }
}

fn real(q: Rational) -> ExactComplex {
    Complex::new(q, Rational::zero())
}

/// An expression bundled with Lipschitz and sup-norm bounds.
///
/// The bounds are tracked pessimistically through every combinator: they stay
/// valid on any region where the constructor bounds were valid, which is all
/// the guards need.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    expr: FnExpr,
    pub lip: f64,
    pub sup: f64,
}

impl SampledFunction {
    pub fn constant(z: ExactComplex) -> Self {
        let sup = Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()).norm();
        SampledFunction {
            expr: FnExpr::Const(z),
            lip: 0.0,
            sup,
        }
    }

    pub fn constant_real(q: Rational) -> Self {
        Self::constant(real(q))
    }

    pub fn one() -> Self {
        Self::constant_real(Rational::one())
    }

    /// Coordinate `i`, declared bounded by `bound` on the region of interest.
    pub fn coordinate(i: usize, bound: f64) -> Self {
        SampledFunction {
            expr: FnExpr::Coord(i),
            lip: 1.0,
            sup: bound,
        }
    }

    /// Polynomial in coordinate `coord` with the stated coefficients, with
    /// sup/Lipschitz bounds valid while `|x_coord| ≤ bound`.
    pub fn poly(coord: usize, coeffs: Vec<Rational>, bound: f64) -> Self {
        let m = bound.abs().max(0.0);
        let mut sup = 0.0;
        let mut lip = 0.0;
        for (j, c) in coeffs.iter().enumerate() {
            let a = c.to_f64_lossy().abs();
            sup += a * m.powi(j as i32);
            if j > 0 {
                lip += a * j as f64 * m.powi(j as i32 - 1);
            }
        }
        SampledFunction {
            expr: FnExpr::Poly { coord, coeffs },
            lip,
            sup,
        }
    }

    /// Tent bump `max(0, 1 − ‖x − center‖/radius)`.
    pub fn hat(center: Vec<Rational>, radius: Rational) -> Self {
        let lip = 1.0 / radius.to_f64_lossy();
        SampledFunction {
            expr: FnExpr::Hat { center, radius },
            lip,
            sup: 1.0,
        }
    }

    /// Normalized weight `φ_slot` of a partition (`None` = residual slot).
    pub fn partition_weight(data: Arc<PartitionData>, slot: Option<usize>) -> Self {
        let lip = partition_weight_lip(&data);
        SampledFunction {
            expr: FnExpr::PartitionWeight { data, slot },
            lip,
            sup: 1.0,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        SampledFunction {
            expr: FnExpr::Add(Box::new(self.expr.clone()), Box::new(other.expr.clone())),
            lip: self.lip + other.lip,
            sup: self.sup + other.sup,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        SampledFunction {
            expr: FnExpr::Mul(Box::new(self.expr.clone()), Box::new(other.expr.clone())),
            lip: self.lip * other.sup + self.sup * other.lip,
            sup: self.sup * other.sup,
        }
    }

    pub fn scale(&self, z: &ExactComplex) -> Self {
        let zf = Complex::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()).norm();
        SampledFunction {
            expr: FnExpr::Scale(z.clone(), Box::new(self.expr.clone())),
            lip: zf * self.lip,
            sup: zf * self.sup,
        }
    }

    pub fn conj(&self) -> Self {
        SampledFunction {
            expr: FnExpr::Conj(Box::new(self.expr.clone())),
            lip: self.lip,
            sup: self.sup,
        }
    }

    /// Pointwise square root.  The square root is only Hölder where the
    /// function vanishes, so the caller must supply the Lipschitz bound it
    /// can justify for its region.
    pub fn sqrt_with_lip(&self, lip: f64) -> Self {
        SampledFunction {
            expr: FnExpr::Sqrt(Box::new(self.expr.clone())),
            lip,
            sup: self.sup.max(0.0).sqrt(),
        }
    }

    /// `x ↦ f(map(x))`.
    pub fn compose_affine(&self, map: &AffineMap<Rational>) -> Self {
        let float = map.map_scalars(Scalar::to_f64_lossy);
        let lip = self.lip * float.matrix.operator_norm();
        SampledFunction {
            expr: FnExpr::AffineArg {
                exact: map.clone(),
                float,
                inner: Box::new(self.expr.clone()),
            },
            lip,
            sup: self.sup,
        }
    }

    /// `x ↦ f(pw(x))`; evaluation fails with `PieceNotFound` off the pieces.
    pub fn compose_piecewise(&self, pw: &PiecewiseAffineMap<Rational>) -> Self {
        let lip = self.lip * pw.norm_bound();
        SampledFunction {
            expr: FnExpr::PiecewiseArg {
                exact: pw.clone(),
                inner: Box::new(self.expr.clone()),
            },
            lip,
            sup: self.sup,
        }
    }

    pub fn eval_exact(&self, x: &[Rational]) -> Result<ExactComplex, FnError> {
        self.expr.eval_exact(x)
    }

    /// Exact evaluation at a dyadic point given in `f64` coordinates.
    pub fn eval_exact_at_f64(&self, x: &[f64]) -> Result<ExactComplex, FnError> {
        let x_rat: Vec<Rational> = x
            .iter()
            .map(|&v| rational_from_f64(v).expect("finite coordinate"))
            .collect();
        self.expr.eval_exact(&x_rat)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Complex64, FnError> {
        self.expr.eval_f64(x)
    }
}

/// Coarse Lipschitz bound for a normalized partition weight: quotient rule
/// with denominator ≥ 1/2, hat slopes 1/R_k and bump slope 2·max_k 1/R_k.
fn partition_weight_lip(data: &PartitionData) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let inv_r: Vec<f64> = data.radii_f64().iter().map(|r| 1.0 / r).collect();
    let l_max = inv_r.iter().fold(0.0_f64, |a, &b| a.max(b));
    let l_denom: f64 = inv_r.iter().sum::<f64>() + 2.0 * l_max;
    4.0 * (l_max * (data.len() as f64 + 1.0) + l_denom)
}

/// A `d`-tuple of functions on the base space, one per branch: the component
/// `ξ_i(y)` is read as the value of `ξ` at the graph point `(γ_i(y), y)`.
/// Well-definedness (components agreeing wherever two branches coincide) is
/// automatic for tuples built from `∘γ_i` and is checked numerically
/// otherwise via [`CographFunction::well_definedness_deviation`].
#[derive(Debug, Clone)]
pub struct CographFunction {
    components: Vec<SampledFunction>,
}

impl CographFunction {
    pub fn from_components(components: Vec<SampledFunction>) -> Self {
        assert!(!components.is_empty(), "need one component per branch");
        CographFunction { components }
    }

    /// The constant section: every component is 1.
    pub fn constant_one(d: usize) -> Self {
        Self::from_components((0..d).map(|_| SampledFunction::one()).collect())
    }

    /// Indicator of the `i`-th branch graph (`i` is 1-indexed): component `i`
    /// is 1, the others 0.
    pub fn indicator(d: usize, i: usize) -> Self {
        assert!((1..=d).contains(&i), "letter out of range");
        Self::from_components(
            (1..=d)
                .map(|j| {
                    if j == i {
                        SampledFunction::one()
                    } else {
                        SampledFunction::constant_real(Rational::zero())
                    }
                })
                .collect(),
        )
    }

    /// Section `(a ⊗ b)_i(y) = a(γ_i(y))·b(y)`: the left action of `a`
    /// composed into each branch times the right action of `b`.
    pub fn tensor(
        a: &SampledFunction,
        b: &SampledFunction,
        maps: &[AffineMap<Rational>],
    ) -> Self {
        Self::from_components(
            maps.iter()
                .map(|gamma| a.compose_affine(gamma).mul(b))
                .collect(),
        )
    }

    pub fn branch_count(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &SampledFunction {
        assert!((1..=self.components.len()).contains(&i), "letter out of range");
        &self.components[i - 1]
    }

    pub fn components(&self) -> &[SampledFunction] {
        &self.components
    }

    pub fn max_lip(&self) -> f64 {
        self.components.iter().fold(0.0, |a, c| a.max(c.lip))
    }

    pub fn max_sup(&self) -> f64 {
        self.components.iter().fold(0.0, |a, c| a.max(c.sup))
    }

    /// Aggregate Lipschitz constant `sqrt(Σ_i lip_i²)`.  When the components
    /// change by at most `lip_i·δ` each, the column vector of all components
    /// moves by at most `lip_l2·δ` in the Euclidean norm.
    pub fn lip_l2(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.lip * c.lip)
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|ξ_i(y) − ξ_j(y)|` over sample points `y` where branches `i`
    /// and `j` land within `2·(resolution + tol)` of each other — the
    /// numerical well-definedness defect.  Zero when no branches coincide.
    pub fn well_definedness_deviation(
        &self,
        sys: &crate::ifs::Ifs<f64>,
        cloud: &crate::cloud::PointCloud<f64>,
        tol: f64,
    ) -> f64 {
        let d = self.components.len().min(sys.branch_count());
        let near = 2.0 * (cloud.resolution + tol);
        let mut worst = 0.0_f64;
        for y in &cloud.points {
            for i in 1..=d {
                let gi = sys.map(i).apply(y);
                for j in (i + 1)..=d {
                    let gj = sys.map(j).apply(y);
                    if crate::cloud::dist_f64(&gi, &gj) <= near {
                        let vi = self.components[i - 1].eval_f64(y);
                        let vj = self.components[j - 1].eval_f64(y);
                        if let (Ok(vi), Ok(vj)) = (vi, vj) {
                            worst = worst.max((vi - vj).norm());
                        }
                    }
                }
            }
        }
        worst
    }
}
