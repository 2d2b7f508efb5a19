//! Crossed-product view of a system with a continuous (or piecewise) left
//! inverse `γ`: the endomorphism `α(a) = a∘γ`, the transfer operator
//! `L(a) = (1/d)·Σ_i a∘γ_i`, the Toeplitz relations of the scaled shift
//! `Ŝ = d^{−1/2}·S` in the word algebra, and the redundancy identity that
//! rebuilds a function from partition samples of its branch preimages.
//!
//! With rational data every identity here is exact: `γ(γ_i(y)) = y` is a
//! statement of piecewise-affine algebra, so residuals are zero as rational
//! numbers, not merely small.  The `d^{−1/2}` factor stays symbolic in the
//! coefficient ring, which is what keeps the Toeplitz checks exact as well.

use crate::algebra::AlgebraElement;
use crate::branch::BranchError;
use crate::cloud::PointCloud;
use crate::func::{FnError, SampledFunction};
use crate::ifs::Ifs;
use crate::partition::PartitionOfUnity;
use crate::piecewise::{ContinuityWarning, PiecewiseAffineMap};
use crate::pimsner::{CovarianceCheck, PimsnerError};
use crate::scalar::{Rational, Scalar};
use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExelError {
    #[error(transparent)]
    Fn(#[from] FnError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error(transparent)]
    Rep(#[from] PimsnerError),
    #[error(
        "γ∘γ_{letter} moved a sample by {residual} (> {tol}) at {point:?}: not a left inverse"
    )]
    NotLeftInverse {
        letter: usize,
        point: Vec<f64>,
        residual: f64,
        tol: f64,
    },
}

/// Result of checking `γ∘γ_i = id` over the sample cloud.
#[derive(Debug, Clone)]
pub struct LeftInverseReport {
    pub max_residual: f64,
    pub tol: f64,
    pub samples: usize,
    /// Pairs of γ-pieces that disagree at shared boundaries (a discontinuous
    /// left inverse is usable but flagged).
    pub warnings: Vec<ContinuityWarning>,
}

/// Verifies `γ(γ_i(y)) = y` for every branch at every cloud sample, in exact
/// rational arithmetic on the rationalized samples.
pub fn verify_left_inverse(
    sys: &Ifs<Rational>,
    gamma: &PiecewiseAffineMap<Rational>,
    cloud: &PointCloud<f64>,
    tol: f64,
) -> Result<LeftInverseReport, ExelError> {
    let d = sys.branch_count();
    let mut max_residual = 0.0_f64;
    for y in &cloud.points {
        let y_rat: Vec<Rational> = y
            .iter()
            .map(|&v| crate::exact::rational_from_f64(v).expect("finite coordinate"))
            .collect();
        for i in 1..=d {
            let image = sys.map(i).apply(&y_rat);
            let back = gamma.apply(&image).ok_or(ExelError::NotLeftInverse {
                letter: i,
                point: y.clone(),
                residual: f64::INFINITY,
                tol,
            })?;
            let residual = back
                .iter()
                .zip(&y_rat)
                .map(|(b, y)| {
                    let diff = b - y;
                    (&diff * &diff).to_f64_lossy()
                })
                .sum::<f64>()
                .sqrt();
            if residual > tol {
                return Err(ExelError::NotLeftInverse {
                    letter: i,
                    point: y.clone(),
                    residual,
                    tol,
                });
            }
            max_residual = max_residual.max(residual);
        }
    }
    // Samples sit up to `margin` off the seam, where even a continuous map's
    // pieces differ by slope·margin; only deviations beyond that are real
    // discontinuities.
    let margin = cloud.resolution.max(tol);
    let warn_tol = 2.0 * gamma.norm_bound() * margin + 1e-12;
    let warnings = gamma.continuity_warnings(&cloud.points, margin, warn_tol);
    Ok(LeftInverseReport {
        max_residual,
        tol,
        samples: cloud.len(),
        warnings,
    })
}

/// Endomorphism `α(a) = a∘γ`.
pub fn alpha(a: &SampledFunction, gamma: &PiecewiseAffineMap<Rational>) -> SampledFunction {
    a.compose_piecewise(gamma)
}

/// Transfer operator `L(a) = (1/d)·Σ_i a∘γ_i`; satisfies `L(1) = 1`.
pub fn transfer(a: &SampledFunction, sys: &Ifs<Rational>) -> SampledFunction {
    let d = sys.branch_count();
    let sum = sys
        .maps()
        .iter()
        .map(|m| a.compose_affine(m.affine()))
        .reduce(|acc, t| acc.add(&t))
        .expect("systems have at least one branch");
    let inv_d = Complex::new(<Rational as Scalar>::from_ratio(1, d as i64), Rational::zero());
    sum.scale(&inv_d)
}

/// Outcome of a pointwise identity scanned over the cloud.
#[derive(Debug, Clone)]
pub struct PointwiseReport {
    pub check: String,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
    pub samples: usize,
    pub worst_point: Option<Vec<f64>>,
    pub note: Option<String>,
}

/// Verifies `L(α(a)·b) = a·L(b)` pointwise over the cloud (exact arithmetic
/// on rationalized samples; the reported residual is the float image of an
/// exact difference).
pub fn verify_transfer_identity(
    a: &SampledFunction,
    b: &SampledFunction,
    sys: &Ifs<Rational>,
    gamma: &PiecewiseAffineMap<Rational>,
    cloud: &PointCloud<f64>,
    tol: f64,
) -> Result<PointwiseReport, ExelError> {
    let lhs = transfer(&alpha(a, gamma).mul(b), sys);
    let rhs_l = transfer(b, sys);
    let mut max_residual = 0.0_f64;
    let mut worst_point = None;
    for y in &cloud.points {
        let left = lhs.eval_exact_at_f64(y)?;
        let right = a.eval_exact_at_f64(y)? * rhs_l.eval_exact_at_f64(y)?;
        let diff = left - right;
        let residual = crate::exact::exact_complex_to_f64(&diff).norm();
        if residual > max_residual {
            max_residual = residual;
            worst_point = Some(y.clone());
        }
    }
    Ok(PointwiseReport {
        check: "transfer_identity".to_string(),
        max_residual,
        tol,
        passed: max_residual <= tol,
        samples: cloud.len(),
        worst_point,
        note: None,
    })
}

/// Both Toeplitz relations for the scaled shift `Ŝ = d^{−1/2}·S`, checked as
/// exact zero elements at matched depths:
///
/// * `Ŝ·ι(a, n) = ι(α(a), n+1)·Ŝ` (uses `γ(x_{iw}) = x_w` exactly), and
/// * `Ŝ*·ι(a, n+1)·Ŝ = ι(L(a), n)` (pure word algebra plus `x_{iw} = γ_i(x_w)`).
pub fn verify_toeplitz(
    a: &SampledFunction,
    sys: &Ifs<Rational>,
    gamma: &PiecewiseAffineMap<Rational>,
    depth: usize,
) -> Result<Vec<CovarianceCheck>, ExelError> {
    let d = sys.branch_count();
    let shift = AlgebraElement::normalized_shift(d);
    let ia = crate::pimsner::iota(a, sys, depth)?;

    let lhs_i = shift.multiply(&ia).map_err(PimsnerError::from)?;
    let rhs_i = crate::pimsner::iota(&alpha(a, gamma), sys, depth + 1)?
        .multiply(&shift)
        .map_err(PimsnerError::from)?;
    let check_i = CovarianceCheck::exact(
        "toeplitz_shift_intertwines_alpha",
        depth,
        &lhs_i.sub(&rhs_i).map_err(PimsnerError::from)?,
    )?;

    let ia_deep = crate::pimsner::iota(a, sys, depth + 1)?;
    let lhs_ii = shift
        .adjoint()
        .multiply(&ia_deep)
        .and_then(|p| p.multiply(&shift))
        .map_err(PimsnerError::from)?;
    let rhs_ii = crate::pimsner::iota(&transfer(a, sys), sys, depth)?;
    let check_ii = CovarianceCheck::exact(
        "toeplitz_compression_is_transfer",
        depth,
        &lhs_ii.sub(&rhs_ii).map_err(PimsnerError::from)?,
    )?;

    Ok(vec![check_i, check_ii])
}

/// Redundancy identity over an explicit partition: at each sample `x` in the
/// support of `a`,
///
/// `b(x) = Σ_k √φ_k(x) · Σ_i (√φ_k·b)(γ_i(γ(x)))`.
///
/// The inner sum runs over all branch preimage lifts of `x`; for a
/// lemma-certified partition only the branch that actually contains `x`
/// contributes, which is what collapses the sum to `b(x)`.  (The transfer
/// operator normalizes by `1/d`; the identity is stated in the un-normalized
/// preimage-sum form, i.e. with `d·(α∘L)`.)
pub fn redundancy_with_partition(
    a: &SampledFunction,
    b: &SampledFunction,
    sys: &Ifs<Rational>,
    gamma: &PiecewiseAffineMap<Rational>,
    cloud: &PointCloud<f64>,
    tol: f64,
    partition: &PartitionOfUnity,
) -> Result<PointwiseReport, ExelError> {
    let sys_f = sys.to_f64();
    let gamma_f = gamma.map_scalars(Scalar::to_f64_lossy);
    let mut max_residual = 0.0_f64;
    let mut worst_point = None;
    let mut samples = 0usize;
    for x in &cloud.points {
        if a.eval_exact_at_f64(x)?.is_zero() {
            continue;
        }
        samples += 1;
        let back = gamma_f
            .apply(x)
            .ok_or_else(|| FnError::PieceNotFound(x.clone()))?;
        let lifts: Vec<Vec<f64>> = (1..=sys_f.branch_count())
            .map(|i| sys_f.map(i).apply(&back))
            .collect();
        let b_x = b.eval_f64(x)?;
        let mut rebuilt = num_complex::Complex64::new(0.0, 0.0);
        for k in 0..partition.len() {
            let root_here = partition.data.sqrt_weight_f64(Some(k), x);
            if root_here == 0.0 {
                continue;
            }
            for z in &lifts {
                let root_there = partition.data.sqrt_weight_f64(Some(k), z);
                if root_there != 0.0 {
                    rebuilt += root_here * root_there * b.eval_f64(z)?;
                }
            }
        }
        let residual = (b_x - rebuilt).norm();
        if residual > max_residual {
            max_residual = residual;
            worst_point = Some(x.clone());
        }
    }
    Ok(PointwiseReport {
        check: "redundancy".to_string(),
        max_residual,
        tol,
        passed: max_residual <= tol,
        samples,
        worst_point,
        note: Some(format!(
            "preimage-sum form (d·(α∘L) applied to √φ_k·b); partition of {} balls",
            partition.len()
        )),
    })
}

/// Redundancy identity with the partition built over the support of `a`;
/// fails with `OnBranchSet` when that support meets the branch image set.
pub fn verify_redundancy(
    a: &SampledFunction,
    b: &SampledFunction,
    sys: &Ifs<Rational>,
    gamma: &PiecewiseAffineMap<Rational>,
    cloud: &PointCloud<f64>,
    tol: f64,
) -> Result<(PointwiseReport, PartitionOfUnity), ExelError> {
    let sys_f = sys.to_f64();
    let mut support: Vec<Vec<f64>> = Vec::new();
    for y in &cloud.points {
        if !a.eval_exact_at_f64(y)?.is_zero() {
            support.push(y.clone());
        }
    }
    let partition = PartitionOfUnity::build(&sys_f, cloud, &support, cloud.resolution)?;
    let report = redundancy_with_partition(a, b, sys, gamma, cloud, tol, &partition)?;
    Ok((report, partition))
}
