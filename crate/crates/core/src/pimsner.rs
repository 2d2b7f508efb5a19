//! Covariant representation of the branch-graph correspondence in the word
//! algebra, truncated at a word depth.
//!
//! The diagonal embedding sends a function to `ι(a, n) = Σ_{|w|=n} a(x_w)
//! S_wS_w*` over the coded points `x_w = γ_w(x*)`, and a section of the graph
//! to `ψ(ξ, n) = Σ_{i, |w|=n} ξ_i(x_w) S_{iw}S_w*`.  Because the coded points
//! satisfy `x_{iw} = γ_i(x_w)` exactly, the module identities
//!
//! * `ψ(φ(a)ξb, n) = ι(a, n+1)·ψ(ξ, n)·ι(b, n)` and
//! * `ψ(ξ, n)*·ψ(η, n) = ι(⟨ξ,η⟩, n)`
//!
//! hold with exact rational coefficients at every depth; the only check that
//! needs a float tolerance is the compact-operator condition, whose partition
//! square roots are rational approximants with error below `2⁻⁷⁹` per term.
//! Mixed-depth products follow the convention visible above: the diagonal on
//! the left always sits one level deeper than the section it multiplies.

use crate::algebra::{AlgebraElement, AlgebraError, RelationCheck};
use crate::branch::{check_cograph_separation, BranchError, BranchReport, SeparationCheck};
use crate::cloud::PointCloud;
use crate::codemap::{canonical_base_point, coded_points};
use crate::coef::Coef;
use crate::func::{CographFunction, FnError, SampledFunction};
use crate::ifs::Ifs;
use crate::linalg::AffineMap;
use crate::partition::PartitionOfUnity;
use crate::pathrep::truncation_norm;
use crate::scalar::Rational;
use crate::word::{Word, WordError};
use num_traits::Zero;
use thiserror::Error;

/// Default ceiling on the number of words `d^n` a representation may expand.
pub const DEFAULT_WORD_CAP: usize = 59049;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PimsnerError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Fn(#[from] FnError),
    #[error(transparent)]
    Branch(#[from] BranchError),
    #[error("system is not cograph-separated: min gap {min_gap} ≤ threshold {threshold}")]
    NotCographSeparated { min_gap: f64, threshold: f64 },
    #[error("section is not well defined at branch coincidences: deviation {deviation} > allowed {allowed}")]
    NotWellDefined { deviation: f64, allowed: f64 },
}

/// Exact coded points `x_w` for all `|w| = depth`, capped at
/// [`DEFAULT_WORD_CAP`] words.
pub fn coded_basis(
    sys: &Ifs<Rational>,
    depth: usize,
) -> Result<Vec<(Word, Vec<Rational>)>, PimsnerError> {
    let d = sys.branch_count();
    let mut needed: usize = 1;
    for _ in 0..depth {
        needed = needed
            .checked_mul(d)
            .filter(|&n| n <= DEFAULT_WORD_CAP)
            .ok_or(AlgebraError::BudgetExceeded {
                needed: usize::MAX,
                cap: DEFAULT_WORD_CAP,
            })?;
    }
    Ok(coded_points(sys, depth))
}

/// Diagonal embedding `ι(a, n) = Σ_{|w|=n} a(x_w)·S_wS_w*`.
pub fn iota(
    a: &SampledFunction,
    sys: &Ifs<Rational>,
    depth: usize,
) -> Result<AlgebraElement, PimsnerError> {
    let mut out = AlgebraElement::zero(sys.branch_count());
    for (w, x) in coded_basis(sys, depth)? {
        let value = a.eval_exact(&x)?;
        out.add_term(w.clone(), w, Coef::from_complex(value));
    }
    Ok(out)
}

/// Section embedding `ψ(ξ, n) = Σ_{i, |w|=n} ξ_i(x_w)·S_{iw}S_w*`.
pub fn psi(
    xi: &CographFunction,
    sys: &Ifs<Rational>,
    depth: usize,
) -> Result<AlgebraElement, PimsnerError> {
    let d = sys.branch_count();
    if xi.branch_count() != d {
        return Err(AlgebraError::AlphabetMismatch {
            left: d,
            right: xi.branch_count(),
        }
        .into());
    }
    let mut out = AlgebraElement::zero(d);
    for (w, x) in coded_basis(sys, depth)? {
        for i in 1..=d {
            let value = xi.component(i).eval_exact(&x)?;
            out.add_term(w.prepend(i, d)?, w.clone(), Coef::from_complex(value));
        }
    }
    Ok(out)
}

/// Branch maps of the system as exact affine maps, in letter order.
pub fn branch_maps(sys: &Ifs<Rational>) -> Vec<AffineMap<Rational>> {
    sys.maps().iter().map(|m| m.affine().clone()).collect()
}

/// Two-sided module action `(φ(a)ξb)_i(y) = a(γ_i(y))·ξ_i(y)·b(y)`.
pub fn module_action(
    a: &SampledFunction,
    xi: &CographFunction,
    b: &SampledFunction,
    sys: &Ifs<Rational>,
) -> CographFunction {
    let maps = branch_maps(sys);
    CographFunction::from_components(
        maps.iter()
            .zip(xi.components())
            .map(|(gamma, comp)| a.compose_affine(gamma).mul(comp).mul(b))
            .collect(),
    )
}

/// Module inner product `⟨ξ,η⟩(y) = Σ_i conj(ξ_i(y))·η_i(y)`.
pub fn module_inner(xi: &CographFunction, eta: &CographFunction) -> SampledFunction {
    xi.components()
        .iter()
        .zip(eta.components())
        .map(|(x, e)| x.conj().mul(e))
        .reduce(|acc, t| acc.add(&t))
        .expect("cograph functions have at least one component")
}

/// Sampled module norm: `max_y sqrt(Σ_i |ξ_i(y)|²)` over the cloud.
pub fn module_norm(xi: &CographFunction, cloud: &PointCloud<f64>) -> Result<f64, FnError> {
    let mut worst = 0.0_f64;
    for y in &cloud.points {
        let mut sq = 0.0;
        for c in xi.components() {
            sq += c.eval_f64(y)?.norm_sqr();
        }
        worst = worst.max(sq.sqrt());
    }
    Ok(worst)
}

/// Verifies that a section's components agree at branch coincidences.
///
/// A section carried by a function `F` on the branch images has component
/// Lipschitz constants near `Lip(F)·‖A_i‖`, so `max_lip` divided by the
/// smallest branch norm over-estimates `Lip(F)`.  Legitimate sections then
/// deviate by at most that estimate times the coincidence window
/// `2(resolution + tol)`, while genuine mismatches (indicator sections on
/// systems with crossing branches) show up at unit scale.
pub fn check_well_defined(
    xi: &CographFunction,
    sys: &Ifs<f64>,
    cloud: &PointCloud<f64>,
    tol: f64,
) -> Result<f64, PimsnerError> {
    let deviation = xi.well_definedness_deviation(sys, cloud, tol);
    let min_norm = sys
        .maps()
        .iter()
        .map(|m| m.contraction_ratio())
        .fold(f64::INFINITY, f64::min);
    let lip_estimate = if min_norm > 0.0 {
        xi.max_lip() / min_norm
    } else {
        xi.max_lip()
    };
    let allowed = lip_estimate * 2.0 * (cloud.resolution + tol) + tol;
    if deviation <= allowed {
        Ok(deviation)
    } else {
        Err(PimsnerError::NotWellDefined { deviation, allowed })
    }
}

/// Outcome of one covariance-style identity check.
#[derive(Debug, Clone)]
pub struct CovarianceCheck {
    pub check: String,
    pub depth: usize,
    /// The residual element is syntactically zero after canonical refinement.
    pub exactly_zero: bool,
    pub residual_terms: usize,
    /// Truncation seminorm of the residual; `None` when exactly zero.
    pub residual_norm: Option<f64>,
    pub tol: Option<f64>,
    pub passed: bool,
    pub note: Option<String>,
}

impl CovarianceCheck {
    pub(crate) fn exact(
        check: &str,
        depth: usize,
        residual: &AlgebraElement,
    ) -> Result<Self, PimsnerError> {
        let canonical = residual.canonical();
        let exactly_zero = canonical.is_syntactically_zero();
        let residual_norm = if exactly_zero {
            None
        } else {
            Some(truncation_norm(&canonical, canonical.max_word_len())?)
        };
        Ok(CovarianceCheck {
            check: check.to_string(),
            depth,
            exactly_zero,
            residual_terms: canonical.term_count(),
            residual_norm,
            tol: None,
            passed: exactly_zero,
            note: None,
        })
    }
}

/// Condition (i): `ψ(φ(a)ξb, n) − ι(a, n+1)·ψ(ξ, n)·ι(b, n)`, expected to be
/// the exact zero element.
pub fn verify_condition_i(
    a: &SampledFunction,
    xi: &CographFunction,
    b: &SampledFunction,
    sys: &Ifs<Rational>,
    depth: usize,
) -> Result<CovarianceCheck, PimsnerError> {
    let lhs = psi(&module_action(a, xi, b, sys), sys, depth)?;
    let rhs = iota(a, sys, depth + 1)?
        .multiply(&psi(xi, sys, depth)?)?
        .multiply(&iota(b, sys, depth)?)?;
    CovarianceCheck::exact("covariance_i", depth, &lhs.sub(&rhs)?)
}

/// Condition (ii): `ψ(ξ, n)*·ψ(η, n) − ι(⟨ξ,η⟩, n)`, expected exact zero.
pub fn verify_condition_ii(
    xi: &CographFunction,
    eta: &CographFunction,
    sys: &Ifs<Rational>,
    depth: usize,
) -> Result<CovarianceCheck, PimsnerError> {
    let lhs = psi(xi, sys, depth)?.adjoint().multiply(&psi(eta, sys, depth)?)?;
    let rhs = iota(&module_inner(xi, eta), sys, depth)?;
    CovarianceCheck::exact("covariance_ii", depth, &lhs.sub(&rhs)?)
}

/// Condition (iii) against an explicit partition (no certification): forms
/// `ξ_k = (a√φ_k) ∘ γ_i`, `η_k = √φ_k ∘ γ_i` and measures
/// `Σ_k ψ(ξ_k, n)·ψ(η_k, n)* − ι(a, n+1)` in truncation norm.
pub fn condition_iii_with_partition(
    a: &SampledFunction,
    sys: &Ifs<Rational>,
    depth: usize,
    tol: f64,
    partition: &PartitionOfUnity,
) -> Result<CovarianceCheck, PimsnerError> {
    let d = sys.branch_count();
    let maps = branch_maps(sys);
    let one = SampledFunction::one();
    let mut sum = AlgebraElement::zero(d);
    for k in 0..partition.len() {
        let weight = SampledFunction::partition_weight(partition.data.clone(), Some(k));
        let root = weight.sqrt_with_lip(weight.lip);
        let xi_k = CographFunction::tensor(&a.mul(&root), &one, &maps);
        let eta_k = CographFunction::tensor(&root, &one, &maps);
        let term = psi(&xi_k, sys, depth)?.multiply(&psi(&eta_k, sys, depth)?.adjoint())?;
        sum = sum.add(&term)?;
    }
    let residual = sum.sub(&iota(a, sys, depth + 1)?)?.canonical();
    let exactly_zero = residual.is_syntactically_zero();
    let norm = if exactly_zero {
        0.0
    } else {
        truncation_norm(&residual, residual.max_word_len())?
    };
    Ok(CovarianceCheck {
        check: "covariance_iii".to_string(),
        depth,
        exactly_zero,
        residual_terms: residual.term_count(),
        residual_norm: Some(norm),
        tol: Some(tol),
        passed: norm <= tol,
        note: Some(format!("partition of {} balls", partition.len())),
    })
}

/// Condition (iii) with a lemma-certified partition built over the support of
/// `a` (the cloud points where `a` is exactly nonzero).  Errors with
/// `OnBranchSet` if that support touches the branch image set.
pub fn verify_condition_iii(
    a: &SampledFunction,
    sys: &Ifs<Rational>,
    cloud: &PointCloud<f64>,
    depth: usize,
    tol: f64,
) -> Result<(CovarianceCheck, PartitionOfUnity), PimsnerError> {
    let sys_f = sys.to_f64();
    let mut support: Vec<Vec<f64>> = Vec::new();
    for y in &cloud.points {
        if !a.eval_exact_at_f64(y)?.is_zero() {
            support.push(y.clone());
        }
    }
    // `tol` bounds the residual norm; geometric decisions run at the scale
    // the cloud can actually resolve.
    let branch_tol = cloud.resolution;
    let partition = PartitionOfUnity::build(&sys_f, cloud, &support, branch_tol)?;
    // Sections built through ∘γ_i are well defined by construction; the
    // guard still runs so hand-tuned partitions cannot sneak past it.
    let maps = branch_maps(sys);
    for k in 0..partition.len() {
        let weight = SampledFunction::partition_weight(partition.data.clone(), Some(k));
        let root = weight.sqrt_with_lip(weight.lip);
        let xi_k = CographFunction::tensor(&a.mul(&root), &SampledFunction::one(), &maps);
        check_well_defined(&xi_k, &sys_f, cloud, branch_tol)?;
    }
    let check = condition_iii_with_partition(a, sys, depth, tol, &partition)?;
    Ok((check, partition))
}

/// Gauge equivariance: rotating by `turns` fixes `ι(a, n)` and multiplies
/// `ψ(ξ, n)` by the exact root of unity `e(turns)`.
pub fn verify_gauge(
    a: &SampledFunction,
    xi: &CographFunction,
    sys: &Ifs<Rational>,
    depth: usize,
    turns: &Rational,
) -> Result<CovarianceCheck, PimsnerError> {
    let ia = iota(a, sys, depth)?;
    let diagonal_residual = ia.gauge(turns).sub(&ia)?;
    let px = psi(xi, sys, depth)?;
    let section_residual = px.gauge(turns).sub(&px.scale(&Coef::root_of_unity(turns)))?;
    // The two residuals live in degrees 0 and 1, so summing them cannot
    // cancel anything: the sum is zero exactly when both are.
    let residual = diagonal_residual.add(&section_residual)?;
    CovarianceCheck::exact("gauge", depth, &residual)
}

/// Generator identity: `ψ(a ⊗ b, n) = ι(a, n+1)·ψ(1, n)·ι(b, n)` exactly.
pub fn verify_generators(
    a: &SampledFunction,
    b: &SampledFunction,
    sys: &Ifs<Rational>,
    depth: usize,
) -> Result<CovarianceCheck, PimsnerError> {
    let d = sys.branch_count();
    let maps = branch_maps(sys);
    let lhs = psi(&CographFunction::tensor(a, b, &maps), sys, depth)?;
    let rhs = iota(a, sys, depth + 1)?
        .multiply(&psi(&CographFunction::constant_one(d), sys, depth)?)?
        .multiply(&iota(b, sys, depth)?)?;
    CovarianceCheck::exact("generators", depth, &lhs.sub(&rhs)?)
}

/// Report for the cograph-separation generator relations.
#[derive(Debug, Clone)]
pub struct CographReport {
    pub d: usize,
    pub separation: SeparationCheck,
    /// `ψ(χ_i, 0)` equals the `i`-th shift generator, exactly.
    pub generators_are_shifts: bool,
    /// `ψ(χ_i, n)` stays equal to the generator mod refinement, `n ≤ depth`.
    pub stable_under_depth: bool,
    pub relations: Vec<RelationCheck>,
    pub all_exact: bool,
    pub normalization_note: String,
}

/// Checks `T_i := ψ(χ_i, 0)` against the shift generators and the isometry
/// relations `T_i*T_j = δ_{ij}·1`, `Σ_i T_iT_i* = 1`, all exactly.
/// Requires the system to be cograph-separated (otherwise the indicator
/// sections are not functions on the graph).
pub fn verify_cograph_generators(
    sys: &Ifs<Rational>,
    cloud: &PointCloud<f64>,
    depth: usize,
    tol: f64,
) -> Result<CographReport, PimsnerError> {
    let separation = check_cograph_separation(&sys.to_f64(), cloud, tol);
    if !separation.separated {
        return Err(PimsnerError::NotCographSeparated {
            min_gap: separation.min_gap,
            threshold: separation.threshold,
        });
    }
    let d = sys.branch_count();
    let mut t: Vec<AlgebraElement> = Vec::with_capacity(d);
    let mut generators_are_shifts = true;
    let mut stable_under_depth = true;
    for i in 1..=d {
        let chi = CographFunction::indicator(d, i);
        check_well_defined(&chi, &sys.to_f64(), cloud, tol)?;
        let t_i = psi(&chi, sys, 0)?;
        let s_i = AlgebraElement::generator(d, i)?;
        generators_are_shifts &= t_i.sub(&s_i)?.is_exactly_zero();
        for n in 1..=depth {
            stable_under_depth &= psi(&chi, sys, n)?.equals_mod_refinement(&s_i)?;
        }
        t.push(t_i);
    }

    let mut relations = Vec::new();
    let mut all_exact = true;
    for i in 1..=d {
        for j in 1..=d {
            let mut residual = t[i - 1].adjoint().multiply(&t[j - 1])?;
            if i == j {
                residual = residual.sub(&AlgebraElement::one(d))?;
            }
            let exact = residual.is_exactly_zero();
            all_exact &= exact;
            relations.push(RelationCheck {
                relation: format!("T{i}*T{j} = {}", if i == j { "1" } else { "0" }),
                exactly_zero: exact,
                residual_terms: residual.canonical().term_count(),
            });
        }
    }
    let mut range_sum = AlgebraElement::zero(d);
    for t_i in &t {
        range_sum = range_sum.add(&t_i.multiply(&t_i.adjoint())?)?;
    }
    let residual = range_sum.sub(&AlgebraElement::one(d))?;
    let exact = residual.is_exactly_zero();
    all_exact &= exact;
    relations.push(RelationCheck {
        relation: "sum T_i T_i* = 1".to_string(),
        exactly_zero: exact,
        residual_terms: residual.canonical().term_count(),
    });

    Ok(CographReport {
        d,
        separation,
        generators_are_shifts,
        stable_under_depth,
        relations,
        all_exact: all_exact && generators_are_shifts && stable_under_depth,
        normalization_note: crate::report::NORMALIZATION_NOTE.to_string(),
    })
}

/// Membership in the vanishing ideal: `|a| ≤ tol` on every branched-point
/// cluster center.  Vacuously true when the branch set is empty.
pub fn ideal_member(a: &SampledFunction, report: &BranchReport, tol: f64) -> bool {
    report.branched_points.points.iter().all(|p| {
        a.eval_f64(p)
            .map(|v| v.norm() <= tol)
            .unwrap_or(false)
    })
}

/// Truncation norms of `ψ(ξ, n+1) − refine(ψ(ξ, n))` for `n` in the range;
/// each is bounded by `lip_l2(ξ)·cⁿ·diam`, so successive gaps shrink by the
/// contraction ratio.
pub fn psi_refinement_gaps(
    xi: &CographFunction,
    sys: &Ifs<Rational>,
    depths: std::ops::Range<usize>,
) -> Result<Vec<f64>, PimsnerError> {
    let mut gaps = Vec::new();
    for n in depths {
        let coarse = psi(xi, sys, n)?.refine(n + 2);
        let fine = psi(xi, sys, n + 1)?;
        let diff = fine.sub(&coarse)?;
        gaps.push(truncation_norm(&diff, n + 2)?);
    }
    Ok(gaps)
}

/// Faithfulness surrogate for the diagonal: the sup of `|a|` over the cloud
/// against `max_{|w|=n} |a(x_w)| + L·(cⁿ·diam + resolution)`.  Returns
/// `(sup_cloud, bound)`; `sup_cloud ≤ bound` for every Lipschitz-true `a`,
/// so a zero diagonal pins the sup below `L·(cⁿ·diam + resolution)`.
pub fn iota_injectivity_bound(
    a: &SampledFunction,
    sys: &Ifs<Rational>,
    cloud: &PointCloud<f64>,
    depth: usize,
) -> Result<(f64, f64), PimsnerError> {
    let mut sup_cloud = 0.0_f64;
    for y in &cloud.points {
        sup_cloud = sup_cloud.max(a.eval_f64(y)?.norm());
    }
    let mut max_coded = 0.0_f64;
    for (_, x) in coded_basis(sys, depth)? {
        let xf: Vec<f64> = x.iter().map(crate::scalar::Scalar::to_f64_lossy).collect();
        max_coded = max_coded.max(a.eval_f64(&xf)?.norm());
    }
    let c = sys.contraction_ratio();
    let bound = max_coded + a.lip * (c.powi(depth as i32) * cloud.diameter_estimate() + cloud.resolution);
    Ok((sup_cloud, bound))
}

/// Exact base-point witness for reports: the canonical tail is the fixed
/// point of the first branch.
pub fn canonical_tail(sys: &Ifs<Rational>) -> Vec<Rational> {
    canonical_base_point(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin_system;
    use crate::cloud::attractor;
    use crate::exact::{rational_from_f64, rational_sqrt};
    use crate::scalar::Scalar;
    use num_traits::One;

    fn rat(n: i64, d: i64) -> Rational {
        <Rational as Scalar>::from_ratio(n, d)
    }

    fn coordinate_function() -> SampledFunction {
        SampledFunction::poly(0, vec![rat(0, 1), rat(1, 1)], 1.0)
    }

    #[test]
    fn diagonal_of_the_constant_is_the_refined_identity() {
        let sys = builtin_system("CANTOR3").unwrap().system;
        let one = iota(&SampledFunction::one(), &sys, 3).unwrap();
        let refined_identity = AlgebraElement::one(2).refine(3);
        assert!(one.sub(&refined_identity).unwrap().is_exactly_zero());
    }

    #[test]
    fn diagonal_of_the_coordinate_lists_coded_points() {
        // x_(1) = 0 and x_(2) = 2/3, so ι(x, 1) = 0·S₁S₁* + (2/3)·S₂S₂*.
        let sys = builtin_system("CANTOR3").unwrap().system;
        let a = coordinate_function();
        let el = iota(&a, &sys, 1).unwrap();
        assert_eq!(el.term_count(), 1);
        let (mu, nu, coef) = el.terms().next().unwrap();
        assert_eq!(mu, nu);
        assert_eq!(mu.letter(0), 2);
        assert_eq!(coef.as_plain().unwrap().re, rat(2, 3));
    }

    #[test]
    fn diagonal_is_a_star_homomorphism_at_fixed_depth() {
        let sys = builtin_system("TENTINV").unwrap().system;
        let a = coordinate_function();
        let b = SampledFunction::poly(0, vec![rat(1, 2), rat(-1, 3), rat(1, 5)], 1.0);
        let product = iota(&a.mul(&b), &sys, 3).unwrap();
        let factored = iota(&a, &sys, 3)
            .unwrap()
            .multiply(&iota(&b, &sys, 3).unwrap())
            .unwrap();
        assert!(product.sub(&factored).unwrap().is_exactly_zero());
        let conj = iota(&a.conj(), &sys, 3).unwrap();
        assert!(conj.sub(&iota(&a, &sys, 3).unwrap().adjoint()).unwrap().is_exactly_zero());
    }

    #[test]
    fn section_of_the_constant_is_the_shift() {
        for name in ["CANTOR3", "HALVES", "TENTINV"] {
            let sys = builtin_system(name).unwrap().system;
            let d = sys.branch_count();
            let s = psi(&CographFunction::constant_one(d), &sys, 0).unwrap();
            assert!(s.sub(&AlgebraElement::shift_element(d)).unwrap().is_exactly_zero());
        }
    }

    #[test]
    fn module_identities_on_sample_functions() {
        let builtin = builtin_system("HALVES").unwrap();
        let sys = builtin.system;
        let a = coordinate_function();
        let xi = CographFunction::constant_one(2);
        // φ(a)·1·1 has components a∘γᵢ: (y/2, y/2 + 1/2).
        let acted = module_action(&a, &xi, &SampledFunction::one(), &sys);
        let y = vec![rat(1, 3)];
        assert_eq!(acted.component(1).eval_exact(&y).unwrap().re, rat(1, 6));
        assert_eq!(acted.component(2).eval_exact(&y).unwrap().re, rat(2, 3));
        // ⟨1,1⟩ = d; ⟨χ₁,χ₁⟩ = 1 (single surviving term).
        let inner = module_inner(&xi, &xi);
        assert_eq!(inner.eval_exact(&y).unwrap().re, rat(2, 1));
        let chi = CographFunction::indicator(2, 1);
        let chi_inner = module_inner(&chi, &chi);
        assert_eq!(chi_inner.eval_exact(&y).unwrap().re, rat(1, 1));
        // Module norm of the constant section is √d.
        let cloud = attractor(&sys.to_f64(), 1e-2, 1_000_000).unwrap().cloud;
        let norm = module_norm(&xi, &cloud).unwrap();
        assert!((norm - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn covariance_conditions_hold_exactly() {
        let sys = builtin_system("TENTINV").unwrap().system;
        let a = coordinate_function();
        let b = SampledFunction::poly(0, vec![rat(-1, 7), rat(2, 3)], 1.0);
        let maps = branch_maps(&sys);
        let xi = CographFunction::tensor(&a, &b, &maps);
        let eta = CographFunction::tensor(&b, &SampledFunction::one(), &maps);
        for depth in 0..=4 {
            let ci = verify_condition_i(&a, &xi, &b, &sys, depth).unwrap();
            assert!(ci.exactly_zero, "condition (i) at depth {depth}: {ci:?}");
            let cii = verify_condition_ii(&xi, &eta, &sys, depth).unwrap();
            assert!(cii.exactly_zero, "condition (ii) at depth {depth}: {cii:?}");
        }
    }

    #[test]
    fn compact_condition_collapses_on_certified_partitions() {
        let sys = builtin_system("CANTOR3").unwrap().system;
        let cloud = attractor(&sys.to_f64(), 1e-3, 1_000_000).unwrap().cloud;
        let (check, partition) =
            verify_condition_iii(&SampledFunction::one(), &sys, &cloud, 3, 1e-10).unwrap();
        assert!(check.passed, "residual {:?}", check.residual_norm);
        assert!(!partition.is_empty());
    }

    #[test]
    fn compact_condition_fails_with_oversized_radii() {
        let sys = builtin_system("CANTOR3").unwrap().system;
        let oversized =
            PartitionOfUnity::from_parts_unchecked(vec![vec![rat(1, 2)]], vec![rat(10, 1)]);
        let check =
            condition_iii_with_partition(&SampledFunction::one(), &sys, 3, 1e-10, &oversized)
                .unwrap();
        assert!(!check.passed);
        assert!(check.residual_norm.unwrap() > 1e-3);
    }

    #[test]
    fn support_on_the_branch_set_is_rejected() {
        let sys = builtin_system("TENTINV").unwrap().system;
        let cloud = attractor(&sys.to_f64(), 1e-3, 1_000_000).unwrap().cloud;
        // Constant 1 is supported everywhere, including B = {1/2}.
        let err = verify_condition_iii(&SampledFunction::one(), &sys, &cloud, 3, 1e-10)
            .unwrap_err();
        assert!(matches!(
            err,
            PimsnerError::Branch(BranchError::OnBranchSet { .. })
        ));
    }

    #[test]
    fn gauge_rotation_fixes_the_diagonal_and_twists_the_section() {
        let sys = builtin_system("CANTOR3").unwrap().system;
        let a = coordinate_function();
        let xi = CographFunction::tensor(&a, &SampledFunction::one(), &branch_maps(&sys));
        for turns in [rat(1, 4), rat(1, 3), rat(0, 1)] {
            let check = verify_gauge(&a, &xi, &sys, 2, &turns).unwrap();
            assert!(check.exactly_zero, "turns {turns}: {check:?}");
        }
    }

    #[test]
    fn generator_identity_is_exact() {
        let sys = builtin_system("HALVES").unwrap().system;
        let a = SampledFunction::one();
        let b = coordinate_function();
        let check = verify_generators(&a, &b, &sys, 2).unwrap();
        assert!(check.exactly_zero);
    }

    #[test]
    fn cograph_generators_satisfy_cuntz_relations() {
        for name in ["HALVES", "SIERP"] {
            let builtin = builtin_system(name).unwrap();
            let cloud = attractor(&builtin.system.to_f64(), 1e-3, 1_000_000).unwrap().cloud;
            let report =
                verify_cograph_generators(&builtin.system, &cloud, 2, 1e-4).unwrap();
            assert!(report.all_exact, "{name}: {report:?}");
            assert!(report.generators_are_shifts);
            assert_eq!(report.relations.len(), report.d * report.d + 1);
        }
        // TENTINV has a coincidence, so the indicator sections are rejected.
        let tent = builtin_system("TENTINV").unwrap();
        let cloud = attractor(&tent.system.to_f64(), 1e-3, 1_000_000).unwrap().cloud;
        assert!(matches!(
            verify_cograph_generators(&tent.system, &cloud, 2, 1e-4),
            Err(PimsnerError::NotCographSeparated { .. })
        ));
    }

    #[test]
    fn ideal_membership_reads_the_branch_report() {
        let tent = builtin_system("TENTINV").unwrap();
        let sys_f = tent.system.to_f64();
        let cloud = attractor(&sys_f, 1e-4, 2_000_000).unwrap().cloud;
        let report = BranchReport::compute(&sys_f, &cloud, 1e-4);
        // a(x) = x − 1/2 vanishes on B = {1/2}.
        let vanishing = SampledFunction::poly(0, vec![rat(-1, 2), rat(1, 1)], 1.0);
        assert!(ideal_member(&vanishing, &report, 1e-3));
        assert!(!ideal_member(&SampledFunction::one(), &report, 1e-3));
        // With an empty branch set everything is a member.
        let cantor = builtin_system("CANTOR3").unwrap().system.to_f64();
        let ccloud = attractor(&cantor, 1e-3, 1_000_000).unwrap().cloud;
        let creport = BranchReport::compute(&cantor, &ccloud, 1e-4);
        assert!(ideal_member(&SampledFunction::one(), &creport, 1e-3));
    }

    #[test]
    fn refinement_gaps_shrink_at_the_contraction_ratio() {
        let sys = builtin_system("CANTOR3").unwrap().system;
        let xi = CographFunction::tensor(
            &coordinate_function(),
            &SampledFunction::one(),
            &branch_maps(&sys),
        );
        let gaps = psi_refinement_gaps(&xi, &sys, 2..6).unwrap();
        let diam = 1.0;
        let lip_l2 = 2.0_f64.sqrt() / 3.0;
        for (k, gap) in gaps.iter().enumerate() {
            let n = 2 + k;
            assert!(
                *gap <= lip_l2 * (1.0_f64 / 3.0).powi(n as i32) * diam + 1e-12,
                "gap at depth {n} is {gap}"
            );
        }
        for pair in gaps.windows(2) {
            let ratio = pair[1] / pair[0];
            assert!((ratio - 1.0 / 3.0).abs() <= 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn injectivity_surrogate_bounds_the_sup_norm() {
        let sys = builtin_system("CANTOR3").unwrap().system;
        let cloud = attractor(&sys.to_f64(), 1e-3, 1_000_000).unwrap().cloud;
        let a = coordinate_function();
        for depth in [2, 4, 6] {
            let (sup, bound) = iota_injectivity_bound(&a, &sys, &cloud, depth).unwrap();
            assert!(sup <= bound + 1e-12, "depth {depth}: {sup} vs {bound}");
        }
    }

    #[test]
    fn well_definedness_guard_accepts_tensors_and_rejects_indicators() {
        let tent = builtin_system("TENTINV").unwrap();
        let sys_f = tent.system.to_f64();
        let cloud = attractor(&sys_f, 1e-3, 1_000_000).unwrap().cloud;
        let xi = CographFunction::tensor(
            &coordinate_function(),
            &SampledFunction::one(),
            &branch_maps(&tent.system),
        );
        assert!(check_well_defined(&xi, &sys_f, &cloud, 1e-4).is_ok());
        let chi = CographFunction::indicator(2, 1);
        assert!(matches!(
            check_well_defined(&chi, &sys_f, &cloud, 1e-4),
            Err(PimsnerError::NotWellDefined { .. })
        ));
    }

    #[test]
    fn partition_square_roots_stay_close_to_their_weights() {
        // The only inexact ingredient of condition (iii): √φ via rational
        // approximation.  The squared root re-sums to Σφ = 1 within 2⁻⁷⁰.
        let sys = builtin_system("CANTOR3").unwrap().system.to_f64();
        let cloud = attractor(&sys, 1e-3, 1_000_000).unwrap().cloud;
        let part = PartitionOfUnity::build(&sys, &cloud, &cloud.points.clone(), 1e-4).unwrap();
        let y: Vec<Rational> = cloud.points[42]
            .iter()
            .map(|&v| rational_from_f64(v).unwrap())
            .collect();
        let mut sum = Rational::zero();
        for k in 0..part.len() {
            let root = rational_sqrt(&part.data.weight_exact(Some(k), &y));
            sum += &root * &root;
        }
        let err = num_traits::Signed::abs(&(sum - Rational::one()));
        assert!(err < Rational::new(1.into(), num_bigint::BigInt::from(1u128 << 70)));
    }
}
