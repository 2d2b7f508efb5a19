//! Partitions of unity subordinate to separating balls.
//!
//! `build` covers a set of support samples with balls whose radii come from
//! [`separating_radius`], then turns the cover into weights
//! `φ_k = hat_k / (Σ_j hat_j + bump)` where `hat_k(x) = max(0, 1 − ‖x−x_k‖/R_k)`
//! and the bump `max(0, 2·min_k ‖x−x_k‖/R_k − 1)` switches on only once `x`
//! is further than `R_k/2` from every center.  Support samples are covered
//! within `R_k/2 − 2(resolution + tol)`, so the bump vanishes — and the
//! weights sum to one exactly — at every point within `2(resolution + tol)`
//! of a sample, while each `φ_k` keeps its support inside the certified ball
//! `B(x_k, R_k)`.
//!
//! Weights evaluate both in exact rational arithmetic (distances through
//! [`rational_sqrt`], exact in one dimension where the radicand is a perfect
//! square) and in `f64`.  The zero/nonzero decision `‖x−x_k‖ ≥ R_k` is always
//! made exactly on squared distances, so a weight that should vanish is an
//! exact rational zero.

use crate::branch::{ball_satisfies_conditions, raw_branched_points, separating_radius, BranchError};
use crate::cloud::{dist_f64, PointCloud};
use crate::exact::{rational_from_f64, rational_sqrt};
use crate::ifs::Ifs;
use crate::scalar::Rational;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

/// Ceiling on the number of cover balls before `build` gives up.
pub const COVER_CENTER_CAP: usize = 4096;

/// Centers and hat radii of a partition, in exact and `f64` form.
///
/// The exact values are the dyadic rationals of the `f64` data, so both views
/// describe the same partition; `radii[k]` is the hat radius `R_k` (half the
/// separating radius when built by [`PartitionOfUnity::build`]).
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionData {
    dimension: usize,
    centers: Vec<Vec<Rational>>,
    radii: Vec<Rational>,
    centers_f64: Vec<Vec<f64>>,
    radii_f64: Vec<f64>,
}

impl PartitionData {
    pub fn new(centers: Vec<Vec<Rational>>, radii: Vec<Rational>, dimension: usize) -> Self {
        assert_eq!(centers.len(), radii.len());
        for c in &centers {
            assert_eq!(c.len(), dimension);
        }
        let centers_f64 = centers
            .iter()
            .map(|c| c.iter().map(crate::scalar::Scalar::to_f64_lossy).collect())
            .collect();
        let radii_f64 = radii.iter().map(crate::scalar::Scalar::to_f64_lossy).collect();
        PartitionData {
            dimension,
            centers,
            radii,
            centers_f64,
            radii_f64,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn centers_f64(&self) -> &[Vec<f64>] {
        &self.centers_f64
    }

    pub fn radii_f64(&self) -> &[f64] {
        &self.radii_f64
    }

    fn dist_exact(&self, k: usize, x: &[Rational]) -> Rational {
        let sq: Rational = self.centers[k]
            .iter()
            .zip(x)
            .map(|(c, xi)| {
                let diff = xi - c;
                &diff * &diff
            })
            .sum();
        rational_sqrt(&sq)
    }

    /// `max(0, 1 − ‖x−x_k‖/R_k)`; exactly zero outside the ball, decided on
    /// squared distances.
    pub fn hat_exact(&self, k: usize, x: &[Rational]) -> Rational {
        let sq: Rational = self.centers[k]
            .iter()
            .zip(x)
            .map(|(c, xi)| {
                let diff = xi - c;
                &diff * &diff
            })
            .sum();
        let r = &self.radii[k];
        if sq >= r * r {
            return Rational::zero();
        }
        Rational::one() - rational_sqrt(&sq) / r
    }

    pub fn hat_f64(&self, k: usize, x: &[f64]) -> f64 {
        let dist = dist_f64(&self.centers_f64[k], x);
        (1.0 - dist / self.radii_f64[k]).max(0.0)
    }

    /// Leftover bump `clamp(2·min_k ‖x−x_k‖/R_k − 1, 0, 1)`: zero within
    /// `R_k/2` of some center, one once every hat has died.  With no centers
    /// at all it is identically one.
    pub fn bump_exact(&self, x: &[Rational]) -> Rational {
        let Some(min_ratio) = (0..self.len())
            .map(|k| self.dist_exact(k, x) / &self.radii[k])
            .min()
        else {
            return Rational::one();
        };
        let doubled = min_ratio.clone() + min_ratio - Rational::one();
        if !doubled.is_positive() {
            Rational::zero()
        } else if doubled > Rational::one() {
            Rational::one()
        } else {
            doubled
        }
    }

    pub fn bump_f64(&self, x: &[f64]) -> f64 {
        let Some(min_ratio) = (0..self.len())
            .map(|k| dist_f64(&self.centers_f64[k], x) / self.radii_f64[k])
            .min_by(f64::total_cmp)
        else {
            return 1.0;
        };
        (2.0 * min_ratio - 1.0).clamp(0.0, 1.0)
    }

    /// Normalized weight: `Some(k)` is `φ_k = hat_k / (Σ_j hat_j + bump)`,
    /// `None` the residual `bump / (Σ_j hat_j + bump)`.  The denominator is
    /// positive everywhere and the weights sum to one exactly.
    pub fn weight_exact(&self, slot: Option<usize>, x: &[Rational]) -> Rational {
        let hats: Vec<Rational> = (0..self.len()).map(|k| self.hat_exact(k, x)).collect();
        let bump = self.bump_exact(x);
        let numerator = match slot {
            Some(k) => hats[k].clone(),
            None => bump.clone(),
        };
        if numerator.is_zero() {
            return Rational::zero();
        }
        let denominator: Rational = hats.into_iter().sum::<Rational>() + bump;
        numerator / denominator
    }

    pub fn weight_f64(&self, slot: Option<usize>, x: &[f64]) -> f64 {
        let hats: Vec<f64> = (0..self.len()).map(|k| self.hat_f64(k, x)).collect();
        let bump = self.bump_f64(x);
        let numerator = match slot {
            Some(k) => hats[k],
            None => bump,
        };
        if numerator == 0.0 {
            return 0.0;
        }
        numerator / (hats.iter().sum::<f64>() + bump)
    }

    /// `√φ_slot` through [`rational_sqrt`]: an exact zero stays exactly zero,
    /// a positive weight picks up an error below `2⁻⁷⁹`.
    pub fn sqrt_weight_exact(&self, slot: Option<usize>, x: &[Rational]) -> Rational {
        rational_sqrt(&self.weight_exact(slot, x))
    }

    pub fn sqrt_weight_f64(&self, slot: Option<usize>, x: &[f64]) -> f64 {
        self.weight_f64(slot, x).sqrt()
    }
}

/// A certified cover: hat weights over separating balls, plus the radii used
/// to certify and to cover.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub data: Arc<PartitionData>,
    /// Radius at which each ball passed the separating conditions (`2R_k`).
    pub separating_radii: Vec<f64>,
    /// Radius within which support samples were marked covered
    /// (`R_k/2 − 2(resolution + tol)`).
    pub cover_radii: Vec<f64>,
}

impl PartitionOfUnity {
    /// Greedy farthest-point cover of `support` by separating balls.
    ///
    /// Fails with `OnBranchSet` if any support sample is within `tol` of a
    /// branch image point, `BallTooSmall` if a ball's cover radius is not
    /// positive, and `CoverBudgetExceeded` past [`COVER_CENTER_CAP`] balls.
    pub fn build(
        sys: &Ifs<f64>,
        cloud: &PointCloud<f64>,
        support: &[Vec<f64>],
        tol: f64,
    ) -> Result<Self, BranchError> {
        let raw_branch = raw_branched_points(sys, cloud, tol);
        for p in support {
            if let Some(dist) = raw_branch
                .iter()
                .map(|bp| dist_f64(bp, p))
                .min_by(f64::total_cmp)
            {
                if dist <= tol {
                    return Err(BranchError::OnBranchSet {
                        point: p.clone(),
                        distance: dist,
                        tol,
                    });
                }
            }
        }

        let slack = 2.0 * (cloud.resolution + tol);
        let mut covered = vec![false; support.len()];
        let mut centers_f64: Vec<Vec<f64>> = Vec::new();
        let mut hat_radii: Vec<f64> = Vec::new();
        let mut separating_radii: Vec<f64> = Vec::new();
        let mut cover_radii: Vec<f64> = Vec::new();

        while let Some(next) = Self::farthest_uncovered(support, &covered, &centers_f64) {
            if centers_f64.len() == COVER_CENTER_CAP {
                return Err(BranchError::CoverBudgetExceeded {
                    cap: COVER_CENTER_CAP,
                });
            }
            let x = &support[next];
            let r_sep = separating_radius(sys, x, cloud, tol)?;
            let hat = r_sep / 2.0;
            let cover = hat / 2.0 - slack;
            if cover <= 0.0 {
                return Err(BranchError::BallTooSmall {
                    point: x.clone(),
                    radius: hat,
                    slack,
                });
            }
            for (i, p) in support.iter().enumerate() {
                if !covered[i] && dist_f64(p, x) <= cover {
                    covered[i] = true;
                }
            }
            centers_f64.push(x.clone());
            hat_radii.push(hat);
            separating_radii.push(r_sep);
            cover_radii.push(cover);
        }

        let dimension = support.first().map_or(cloud.dimension(), Vec::len);
        let centers = centers_f64
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&v| rational_from_f64(v).expect("finite coordinate"))
                    .collect()
            })
            .collect();
        let radii = hat_radii
            .iter()
            .map(|&r| rational_from_f64(r).expect("finite radius"))
            .collect();
        Ok(PartitionOfUnity {
            data: Arc::new(PartitionData::new(centers, radii, dimension)),
            separating_radii,
            cover_radii,
        })
    }

    /// First uncovered sample at maximal distance from the chosen centers
    /// (ties to the lowest index; the very first pick is sample 0).
    fn farthest_uncovered(
        support: &[Vec<f64>],
        covered: &[bool],
        centers: &[Vec<f64>],
    ) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in support.iter().enumerate() {
            if covered[i] {
                continue;
            }
            let score = centers
                .iter()
                .map(|c| dist_f64(c, p))
                .min_by(f64::total_cmp)
                .unwrap_or(f64::INFINITY);
            let better = match best {
                None => true,
                Some((_, s)) => score > s,
            };
            if better {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Wraps explicit centers and hat radii without certification or
    /// coverage; for negative controls with deliberately bad radii.
    pub fn from_parts_unchecked(centers: Vec<Vec<Rational>>, radii: Vec<Rational>) -> Self {
        let dimension = centers.first().map_or(0, Vec::len);
        let data = PartitionData::new(centers, radii, dimension);
        let separating_radii = data.radii_f64().iter().map(|r| 2.0 * r).collect();
        let cover_radii = data.radii_f64().iter().map(|r| r / 2.0).collect();
        PartitionOfUnity {
            data: Arc::new(data),
            separating_radii,
            cover_radii,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Re-checks every hat ball against the separating conditions on the
    /// sample.  True for partitions from `build` (hat radius is half a
    /// passing radius and the conditions are monotone); generally false for
    /// oversized handmade radii.
    pub fn certify(&self, sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> bool {
        self.data
            .centers_f64()
            .iter()
            .zip(self.data.radii_f64())
            .all(|(c, &r)| ball_satisfies_conditions(sys, c, r, cloud, tol))
    }

    /// Whether every point lies within the cover radius of some center.
    pub fn covers(&self, points: &[Vec<f64>]) -> bool {
        points.iter().all(|p| {
            self.data
                .centers_f64()
                .iter()
                .zip(&self.cover_radii)
                .any(|(c, &cov)| dist_f64(c, p) <= cov)
        })
    }

    /// Largest `|Σ_k φ_k + residual − 1|` over the points, in `f64`.
    pub fn max_sum_deviation(&self, points: &[Vec<f64>]) -> f64 {
        points
            .iter()
            .map(|p| {
                let sum: f64 = (0..self.len())
                    .map(|k| self.data.weight_f64(Some(k), p))
                    .sum::<f64>()
                    + self.data.weight_f64(None, p);
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}
