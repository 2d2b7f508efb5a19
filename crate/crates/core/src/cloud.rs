//! Point clouds, Hausdorff distance and the deterministic attractor iteration.
//!
//! A cloud carries the resolution at which it approximates the attractor: the
//! Hausdorff distance between the stored points and the true invariant set is
//! at most `resolution`.  The attractor loop keeps that bound certified: with
//! merge radius `m` and successive-cloud gap `g`, the fixed-point estimate
//! `d(C_{k+1}, K) ≤ c·(g + m)/(1 − c) + m` holds, and iteration stops once it
//! drops below the requested `eps`.
//!
//! Deduplication keeps the *first* point that lands in each grid cell instead
//! of snapping to cell centres, so every surviving point is an exact image
//! `γ_w(seed)` of the seed under some composition — a property the code-map
//! tests lean on.

use crate::ifs::{Ifs, IfsError};
use crate::scalar::RealScalar;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Default cap on the number of points an attractor computation may hold.
pub const DEFAULT_POINT_CAP: usize = 10_000_000;

/// Finite point set with the resolution at which it approximates a compact set.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<S = f64> {
    pub points: Vec<Vec<S>>,
    pub resolution: f64,
}

impl<S: RealScalar> PointCloud<S> {
    pub fn new(points: Vec<Vec<S>>, resolution: f64) -> Self {
        PointCloud { points, resolution }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Axis-aligned bounding-box diagonal; cheap over-estimate of the diameter
    /// (exact in one dimension).
    pub fn extent(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let n = self.dimension();
        let mut span2 = 0.0;
        for j in 0..n {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p in &self.points {
                let v = p[j].to_f64_lossy();
                lo = lo.min(v);
                hi = hi.max(v);
            }
            span2 += (hi - lo) * (hi - lo);
        }
        span2.sqrt()
    }

    /// Diameter estimate for the approximated set: cloud extent plus slack.
    pub fn diameter_estimate(&self) -> f64 {
        self.extent() + 2.0 * self.resolution
    }

    pub fn to_f64(&self) -> PointCloud<f64> {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(S::to_f64_lossy).collect())
                .collect(),
            resolution: self.resolution,
        }
    }
}

pub(crate) fn dist_f64<S: RealScalar>(p: &[S], q: &[S]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.to_f64_lossy() - b.to_f64_lossy();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Grid-bucketed nearest-point index over the f64 projection of a cloud.
pub(crate) struct NearestGrid {
    cell: f64,
    buckets: BTreeMap<Vec<i64>, Vec<Vec<f64>>>,
}

impl NearestGrid {
    pub(crate) fn new<S: RealScalar>(points: &[Vec<S>], cell: f64) -> Self {
        let cell = if cell.is_finite() && cell > 0.0 { cell } else { 1.0 };
        let mut buckets: BTreeMap<Vec<i64>, Vec<Vec<f64>>> = BTreeMap::new();
        for p in points {
            let pf: Vec<f64> = p.iter().map(S::to_f64_lossy).collect();
            let key: Vec<i64> = pf.iter().map(|x| (x / cell).floor() as i64).collect();
            buckets.entry(key).or_default().push(pf);
        }
        NearestGrid { cell, buckets }
    }

    /// Distance from `p` to the nearest stored point (∞ when empty).
    pub(crate) fn nearest(&self, p: &[f64]) -> f64 {
        if self.buckets.is_empty() {
            return f64::INFINITY;
        }
        let home: Vec<i64> = p.iter().map(|x| (x / self.cell).floor() as i64).collect();
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            let mut any_cell_alive = false;
            for key in chebyshev_ring(&home, ring) {
                if let Some(bucket) = self.buckets.get(&key) {
                    any_cell_alive = true;
                    for q in bucket {
                        let d = q
                            .iter()
                            .zip(p)
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        best = best.min(d);
                    }
                }
            }
            // Points in ring k+1 are at least k·cell away.
            if best <= ring as f64 * self.cell {
                return best;
            }
            if any_cell_alive {
                ring += 1;
            } else {
                // Skip the empty stretch: jump straight to the nearest
                // populated ring instead of grinding through one ring at a
                // time (widely separated clusters otherwise cost a full key
                // scan per empty ring).
                match self.next_populated_ring(&home, ring) {
                    Some(r) => ring = r,
                    None => return best,
                }
            }
        }
    }

    /// Smallest Chebyshev distance `> ring` from `home` to a populated cell.
    fn next_populated_ring(&self, home: &[i64], ring: i64) -> Option<i64> {
        if home.len() == 1 {
            // Keys sort numerically in one dimension: range queries find the
            // nearest populated cell on each side directly.
            let h = home[0];
            let above = self
                .buckets
                .range(vec![h + ring + 1]..)
                .next()
                .map(|(k, _)| k[0] - h);
            let below = self
                .buckets
                .range(..=vec![h - ring - 1])
                .next_back()
                .map(|(k, _)| h - k[0]);
            return match (above, below) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (x, y) => x.or(y),
            };
        }
        self.buckets
            .keys()
            .map(|key| {
                key.iter()
                    .zip(home)
                    .map(|(k, h)| (k - h).abs())
                    .max()
                    .unwrap_or(0)
            })
            .filter(|&r| r > ring)
            .min()
    }
}

/// Cell keys whose Chebyshev distance from `home` is exactly `ring`.
fn chebyshev_ring(home: &[i64], ring: i64) -> Vec<Vec<i64>> {
    let n = home.len();
    let mut out = Vec::new();
    let mut offset = vec![-ring; n];
    'outer: loop {
        if offset.iter().any(|o| o.abs() == ring) {
            out.push(home.iter().zip(&offset).map(|(h, o)| h + o).collect());
        }
        for j in 0..n {
            offset[j] += 1;
            if offset[j] <= ring {
                continue 'outer;
            }
            offset[j] = -ring;
        }
        return out;
    }
}

fn directed_distance<S: RealScalar>(from: &PointCloud<S>, to: &PointCloud<S>, cell: f64) -> f64 {
    if from.is_empty() {
        return 0.0;
    }
    if to.is_empty() {
        return f64::INFINITY;
    }
    if from.len() * to.len() <= 65_536 {
        return from
            .points
            .par_iter()
            .map(|p| {
                to.points
                    .iter()
                    .map(|q| dist_f64(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max);
    }
    let grid = NearestGrid::new(&to.points, cell);
    from.points
        .par_iter()
        .map(|p| {
            let pf: Vec<f64> = p.iter().map(S::to_f64_lossy).collect();
            grid.nearest(&pf)
        })
        .reduce(|| 0.0, f64::max)
}

/// Symmetric Hausdorff distance between two clouds.
pub fn hausdorff_distance<S: RealScalar>(a: &PointCloud<S>, b: &PointCloud<S>) -> f64 {
    let extent = a.extent().max(b.extent());
    let count = a.len().max(b.len()).max(1) as f64;
    let n = a.dimension().max(b.dimension()).max(1);
    let cell = (extent / count.powf(1.0 / n as f64)).max(extent * 1e-9).max(1e-12);
    directed_distance(a, b, cell).max(directed_distance(b, a, cell))
}

/// First-representative grid deduplication with merge radius `merge`.
///
/// `merge <= 0` removes exact duplicates only.  The output is sorted
/// lexicographically, making downstream runs byte-reproducible.
fn dedup_points<S: RealScalar>(mut points: Vec<Vec<S>>, merge: f64) -> Vec<Vec<S>> {
    if merge > 0.0 {
        let n = points.first().map_or(1, Vec::len).max(1);
        let cell = merge / (n as f64).sqrt();
        let mut seen: BTreeMap<Vec<i64>, ()> = BTreeMap::new();
        points.retain(|p| {
            let key: Vec<i64> = p
                .iter()
                .map(|x| (x.to_f64_lossy() / cell).floor() as i64)
                .collect();
            seen.insert(key, ()).is_none()
        });
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("points are finite"));
    points.dedup();
    points
}

/// One Hutchinson step `C ↦ ⋃_i γ_i(C)` with grid deduplication.
///
/// The returned resolution is `c · resolution + dedup_tol`.
pub fn hutchinson_step<S: RealScalar>(
    sys: &Ifs<S>,
    cloud: &PointCloud<S>,
    dedup_tol: f64,
) -> PointCloud<S> {
    assert_eq!(
        sys.dimension(),
        cloud.dimension().max(if cloud.is_empty() { sys.dimension() } else { 0 }),
        "cloud dimension must match the system"
    );
    let mut images = Vec::with_capacity(sys.branch_count() * cloud.len());
    for map in sys.maps() {
        for p in &cloud.points {
            images.push(map.apply(p));
        }
    }
    let points = dedup_points(images, dedup_tol);
    PointCloud {
        points,
        resolution: sys.contraction_ratio() * cloud.resolution + dedup_tol,
    }
}

/// Result of an attractor computation.
#[derive(Clone, Debug)]
pub struct AttractorData<S = f64> {
    pub cloud: PointCloud<S>,
    pub iterations: usize,
    pub seed: Vec<S>,
}

/// Deterministic attractor approximation with certified resolution ≤ `eps`.
///
/// Seeded at the fixed point of the first map; each step applies every map,
/// deduplicates on a fixed grid (merge radius `eps(1−c)/2`, chosen so that the
/// certificate closes for every `c < 1`) and stops when the certified
/// resolution reaches `eps`.
pub fn attractor<S: RealScalar>(
    sys: &Ifs<S>,
    eps: f64,
    point_cap: usize,
) -> Result<AttractorData<S>, IfsError> {
    assert!(eps > 0.0, "eps must be positive");
    sys.ensure_hyperbolic()?;
    let c = sys.contraction_ratio();
    let merge = eps * (1.0 - c) / 2.0;

    let seed = sys
        .map(1)
        .affine()
        .fixed_point()
        .ok_or(IfsError::Singular)?;
    let mut cloud = PointCloud::new(vec![seed.clone()], 0.0);
    // Seed sits on the attractor, but flag the unknown scale honestly.
    cloud.resolution = f64::INFINITY;

    let mut iterations = 0usize;
    loop {
        if cloud.len().saturating_mul(sys.branch_count()) > point_cap {
            return Err(IfsError::BudgetExceeded {
                what: format!("attractor points ({} before step)", cloud.len()),
                cap: point_cap,
            });
        }
        let next = hutchinson_step(sys, &cloud, merge);
        let gap = hausdorff_distance(&cloud, &next);
        iterations += 1;
        cloud = next;
        let certified = c * (gap + merge) / (1.0 - c) + merge;
        cloud.resolution = certified;
        if certified <= eps {
            break;
        }
        let diam = cloud.extent().max(eps);
        let budget = ((diam / eps).ln() / (1.0 / c).ln()).ceil().max(0.0) as usize + 64;
        if iterations > budget {
            return Err(IfsError::BudgetExceeded {
                what: format!("attractor iterations (gap {gap:.3e})"),
                cap: budget,
            });
        }
    }
    Ok(AttractorData {
        cloud,
        iterations,
        seed,
    })
}

/// Hausdorff distance between a cloud and its Hutchinson image.
pub fn self_similarity_residual<S: RealScalar>(sys: &Ifs<S>, cloud: &PointCloud<S>) -> f64 {
    let mut images = Vec::with_capacity(sys.branch_count() * cloud.len());
    for map in sys.maps() {
        for p in &cloud.points {
            images.push(map.apply(p));
        }
    }
    let image_cloud = PointCloud {
        points: images,
        resolution: cloud.resolution,
    };
    hausdorff_distance(cloud, &image_cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins::builtin_system;

    fn cloud1(xs: &[f64]) -> PointCloud {
        PointCloud::new(xs.iter().map(|&x| vec![x]).collect(), 0.0)
    }

    #[test]
    fn hausdorff_basics() {
        let a = cloud1(&[0.0, 1.0]);
        let b = cloud1(&[0.0, 1.0, 0.5]);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        assert!((hausdorff_distance(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(hausdorff_distance(&a, &b), hausdorff_distance(&b, &a));
    }

    #[test]
    fn grid_and_brute_force_agree() {
        // Enough points to trip the grid path.
        let xs: Vec<f64> = (0..600).map(|i| i as f64 / 600.0).collect();
        let ys: Vec<f64> = (0..600).map(|i| i as f64 / 600.0 + 0.37e-3).collect();
        let a = cloud1(&xs);
        let b = cloud1(&ys);
        let d = hausdorff_distance(&a, &b);
        let brute = xs
            .iter()
            .map(|x| {
                ys.iter()
                    .map(|y| (x - y).abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .max(
                ys.iter()
                    .map(|y| {
                        xs.iter()
                            .map(|x| (x - y).abs())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(0.0, f64::max),
            );
        assert!((d - brute).abs() < 1e-15);
    }

    #[test]
    fn hutchinson_step_on_seed_points() {
        let sys = builtin_system("CANTOR3").unwrap().system.to_f64();
        let step = hutchinson_step(&sys, &cloud1(&[0.0, 2.0 / 3.0]), 0.0);
        let xs: Vec<f64> = step.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0]);

        let halves = builtin_system("HALVES").unwrap().system.to_f64();
        let step = hutchinson_step(&halves, &cloud1(&[0.0, 1.0]), 0.0);
        let xs: Vec<f64> = step.points.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.0, 0.5, 1.0]); // exact duplicate 1/2 collapses
    }

    #[test]
    fn attractor_meets_requested_resolution() {
        let sys = builtin_system("CANTOR3").unwrap().system.to_f64();
        let eps = 1e-3;
        let data = attractor(&sys, eps, DEFAULT_POINT_CAP).unwrap();
        assert!(data.cloud.resolution <= eps);
        assert!(self_similarity_residual(&sys, &data.cloud) <= 2.0 * eps);
        // Classical middle-thirds gaps stay empty.
        assert!(data
            .cloud
            .points
            .iter()
            .all(|p| !(p[0] > 1.0 / 3.0 + eps && p[0] < 2.0 / 3.0 - eps)));
    }

    #[test]
    fn attractor_is_deterministic() {
        let sys = builtin_system("SIERP").unwrap().system.to_f64();
        let a = attractor(&sys, 5e-2, DEFAULT_POINT_CAP).unwrap();
        let b = attractor(&sys, 5e-2, DEFAULT_POINT_CAP).unwrap();
        assert_eq!(a.cloud.points, b.cloud.points);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn attractor_rejects_expanding_systems() {
        use crate::ifs::AffineContraction;
        use crate::linalg::Mat;
        let expanding = Ifs::new(vec![AffineContraction::new(
            Mat::from_rows(vec![vec![2.0]]).unwrap(),
            vec![0.0],
        )
        .unwrap()])
        .unwrap();
        assert!(matches!(
            attractor(&expanding, 1e-2, DEFAULT_POINT_CAP),
            Err(IfsError::NotHyperbolic { .. })
        ));
    }

    #[test]
    fn attractor_respects_point_cap() {
        let sys = builtin_system("SIERP").unwrap().system.to_f64();
        assert!(matches!(
            attractor(&sys, 1e-4, 100),
            Err(IfsError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn huge_eps_finishes_in_one_step() {
        let sys = builtin_system("CANTOR3").unwrap().system.to_f64();
        let data = attractor(&sys, 10.0, DEFAULT_POINT_CAP).unwrap();
        assert!(data.iterations <= 1);
    }

    #[test]
    fn monotone_convergence_of_residual() {
        let sys = builtin_system("CANTOR3").unwrap().system.to_f64();
        let c = sys.contraction_ratio();
        let dedup = 1e-6;
        let mut cloud = cloud1(&[0.0]);
        cloud.resolution = 1.0;
        let initial = self_similarity_residual(&sys, &cloud);
        let mut stepped = cloud;
        let k = 5;
        for _ in 0..k {
            stepped = hutchinson_step(&sys, &stepped, dedup);
        }
        let later = self_similarity_residual(&sys, &stepped);
        assert!(later <= c.powi(k as i32) * initial + 2.0 * dedup);
    }

    #[test]
    fn f32_clouds_work_too() {
        let sys = builtin_system("CANTOR3").unwrap().system.map_scalars(|s| {
            use crate::scalar::Scalar;
            s.to_f64_lossy() as f32
        });
        let data = attractor(&sys, 1e-2, DEFAULT_POINT_CAP).unwrap();
        assert!(data.cloud.resolution <= 1e-2);
    }
}
