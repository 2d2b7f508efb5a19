//! Branch-set analysis on sampled attractors.
//!
//! For a system `Γ = (γ₁, …, γ_d)` the coincidence set
//! `C = {y : γ_i(y) = γ_j(y), some i ≠ j}` and its image
//! `B = {γ_i(y) : y ∈ C}` control which operator-algebraic constructions
//! apply.  Everything here works at an explicit sample resolution and
//! tolerance and reports both, so callers can propagate error budgets.

use crate::cloud::{dist_f64, NearestGrid, PointCloud};
use crate::ifs::Ifs;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BranchError {
    #[error("point {point:?} lies within {tol} of the branch image set (distance {distance})")]
    OnBranchSet {
        point: Vec<f64>,
        distance: f64,
        tol: f64,
    },
    #[error("no separating radius for {point:?} after {halvings} halvings from {start}")]
    NoRadiusFound {
        point: Vec<f64>,
        start: f64,
        halvings: u32,
    },
    #[error("partition cover exceeded {cap} balls")]
    CoverBudgetExceeded { cap: usize },
    #[error(
        "separating ball at {point:?} has radius {radius}, too small to cover anything at slack {slack}"
    )]
    BallTooSmall {
        point: Vec<f64>,
        radius: f64,
        slack: f64,
    },
}

/// Outcome of a separation check: the measured gap and the bar it must clear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationCheck {
    pub separated: bool,
    pub min_gap: f64,
    pub threshold: f64,
}

/// Smallest distance between two distinct branch images of the same point.
fn pair_min_gap(sys: &Ifs<f64>, y: &[f64]) -> f64 {
    let d = sys.branch_count();
    let images: Vec<Vec<f64>> = (1..=d).map(|i| sys.map(i).apply(y)).collect();
    let mut gap = f64::INFINITY;
    for i in 0..d {
        for j in i + 1..d {
            gap = gap.min(dist_f64(&images[i], &images[j]));
        }
    }
    gap
}

/// Greedy clustering: points within `2·tol` of a cluster's seed merge into it;
/// returns centroids sorted lexicographically.  Input order is normalized by
/// sorting, so the result is deterministic.
fn cluster(mut points: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let lex = |a: &Vec<f64>, b: &Vec<f64>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    };
    points.sort_by(lex);
    let mut seeds: Vec<Vec<f64>> = Vec::new();
    let mut sums: Vec<(Vec<f64>, usize)> = Vec::new();
    'next: for p in points {
        for (k, seed) in seeds.iter().enumerate() {
            if dist_f64(seed, &p) <= 2.0 * tol {
                for (acc, x) in sums[k].0.iter_mut().zip(&p) {
                    *acc += x;
                }
                sums[k].1 += 1;
                continue 'next;
            }
        }
        seeds.push(p.clone());
        sums.push((p, 1));
    }
    let mut centers: Vec<Vec<f64>> = sums
        .into_iter()
        .map(|(acc, n)| acc.into_iter().map(|x| x / n as f64).collect())
        .collect();
    centers.sort_by(lex);
    centers
}

fn raw_branched_values(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> Vec<Vec<f64>> {
    cloud
        .points
        .iter()
        .filter(|y| pair_min_gap(sys, y) <= tol)
        .cloned()
        .collect()
}

/// Images `γ_i(y)` over every coincidence pair at `y`, un-clustered.
pub(crate) fn raw_branched_points(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> Vec<Vec<f64>> {
    let d = sys.branch_count();
    let mut out = Vec::new();
    for y in &cloud.points {
        let images: Vec<Vec<f64>> = (1..=d).map(|i| sys.map(i).apply(y)).collect();
        for i in 0..d {
            for j in i + 1..d {
                if dist_f64(&images[i], &images[j]) <= tol {
                    out.push(images[i].clone());
                    out.push(images[j].clone());
                }
            }
        }
    }
    out
}

/// Sample approximation of the coincidence set `C(Γ)`, clustered to centroids.
pub fn branched_values(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> PointCloud<f64> {
    PointCloud::new(
        cluster(raw_branched_values(sys, cloud, tol), tol),
        cloud.resolution,
    )
}

/// Sample approximation of the branch image set `B(Γ)`, clustered.
pub fn branched_points(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> PointCloud<f64> {
    PointCloud::new(
        cluster(raw_branched_points(sys, cloud, tol), tol),
        cloud.resolution,
    )
}

/// Letters `i` whose branch image passes within `tol` of `x`: the sampled
/// index set `I(x) = {i : x ∈ γ_i(K)}`.
pub fn index_set(sys: &Ifs<f64>, x: &[f64], cloud: &PointCloud<f64>, tol: f64) -> Vec<usize> {
    (1..=sys.branch_count())
        .filter(|&i| {
            cloud
                .points
                .iter()
                .any(|y| dist_f64(&sys.map(i).apply(y), x) <= tol)
        })
        .collect()
}

fn image_cloud(sys: &Ifs<f64>, cloud: &PointCloud<f64>, letter: usize) -> Vec<Vec<f64>> {
    cloud.points.iter().map(|y| sys.map(letter).apply(y)).collect()
}

/// Pairwise distance between distinct branch images of the whole sample;
/// separation requires clearing `tol` plus twice the image resolution.
pub fn check_strong_separation(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> SeparationCheck {
    let d = sys.branch_count();
    let cell = (cloud.extent() / (cloud.len().max(1) as f64).powf(1.0 / cloud.dimension().max(1) as f64))
        .max(1e-12);
    let mut min_gap = f64::INFINITY;
    for i in 1..=d {
        let from = image_cloud(sys, cloud, i);
        for j in i + 1..=d {
            let grid = NearestGrid::new(&image_cloud(sys, cloud, j), cell);
            for p in &from {
                min_gap = min_gap.min(grid.nearest(p));
            }
        }
    }
    let threshold = tol + 2.0 * sys.contraction_ratio() * cloud.resolution;
    SeparationCheck {
        separated: min_gap > threshold,
        min_gap,
        threshold,
    }
}

/// Minimum over the sample of the gap between branch images of the *same*
/// point; this is the sampled cograph-disjointness margin.
pub fn check_cograph_separation(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> SeparationCheck {
    let min_gap = cloud
        .points
        .iter()
        .map(|y| pair_min_gap(sys, y))
        .fold(f64::INFINITY, f64::min);
    SeparationCheck {
        separated: min_gap > tol,
        min_gap,
        threshold: tol,
    }
}

/// How many dyadic halvings the radius search tries before giving up.
pub const RADIUS_HALVINGS: u32 = 40;

/// Shared state for the three ball conditions at one base point.
struct BallContext<'a> {
    sys: &'a Ifs<f64>,
    cloud: &'a PointCloud<f64>,
    raw_branch: Vec<Vec<f64>>,
    /// Image clouds `γ_i(cloud)` in letter order.
    images: Vec<Vec<Vec<f64>>>,
    idx: Vec<usize>,
    slack: f64,
}

impl<'a> BallContext<'a> {
    fn new(sys: &'a Ifs<f64>, x: &[f64], cloud: &'a PointCloud<f64>, tol: f64) -> Self {
        let d = sys.branch_count();
        BallContext {
            sys,
            cloud,
            raw_branch: raw_branched_points(sys, cloud, tol),
            images: (1..=d).map(|i| image_cloud(sys, cloud, i)).collect(),
            idx: index_set(sys, x, cloud, tol),
            slack: 2.0 * (cloud.resolution + tol),
        }
    }

    /// The three separating-neighborhood conditions for `B(x, r)`, checked
    /// with the context's slack added to the radius.
    fn conditions_hold(&self, x: &[f64], r: f64) -> bool {
        let d = self.sys.branch_count();
        let reach = r + self.slack;
        let cond_branch = self.raw_branch.iter().all(|bp| dist_f64(bp, x) > reach);
        let cond_outside = (1..=d)
            .filter(|i| !self.idx.contains(i))
            .all(|i| self.images[i - 1].iter().all(|p| dist_f64(p, x) > reach));
        let cond_sibling = self.idx.iter().all(|&i| {
            (0..self.cloud.len()).all(|k| {
                if dist_f64(&self.images[i - 1][k], x) > reach {
                    return true;
                }
                (1..=d)
                    .filter(|&j| j != i)
                    .all(|j| dist_f64(&self.images[j - 1][k], x) > reach)
            })
        });
        cond_branch && cond_outside && cond_sibling
    }
}

/// Whether `B(x, r)` satisfies the three separating-neighborhood conditions
/// on the sample (with slack `2·(resolution + tol)`).  Used to certify
/// partition balls independently of how their radii were found.
pub fn ball_satisfies_conditions(
    sys: &Ifs<f64>,
    x: &[f64],
    r: f64,
    cloud: &PointCloud<f64>,
    tol: f64,
) -> bool {
    BallContext::new(sys, x, cloud, tol).conditions_hold(x, r)
}

/// Largest radius `r` from the ladder `diam/2, diam/4, …` whose ball at `x`
/// passes, on the sample and with a slack of `2·(resolution + tol)`:
///
/// 1. it avoids every branch image point,
/// 2. for letters `i ∈ I(x)`, sibling images `γ_j(y)` of the points `y` with
///    `γ_i(y)` in the ball stay out of the ball, and
/// 3. images of letters outside `I(x)` stay out of the ball.
///
/// Conditions only get easier as `r` shrinks, so the first rung that passes is
/// the largest that does.
pub fn separating_radius(
    sys: &Ifs<f64>,
    x: &[f64],
    cloud: &PointCloud<f64>,
    tol: f64,
) -> Result<f64, BranchError> {
    let ctx = BallContext::new(sys, x, cloud, tol);
    if let Some(dist) = ctx
        .raw_branch
        .iter()
        .map(|bp| dist_f64(bp, x))
        .min_by(f64::total_cmp)
    {
        if dist <= tol {
            return Err(BranchError::OnBranchSet {
                point: x.to_vec(),
                distance: dist,
                tol,
            });
        }
    }

    let start = cloud.diameter_estimate() / 2.0;
    let mut r = start;
    for _ in 0..RADIUS_HALVINGS {
        if ctx.conditions_hold(x, r) {
            return Ok(r);
        }
        r /= 2.0;
    }
    Err(BranchError::NoRadiusFound {
        point: x.to_vec(),
        start,
        halvings: RADIUS_HALVINGS,
    })
}

/// Combined branch diagnostics at one tolerance, with the finite-branch count
/// judged by stability across a ladder of finer tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport {
    pub tol: f64,
    pub resolution: f64,
    pub branched_values: PointCloud<f64>,
    pub branched_points: PointCloud<f64>,
    /// `Some(k)` when the cluster count is stable across the tolerance
    /// ladder (the sampled surrogate for "C is finite with k points");
    /// `None` means inconclusive.
    pub finite_branch: Option<usize>,
    pub strong: SeparationCheck,
    pub cograph: SeparationCheck,
}

/// Tolerance ladder used for the finite-branch stability probe.
pub const FINITE_BRANCH_LADDER: [f64; 3] = [
    1.0 / 1024.0,   // 2⁻¹⁰
    1.0 / 4096.0,   // 2⁻¹²
    1.0 / 16384.0,  // 2⁻¹⁴
];

impl BranchReport {
    pub fn compute(sys: &Ifs<f64>, cloud: &PointCloud<f64>, tol: f64) -> Self {
        let values = branched_values(sys, cloud, tol);
        let points = branched_points(sys, cloud, tol);
        let counts: Vec<usize> = FINITE_BRANCH_LADDER
            .iter()
            .map(|&t| branched_values(sys, cloud, t).len())
            .collect();
        let finite_branch = (counts.windows(2).all(|w| w[0] == w[1])).then(|| counts[0]);
        BranchReport {
            tol,
            resolution: cloud.resolution,
            branched_values: values,
            branched_points: points,
            finite_branch,
            strong: check_strong_separation(sys, cloud, tol),
            cograph: check_cograph_separation(sys, cloud, tol),
        }
    }
}
