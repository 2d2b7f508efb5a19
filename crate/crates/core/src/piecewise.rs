//! Piecewise affine maps on axis-aligned boxes.
//!
//! Used to describe (typically expansive, possibly discontinuous) left
//! inverses `γ` with `γ ∘ γ_i = id`.  Pieces are tried in order and the first
//! box containing the query point wins, so boundary behaviour is controlled
//! by piece order; all evaluations are exact over rational scalars.

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// One affine piece restricted to the closed box `lower ≤ x ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece<S> {
    pub lower: Vec<S>,
    pub upper: Vec<S>,
    pub map: crate::linalg::AffineMap<S>,
}

impl<S: Scalar> Piece<S> {
    pub fn contains(&self, x: &[S]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(xi, (lo, hi))| lo <= xi && xi <= hi)
    }

    /// Membership in the box inflated by `margin` on every side (f64 view).
    pub fn contains_within(&self, x: &[f64], margin: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(xi, (lo, hi))| {
                *xi >= lo.to_f64_lossy() - margin && *xi <= hi.to_f64_lossy() + margin
            })
    }
}

/// Ordered list of affine pieces; first matching box applies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffineMap<S> {
    pieces: Vec<Piece<S>>,
}

/// A point where two overlapping pieces disagree beyond tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityWarning {
    pub piece_a: usize,
    pub piece_b: usize,
    pub at: Vec<f64>,
    pub deviation: f64,
}

impl<S: Scalar> PiecewiseAffineMap<S> {
    pub fn new(pieces: Vec<Piece<S>>) -> Option<Self> {
        let dim = pieces.first()?.map.dimension();
        let consistent = pieces.iter().all(|p| {
            p.map.dimension() == dim && p.lower.len() == dim && p.upper.len() == dim
        });
        consistent.then_some(PiecewiseAffineMap { pieces })
    }

    pub fn dimension(&self) -> usize {
        self.pieces[0].map.dimension()
    }

    pub fn pieces(&self) -> &[Piece<S>] {
        &self.pieces
    }

    /// Index of the first piece whose box contains `x`.
    pub fn locate(&self, x: &[S]) -> Option<usize> {
        self.pieces.iter().position(|p| p.contains(x))
    }

    pub fn apply(&self, x: &[S]) -> Option<Vec<S>> {
        self.locate(x).map(|k| self.pieces[k].map.apply(x))
    }

    /// Largest operator norm over the pieces (Lipschitz bound piecewise).
    pub fn norm_bound(&self) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.map.matrix.operator_norm())
            .fold(0.0, f64::max)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> PiecewiseAffineMap<T> {
        PiecewiseAffineMap {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lower: p.lower.iter().map(f).collect(),
                    upper: p.upper.iter().map(f).collect(),
                    map: p.map.map_scalars(f),
                })
                .collect(),
        }
    }

    /// Scans sample points near shared piece boundaries and reports pairs of
    /// pieces whose values disagree there by more than `tol`.
    ///
    /// Discontinuity is a warning, not an error: a left inverse only has to
    /// act correctly on the attractor, which may avoid the seams entirely.
    pub fn continuity_warnings(&self, samples: &[Vec<f64>], margin: f64, tol: f64) -> Vec<ContinuityWarning> {
        let float = self.map_scalars(|s| s.to_f64_lossy());
        let mut worst: std::collections::BTreeMap<(usize, usize), ContinuityWarning> =
            std::collections::BTreeMap::new();
        for x in samples {
            let hits: Vec<usize> = float
                .pieces
                .iter()
                .enumerate()
                .filter(|(_, p)| p.contains_within(x, margin))
                .map(|(k, _)| k)
                .collect();
            for (a_pos, &a) in hits.iter().enumerate() {
                for &b in &hits[a_pos + 1..] {
                    let va = float.pieces[a].map.apply(x);
                    let vb = float.pieces[b].map.apply(x);
                    let dev = va
                        .iter()
                        .zip(&vb)
                        .map(|(p, q)| (p - q) * (p - q))
                        .sum::<f64>()
                        .sqrt();
                    if dev > tol {
                        let entry = worst.entry((a, b));
                        let w = ContinuityWarning {
                            piece_a: a,
                            piece_b: b,
                            at: x.clone(),
                            deviation: dev,
                        };
                        use std::collections::btree_map::Entry;
                        match entry {
                            Entry::Vacant(v) => {
                                v.insert(w);
                            }
                            Entry::Occupied(mut o) => {
                                if dev > o.get().deviation {
                                    o.insert(w);
                                }
                            }
                        }
                    }
                }
            }
        }
        worst.into_values().collect()
    }
}
