//! Iterated function systems of injective affine maps.

use crate::linalg::{AffineMap, Mat};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IfsError {
    #[error("matrix must be square and match the offset dimension")]
    ShapeMismatch,
    #[error("affine map is not injective (singular matrix)")]
    Singular,
    #[error("system is not hyperbolic: contraction ratio {ratio}")]
    NotHyperbolic { ratio: f64 },
    #[error("system needs at least one map")]
    Empty,
    #[error("maps disagree on ambient dimension")]
    DimensionMismatch,
    #[error("budget exceeded: {what} would pass {cap}")]
    BudgetExceeded { what: String, cap: usize },
}

/// Injective affine self-map `x ↦ A x + b` together with its operator norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineContraction<S> {
    map: AffineMap<S>,
    norm: f64,
}

impl<S: Scalar> AffineContraction<S> {
    /// Validates shape and injectivity; the contraction property itself is a
    /// system-level question answered by [`Ifs::is_hyperbolic`].
    pub fn new(matrix: Mat<S>, offset: Vec<S>) -> Result<Self, IfsError> {
        let map = AffineMap::new(matrix, offset).ok_or(IfsError::ShapeMismatch)?;
        if map.matrix.inverse().is_none() {
            return Err(IfsError::Singular);
        }
        let norm = map.matrix.operator_norm();
        Ok(AffineContraction { map, norm })
    }

    pub fn dimension(&self) -> usize {
        self.map.dimension()
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        self.map.apply(x)
    }

    /// Exact inverse as an affine map (generally expansive).
    pub fn inverse(&self) -> AffineMap<S> {
        self.map.inverse().expect("injectivity checked on construction")
    }

    pub fn affine(&self) -> &AffineMap<S> {
        &self.map
    }

    pub fn matrix(&self) -> &Mat<S> {
        &self.map.matrix
    }

    pub fn offset(&self) -> &[S] {
        &self.map.offset
    }

    /// Largest singular value of the linear part.
    pub fn contraction_ratio(&self) -> f64 {
        self.norm
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AffineContraction<T> {
        let map = self.map.map_scalars(f);
        let norm = map.matrix.operator_norm();
        AffineContraction { map, norm }
    }
}

/// A finite family of injective affine maps on a common ambient space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ifs<S> {
    dimension: usize,
    maps: Vec<AffineContraction<S>>,
    ratio: f64,
}

impl<S: Scalar> Ifs<S> {
    pub fn new(maps: Vec<AffineContraction<S>>) -> Result<Self, IfsError> {
        let dimension = maps.first().ok_or(IfsError::Empty)?.dimension();
        if maps.iter().any(|m| m.dimension() != dimension) {
            return Err(IfsError::DimensionMismatch);
        }
        let ratio = maps
            .iter()
            .map(AffineContraction::contraction_ratio)
            .fold(0.0, f64::max);
        Ok(Ifs {
            dimension,
            maps,
            ratio,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of maps (the alphabet size `d`).
    pub fn branch_count(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[AffineContraction<S>] {
        &self.maps
    }

    /// Map for the 1-indexed letter `i`.
    pub fn map(&self, letter: usize) -> &AffineContraction<S> {
        &self.maps[letter - 1]
    }

    /// Uniform contraction ratio `c = max_i ‖A_i‖`.
    pub fn contraction_ratio(&self) -> f64 {
        self.ratio
    }

    /// Hyperbolicity flag together with the witnessing ratio.
    pub fn is_hyperbolic(&self) -> (bool, f64) {
        (self.ratio < 1.0, self.ratio)
    }

    pub fn ensure_hyperbolic(&self) -> Result<(), IfsError> {
        if self.ratio < 1.0 {
            Ok(())
        } else {
            Err(IfsError::NotHyperbolic { ratio: self.ratio })
        }
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Ifs<T> {
        Ifs {
            dimension: self.dimension,
            maps: self.maps.iter().map(|m| m.map_scalars(&f)).collect(),
            ratio: self.ratio,
        }
    }

    /// f64 projection used by the measurement layer.
    pub fn to_f64(&self) -> Ifs<f64> {
        self.map_scalars(S::to_f64_lossy)
    }
}
