//! Small dense matrices and affine maps over a generic scalar.
//!
//! The systems handled here are tiny (dimension ≤ 4 in practice), so the
//! matrix type favours exactness and simplicity over speed: inversion is
//! Gauss-Jordan with partial pivoting, which is exact over [`Rational`].
//! Operator norms are delegated to nalgebra's SVD on the f64 projection.

use crate::scalar::Scalar;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Option<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return None;
        }
        Some(Mat {
            rows: n_rows,
            cols: n_cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat {
            rows: n,
            cols: n,
            data: vec![S::zero(); n * n],
        };
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "vector length must match matrix width");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    pub fn mul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Mat {
            rows: self.rows,
            cols: other.cols,
            data: vec![S::zero(); self.rows * other.cols],
        };
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + add;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    /// Gauss-Jordan inverse with partial pivoting; `None` when singular.
    ///
    /// Over exact scalars singularity detection is exact (pivot == 0); over
    /// floats a pivot below `1e-300` is treated as zero.
    pub fn inverse(&self) -> Option<Mat<S>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv: Mat<S> = Mat::identity(n);
        for col in 0..n {
            let pivot_row = (col..n).max_by(|&r1, &r2| {
                a[(r1, col)]
                    .abs()
                    .partial_cmp(&a[(r2, col)].abs())
                    .expect("scalar comparison")
            })?;
            if a[(pivot_row, col)].abs().to_f64_lossy() < 1e-300 {
                return None;
            }
            a.swap_rows(col, pivot_row);
            inv.swap_rows(col, pivot_row);
            let pivot = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = a[(col, j)].clone() / pivot.clone();
                inv[(col, j)] = inv[(col, j)].clone() / pivot.clone();
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = a[(row, col)].clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let da = a[(col, j)].clone() * factor.clone();
                    a[(row, j)] = a[(row, j)].clone() - da;
                    let di = inv[(col, j)].clone() * factor.clone();
                    inv[(row, j)] = inv[(row, j)].clone() - di;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, r1: usize, r2: usize) {
        if r1 == r2 {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(r1 * self.cols + j, r2 * self.cols + j);
        }
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(S::to_f64_lossy))
    }

    /// Largest singular value of the f64 projection.
    pub fn operator_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        if self.rows == 1 && self.cols == 1 {
            return self.data[0].to_f64_lossy().abs();
        }
        self.to_f64().svd(false, false).singular_values[0]
    }

    /// Right singular vector for the largest singular value.
    pub fn top_singular_direction(&self) -> Vec<f64> {
        let svd = self.to_f64().svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        (0..self.cols).map(|j| v_t[(0, j)]).collect()
    }
}

impl<S> std::ops::Index<(usize, usize)> for Mat<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> std::ops::IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// Affine map `x ↦ A x + b` without any contraction guarantee.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap<S> {
    pub matrix: Mat<S>,
    pub offset: Vec<S>,
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(matrix: Mat<S>, offset: Vec<S>) -> Option<Self> {
        if !matrix.is_square() || matrix.n_rows() != offset.len() {
            return None;
        }
        Some(AffineMap { matrix, offset })
    }

    pub fn dimension(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        let mut y = self.matrix.apply(x);
        for (yi, bi) in y.iter_mut().zip(&self.offset) {
            *yi = yi.clone() + bi.clone();
        }
        y
    }

    /// Exact inverse map `x ↦ A⁻¹ (x − b)`; `None` when `A` is singular.
    pub fn inverse(&self) -> Option<AffineMap<S>> {
        let inv = self.matrix.inverse()?;
        let shifted: Vec<S> = self.offset.iter().map(|b| -b.clone()).collect();
        let offset = inv.apply(&shifted);
        Some(AffineMap {
            matrix: inv,
            offset,
        })
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &AffineMap<S>) -> AffineMap<S> {
        AffineMap {
            matrix: self.matrix.mul(&other.matrix),
            offset: self.apply(&other.offset),
        }
    }

    /// Fixed point of the map, when `I − A` is invertible.
    pub fn fixed_point(&self) -> Option<Vec<S>> {
        let n = self.dimension();
        let diff = Mat::identity(n).sub(&self.matrix);
        Some(diff.inverse()?.apply(&self.offset))
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> AffineMap<T> {
        AffineMap {
            matrix: self.matrix.map_scalars(&f),
            offset: self.offset.iter().map(f).collect(),
        }
    }
}
