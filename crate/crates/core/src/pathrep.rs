//! Finite-dimensional path representation of algebra elements.
//!
//! An element acts on the span of basis vectors `e_v`, one per word `v` of a
//! fixed length `depth`, by `S_μS_ν* e_v = e_{μv′}` when `v = νv′` and `0`
//! otherwise.  The image vector `e_{μv′}` has length `depth + |μ| − |ν|`, so
//! the matrix splits into rectangular blocks graded by the degree `|μ| − |ν|`;
//! rows of different blocks index words of different lengths and never
//! interact.  On elements whose words fit inside `depth` the action is
//! faithful, which makes the matrix a trustworthy independent oracle for
//! `multiply` and the source of the truncation seminorm used by the
//! representation checks.

use crate::algebra::{AlgebraElement, AlgebraError};
use crate::coef::Coef;
use crate::word::Word;
use nalgebra::DMatrix;
use num_complex::Complex;
use std::collections::{BTreeMap, BTreeSet};

/// Hard ceiling on the number of basis columns `d^depth` a path matrix may
/// use, so a typo'd depth fails fast instead of exhausting memory.
pub const PATH_MATRIX_COLUMN_CAP: usize = 1 << 20;

/// Block-graded matrix of an element acting on length-`depth` words.
///
/// `blocks[g]` holds the degree-`g` part: entries `(row, col) → coefficient`
/// with `|col| = depth` and `|row| = depth + g`.  Zero coefficients are
/// pruned, so two path matrices are equal iff they represent the same
/// operator on the truncation space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathMatrix {
    d: usize,
    depth: usize,
    blocks: BTreeMap<i64, BTreeMap<(Word, Word), Coef>>,
}

impl PathMatrix {
    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Graded blocks in increasing degree order.
    pub fn blocks(&self) -> impl Iterator<Item = (i64, &BTreeMap<(Word, Word), Coef>)> {
        self.blocks.iter().map(|(g, b)| (*g, b))
    }

    /// Entry lookup across all blocks; the degree is determined by the words.
    pub fn entry(&self, row: &Word, col: &Word) -> Option<&Coef> {
        let degree = row.len() as i64 - col.len() as i64;
        self.blocks.get(&degree).and_then(|b| b.get(&(row.clone(), col.clone())))
    }

    fn add_entry(
        blocks: &mut BTreeMap<i64, BTreeMap<(Word, Word), Coef>>,
        row: Word,
        col: Word,
        coef: Coef,
    ) {
        let degree = row.len() as i64 - col.len() as i64;
        let block = blocks.entry(degree).or_default();
        let key = (row, col);
        let merged = match block.get(&key) {
            Some(existing) => existing.add(&coef),
            None => coef,
        };
        if merged.is_zero() {
            block.remove(&key);
        } else {
            block.insert(key, merged);
        }
    }

    fn prune(&mut self) {
        self.blocks.retain(|_, block| !block.is_empty());
    }

    /// Matrix of `p · (element represented by self)`, computed by letting each
    /// `S_μS_ν*` of `p` act on the row words.  This is matrix multiplication
    /// in the path representation and never consults `AlgebraElement::multiply`,
    /// so the two can be compared as independent oracles.
    pub fn left_multiply(&self, p: &AlgebraElement) -> Result<PathMatrix, AlgebraError> {
        if p.alphabet_size() != self.d {
            return Err(AlgebraError::AlphabetMismatch {
                left: p.alphabet_size(),
                right: self.d,
            });
        }
        let mut blocks: BTreeMap<i64, BTreeMap<(Word, Word), Coef>> = BTreeMap::new();
        for (mu, nu, c) in p.terms() {
            for (_, block) in self.blocks.iter() {
                for ((row, col), m) in block.iter() {
                    if let Some(rest) = row.strip_prefix(nu) {
                        let new_row = mu.concat(&rest);
                        Self::add_entry(&mut blocks, new_row, col.clone(), c.mul(m, self.d));
                    } else if nu.strip_prefix(row).is_some() {
                        // The row word ends inside ν: the action leaves the
                        // truncation space, so this depth cannot represent
                        // the product faithfully.
                        return Err(AlgebraError::DepthTooSmall {
                            required: self.depth + (nu.len() - row.len()),
                            got: self.depth,
                        });
                    }
                }
            }
        }
        let mut out = PathMatrix {
            d: self.d,
            depth: self.depth,
            blocks,
        };
        out.prune();
        Ok(out)
    }

    /// Largest singular value of the stacked blocks, evaluated in `f64`.
    ///
    /// Rows of distinct blocks are orthogonal (they index words of different
    /// lengths), so stacking every appearing row over the appearing columns
    /// reproduces the operator norm of the action on the truncation space.
    ///
    /// When no row is shared between two columns, `M*M` is diagonal and the
    /// norm is the largest column ℓ²-norm; that covers `ψ`-type elements
    /// (rows `iw` determine their column `w`) at any depth, where the dense
    /// decomposition would not fit in memory.
    pub fn truncation_norm(&self) -> f64 {
        let mut col_sq: BTreeMap<&Word, f64> = BTreeMap::new();
        let mut row_owner: BTreeMap<(i64, &Word), &Word> = BTreeMap::new();
        let mut columns_disjoint = true;
        'scan: for (g, block) in self.blocks.iter() {
            for ((row, col), coef) in block.iter() {
                *col_sq.entry(col).or_insert(0.0) += coef.to_complex64(self.d).norm_sqr();
                if let Some(owner) = row_owner.insert((*g, row), col) {
                    if owner != col {
                        columns_disjoint = false;
                        break 'scan;
                    }
                }
            }
        }
        if columns_disjoint {
            return col_sq.values().fold(0.0_f64, |a, &v| a.max(v)).sqrt();
        }

        let mut cols: BTreeSet<&Word> = BTreeSet::new();
        let mut rows: BTreeSet<(i64, &Word)> = BTreeSet::new();
        for (g, block) in self.blocks.iter() {
            for (row, col) in block.keys() {
                rows.insert((*g, row));
                cols.insert(col);
            }
        }
        if rows.is_empty() || cols.is_empty() {
            return 0.0;
        }
        let row_index: BTreeMap<(i64, &Word), usize> =
            rows.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let col_index: BTreeMap<&Word, usize> =
            cols.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let mut mat = DMatrix::<Complex<f64>>::zeros(row_index.len(), col_index.len());
        for (g, block) in self.blocks.iter() {
            for ((row, col), coef) in block.iter() {
                let i = row_index[&(*g, row)];
                let j = col_index[col];
                mat[(i, j)] += coef.to_complex64(self.d);
            }
        }
        mat.singular_values().iter().fold(0.0_f64, |a, s| a.max(*s))
    }
}

/// Expands `p` into its action on length-`depth` words.
///
/// Every term `(μ, ν, c)` contributes one entry `(μu, νu) → c` per suffix `u`
/// of length `depth − |ν|`; entries from different terms that land on the
/// same word pair accumulate.  Requires `depth` to be at least the longest
/// word appearing in `p`, otherwise some term would act as zero and the
/// representation would forget it.
pub fn path_matrix(p: &AlgebraElement, depth: usize) -> Result<PathMatrix, AlgebraError> {
    let d = p.alphabet_size();
    let required = p.max_word_len();
    if depth < required {
        return Err(AlgebraError::DepthTooSmall {
            required,
            got: depth,
        });
    }
    let mut columns: usize = 1;
    for _ in 0..depth {
        columns = columns
            .checked_mul(d)
            .filter(|&n| n <= PATH_MATRIX_COLUMN_CAP)
            .ok_or(AlgebraError::BudgetExceeded {
                needed: usize::MAX,
                cap: PATH_MATRIX_COLUMN_CAP,
            })?;
    }
    let mut blocks: BTreeMap<i64, BTreeMap<(Word, Word), Coef>> = BTreeMap::new();
    for (mu, nu, c) in p.terms() {
        for u in Word::all_of_length(depth - nu.len(), d) {
            let row = mu.concat(&u);
            let col = nu.concat(&u);
            PathMatrix::add_entry(&mut blocks, row, col, c.clone());
        }
    }
    let mut out = PathMatrix { d, depth, blocks };
    out.prune();
    Ok(out)
}

/// Truncation seminorm of `p` at the given depth: the operator norm of its
/// path matrix.  A lower bound for the C*-norm that is exact on the span of
/// words of length ≤ depth.
pub fn truncation_norm(p: &AlgebraElement, depth: usize) -> Result<f64, AlgebraError> {
    Ok(path_matrix(p, depth)?.truncation_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coef::Coef;
    use crate::scalar::Rational;

    fn word(s: &str, d: usize) -> Word {
        Word::parse(s, d).unwrap()
    }

    fn mono(d: usize, mu: &str, nu: &str) -> AlgebraElement {
        AlgebraElement::monomial(d, word(mu, d), word(nu, d), Coef::one())
    }

    #[test]
    fn identity_expands_to_the_diagonal() {
        let one = AlgebraElement::one(2);
        let m = path_matrix(&one, 3).unwrap();
        let blocks: Vec<_> = m.blocks().collect();
        assert_eq!(blocks.len(), 1);
        let (degree, entries) = blocks[0];
        assert_eq!(degree, 0);
        assert_eq!(entries.len(), 8);
        for ((row, col), coef) in entries {
            assert_eq!(row, col);
            assert_eq!(coef, &Coef::one());
        }
        assert!((m.truncation_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn range_projection_is_a_diagonal_idempotent() {
        // S₁S₁* at depth 1 for d=2 keeps e₁ and kills e₂: diag(1, 0).
        let p = mono(2, "1", "1");
        let m = path_matrix(&p, 1).unwrap();
        assert_eq!(m.entry(&word("1", 2), &word("1", 2)), Some(&Coef::one()));
        assert_eq!(m.entry(&word("2", 2), &word("2", 2)), None);
        assert!((m.truncation_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generators_land_in_the_degree_one_block() {
        let s1 = AlgebraElement::generator(2, 1).unwrap();
        let m = path_matrix(&s1, 2).unwrap();
        let blocks: Vec<_> = m.blocks().collect();
        assert_eq!(blocks.len(), 1);
        let (degree, entries) = blocks[0];
        assert_eq!(degree, 1);
        assert_eq!(entries.len(), 4);
        for ((row, col), _) in entries {
            assert_eq!(row.len(), 3);
            assert_eq!(col.len(), 2);
            assert_eq!(row.letter(0), 1);
            assert_eq!(row.strip_prefix(&word("1", 2)).unwrap(), *col);
        }
        assert!((m.truncation_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalized_shift_is_an_isometry_in_norm() {
        for d in 1..=3 {
            let shat = AlgebraElement::normalized_shift(d);
            let m = path_matrix(&shat, 2).unwrap();
            assert!(
                (m.truncation_norm() - 1.0).abs() < 1e-12,
                "d = {d}: norm {}",
                m.truncation_norm()
            );
        }
    }

    #[test]
    fn left_multiply_matches_the_word_rule_product() {
        // Mixed-degree pair: p = S₁ (degree +1), q = S₂S₁₂* (degree −1).
        let p = AlgebraElement::generator(2, 1).unwrap();
        let q = mono(2, "2", "12");
        let depth = p.max_word_len() + q.max_word_len();
        let direct = path_matrix(&p.multiply(&q).unwrap(), depth).unwrap();
        let via_matrix = path_matrix(&q, depth).unwrap().left_multiply(&p).unwrap();
        assert_eq!(direct, via_matrix);

        // A pair whose product is zero.
        let a = mono(2, "1", "2");
        let b = mono(2, "1", "1");
        let product = a.multiply(&b).unwrap();
        assert!(product.is_syntactically_zero());
        let via = path_matrix(&b, 2).unwrap().left_multiply(&a).unwrap();
        assert!(via.is_zero());
    }

    #[test]
    fn refine_leaves_the_path_matrix_unchanged() {
        let p = mono(3, "1", "23")
            .add(&mono(3, "31", "2").scale(&Coef::from_ratio(2, 5)))
            .unwrap();
        let direct = path_matrix(&p, 4).unwrap();
        let refined = path_matrix(&p.refine(3), 4).unwrap();
        assert_eq!(direct, refined);
    }

    #[test]
    fn cuntz_sum_collapses_to_the_identity_matrix() {
        // Σᵢ SᵢSᵢ* entries accumulate across terms into the diagonal.
        let d = 2;
        let mut sum = AlgebraElement::zero(d);
        for i in 1..=d {
            let s = AlgebraElement::generator(d, i).unwrap();
            sum = sum.add(&s.multiply(&s.adjoint()).unwrap()).unwrap();
        }
        let m = path_matrix(&sum, 2).unwrap();
        let one = path_matrix(&AlgebraElement::one(d), 2).unwrap();
        assert_eq!(m, one);
    }

    #[test]
    fn depth_below_the_longest_word_is_rejected() {
        let p = mono(2, "1", "21");
        match path_matrix(&p, 1) {
            Err(AlgebraError::DepthTooSmall { required, got }) => {
                assert_eq!(required, 2);
                assert_eq!(got, 1);
            }
            other => panic!("expected DepthTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn gauge_rotation_preserves_the_truncation_norm() {
        let p = mono(2, "12", "1")
            .add(&mono(2, "2", "21").scale(&Coef::from_ratio(-3, 7)))
            .unwrap();
        let turns = Rational::new(1.into(), 3.into());
        let n0 = truncation_norm(&p, 3).unwrap();
        let n1 = truncation_norm(&p.gauge(&turns), 3).unwrap();
        assert!((n0 - n1).abs() < 1e-12);
    }
}
