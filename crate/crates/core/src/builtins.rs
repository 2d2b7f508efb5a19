//! Named example systems with exact rational data.
//!
//! * `CANTOR3` — middle-thirds Cantor system, branches `x/3` and `x/3 + 2/3`,
//!   left inverse `3x` / `3x − 2`.
//! * `HALVES`  — overlapping halves `x/2` and `x/2 + 1/2` filling `[0, 1]`,
//!   left-inverted by the (discontinuous) doubling map.
//! * `TENTINV` — inverse branches `y/2` and `1 − y/2` of the tent map, which
//!   is the continuous left inverse.
//! * `SIERP`   — three planar maps `(x + p_i)/2` toward the corners of a
//!   right triangle; no left inverse is provided.

use crate::ifs::{AffineContraction, Ifs};
use crate::linalg::{AffineMap, Mat};
use crate::piecewise::{Piece, PiecewiseAffineMap};
use crate::scalar::{Rational, Scalar};

/// A ready-made system plus, where one exists, its left inverse.
#[derive(Clone, Debug)]
pub struct BuiltinSystem {
    pub name: &'static str,
    pub system: Ifs<Rational>,
    pub left_inverse: Option<PiecewiseAffineMap<Rational>>,
}

pub const BUILTIN_NAMES: [&str; 4] = ["CANTOR3", "HALVES", "TENTINV", "SIERP"];

fn rat(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn affine_1d(a: (i64, i64), b: (i64, i64)) -> AffineMap<Rational> {
    AffineMap::new(
        Mat::from_rows(vec![vec![rat(a.0, a.1)]]).expect("1×1 matrix"),
        vec![rat(b.0, b.1)],
    )
    .expect("matching shapes")
}

fn contraction_1d(a: (i64, i64), b: (i64, i64)) -> AffineContraction<Rational> {
    let map = affine_1d(a, b);
    AffineContraction::new(map.matrix, map.offset).expect("built-in data is injective")
}

fn piece_1d(lo: (i64, i64), hi: (i64, i64), a: (i64, i64), b: (i64, i64)) -> Piece<Rational> {
    Piece {
        lower: vec![rat(lo.0, lo.1)],
        upper: vec![rat(hi.0, hi.1)],
        map: affine_1d(a, b),
    }
}

/// Look up a built-in system by (case-insensitive) name.
pub fn builtin_system(name: &str) -> Option<BuiltinSystem> {
    let canon = name.to_ascii_uppercase();
    let sys = match canon.as_str() {
        "CANTOR3" => BuiltinSystem {
            name: "CANTOR3",
            system: Ifs::new(vec![contraction_1d((1, 3), (0, 1)), contraction_1d((1, 3), (2, 3))])
                .expect("built-in data is valid"),
            left_inverse: PiecewiseAffineMap::new(vec![
                piece_1d((-1, 1), (1, 2), (3, 1), (0, 1)),
                piece_1d((1, 2), (2, 1), (3, 1), (-2, 1)),
            ]),
        },
        "HALVES" => BuiltinSystem {
            name: "HALVES",
            system: Ifs::new(vec![contraction_1d((1, 2), (0, 1)), contraction_1d((1, 2), (1, 2))])
                .expect("built-in data is valid"),
            // Upper piece first: the seam value 1/2 = γ₂(0) must map back to 0.
            left_inverse: PiecewiseAffineMap::new(vec![
                piece_1d((1, 2), (2, 1), (2, 1), (-1, 1)),
                piece_1d((-1, 1), (1, 2), (2, 1), (0, 1)),
            ]),
        },
        "TENTINV" => BuiltinSystem {
            name: "TENTINV",
            system: Ifs::new(vec![contraction_1d((1, 2), (0, 1)), contraction_1d((-1, 2), (1, 1))])
                .expect("built-in data is valid"),
            left_inverse: PiecewiseAffineMap::new(vec![
                piece_1d((-1, 1), (1, 2), (2, 1), (0, 1)),
                piece_1d((1, 2), (2, 1), (-2, 1), (2, 1)),
            ]),
        },
        "SIERP" => {
            let corners = [(0i64, 0i64), (1, 0), (0, 1)];
            let maps = corners
                .iter()
                .map(|&(px, py)| {
                    AffineContraction::new(
                        Mat::from_rows(vec![
                            vec![rat(1, 2), rat(0, 1)],
                            vec![rat(0, 1), rat(1, 2)],
                        ])
                        .expect("2×2 matrix"),
                        vec![rat(px, 2), rat(py, 2)],
                    )
                    .expect("built-in data is injective")
                })
                .collect();
            BuiltinSystem {
                name: "SIERP",
                system: Ifs::new(maps).expect("built-in data is valid"),
                left_inverse: None,
            }
        }
        _ => return None,
    };
    Some(sys)
}
