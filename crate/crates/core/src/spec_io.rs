//! Loading systems from JSON descriptors and exporting point clouds as CSV.
//!
//! A system file looks like
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "maps": [
//!     { "matrix": [["1/3"]], "offset": ["0"] },
//!     { "matrix": [["1/3"]], "offset": ["2/3"] }
//!   ],
//!   "left_inverse": { "pieces": [
//!     { "lower": ["0"], "upper": ["1"], "matrix": [["3"]], "offset": ["0"] }
//!   ] }
//! }
//! ```
//!
//! Scalar entries are exact rationals written `"p/q"` (or `"p"`), or plain
//! JSON numbers, which are taken at their exact binary value.  The built-in
//! names (`CANTOR3`, `HALVES`, `TENTINV`, `SIERP`) load without a file.

use crate::builtins::{builtin_system, BuiltinSystem, BUILTIN_NAMES};
use crate::cloud::PointCloud;
use crate::exact::{parse_rational, rational_from_f64};
use crate::ifs::{AffineContraction, Ifs, IfsError};
use crate::linalg::{AffineMap, Mat};
use crate::piecewise::{Piece, PiecewiseAffineMap};
use crate::report::format_float;
use crate::scalar::Rational;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecIoError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("invalid system file: {0}")]
    Json(String),
    #[error("invalid scalar entry: {0}")]
    BadScalar(String),
    #[error("invalid system shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

/// A parsed system descriptor: the maps plus the optional left inverse.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub name: String,
    pub system: Ifs<Rational>,
    pub left_inverse: Option<PiecewiseAffineMap<Rational>>,
}

impl From<BuiltinSystem> for SystemSpec {
    fn from(b: BuiltinSystem) -> Self {
        SystemSpec {
            name: b.name.to_string(),
            system: b.system,
            left_inverse: b.left_inverse,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Num(f64),
    Text(String),
}

#[derive(Deserialize)]
struct RawAffine {
    matrix: Vec<Vec<RawScalar>>,
    offset: Vec<RawScalar>,
}

#[derive(Deserialize)]
struct RawPiece {
    lower: Vec<RawScalar>,
    upper: Vec<RawScalar>,
    matrix: Vec<Vec<RawScalar>>,
    offset: Vec<RawScalar>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    pieces: Vec<RawPiece>,
}

#[derive(Deserialize)]
struct RawSystem {
    dimension: usize,
    maps: Vec<RawAffine>,
    #[serde(default)]
    left_inverse: Option<RawPiecewise>,
}

fn scalar(raw: &RawScalar) -> Result<Rational, SpecIoError> {
    match raw {
        RawScalar::Num(x) => {
            rational_from_f64(*x).ok_or_else(|| SpecIoError::BadScalar(format!("{x}")))
        }
        RawScalar::Text(s) => parse_rational(s).ok_or_else(|| SpecIoError::BadScalar(s.clone())),
    }
}

fn vector(raw: &[RawScalar], dimension: usize, what: &str) -> Result<Vec<Rational>, SpecIoError> {
    if raw.len() != dimension {
        return Err(SpecIoError::Shape(format!(
            "{what} has {} entries, expected {dimension}",
            raw.len()
        )));
    }
    raw.iter().map(scalar).collect()
}

fn matrix(raw: &[Vec<RawScalar>], dimension: usize) -> Result<Mat<Rational>, SpecIoError> {
    if raw.len() != dimension {
        return Err(SpecIoError::Shape(format!(
            "matrix has {} rows, expected {dimension}",
            raw.len()
        )));
    }
    let rows = raw
        .iter()
        .map(|row| vector(row, dimension, "matrix row"))
        .collect::<Result<Vec<_>, _>>()?;
    Mat::from_rows(rows).ok_or_else(|| SpecIoError::Shape("ragged matrix".to_string()))
}

/// Parses a system descriptor from JSON text.
pub fn parse_system_json(name: &str, text: &str) -> Result<SystemSpec, SpecIoError> {
    let raw: RawSystem =
        serde_json::from_str(text).map_err(|e| SpecIoError::Json(e.to_string()))?;
    if raw.dimension == 0 {
        return Err(SpecIoError::Shape("dimension must be positive".to_string()));
    }
    let maps = raw
        .maps
        .iter()
        .map(|m| {
            let mat = matrix(&m.matrix, raw.dimension)?;
            let offset = vector(&m.offset, raw.dimension, "offset")?;
            AffineContraction::new(mat, offset).map_err(SpecIoError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let system = Ifs::new(maps)?;
    let left_inverse = match &raw.left_inverse {
        None => None,
        Some(pw) => {
            let pieces = pw
                .pieces
                .iter()
                .map(|p| {
                    Ok(Piece {
                        lower: vector(&p.lower, raw.dimension, "piece lower bound")?,
                        upper: vector(&p.upper, raw.dimension, "piece upper bound")?,
                        map: AffineMap::new(
                            matrix(&p.matrix, raw.dimension)?,
                            vector(&p.offset, raw.dimension, "piece offset")?,
                        )
                        .ok_or_else(|| {
                            SpecIoError::Shape("piece map shape mismatch".to_string())
                        })?,
                    })
                })
                .collect::<Result<Vec<_>, SpecIoError>>()?;
            Some(PiecewiseAffineMap::new(pieces).ok_or_else(|| {
                SpecIoError::Shape("left_inverse needs at least one piece".to_string())
            })?)
        }
    };
    Ok(SystemSpec {
        name: name.to_string(),
        system,
        left_inverse,
    })
}

/// Loads a system by built-in name (case-insensitive) or from a JSON file.
pub fn load_system(name_or_path: &str) -> Result<SystemSpec, SpecIoError> {
    if let Some(builtin) = builtin_system(name_or_path) {
        return Ok(builtin.into());
    }
    let text = std::fs::read_to_string(name_or_path).map_err(|e| SpecIoError::Io {
        path: name_or_path.to_string(),
        reason: e.to_string(),
    })?;
    let stem = std::path::Path::new(name_or_path)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(name_or_path);
    parse_system_json(stem, &text)
}

/// Names accepted by [`load_system`] without a file.
pub fn builtin_names() -> &'static [&'static str] {
    &BUILTIN_NAMES
}

/// Renders a cloud as CSV with header `x0,x1,…` and 15-significant-digit
/// coordinates, in cloud order.
pub fn cloud_to_csv(cloud: &PointCloud<f64>) -> String {
    let dim = cloud.dimension();
    let mut out = String::new();
    let header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for p in &cloud.points {
        let row: Vec<String> = p.iter().map(|&v| format_float(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
