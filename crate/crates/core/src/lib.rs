//! Operator-algebraic computations on hyperbolic iterated function systems.
//!
//! The crate has three layers:
//!
//! * **Geometry** — certified attractor point clouds ([`cloud`]), exact
//!   symbolic coding of attractor points by words ([`codemap`]), and branch
//!   analysis locating where distinct branches collide ([`branch`],
//!   [`partition`]).
//! * **Algebra** — a finitely-truncated word algebra with exact coefficients
//!   in the rationals extended by roots of unity and `√d` ([`coef`],
//!   [`algebra`]), plus finite matrix representations for norm estimates
//!   ([`pathrep`]).
//! * **Verification** — the covariant-representation identities of the
//!   branch-graph correspondence ([`pimsner`]) and the transfer-operator /
//!   Toeplitz identities of the crossed-product view ([`exel`]), with exact
//!   residuals wherever the data is rational.
//!
//! Numeric code is generic over the scalar ([`scalar::Scalar`]): `f64`/`f32`
//! for geometry, arbitrary-precision rationals for everything whose result is
//! asserted exactly.  The aliases below fix the two concrete views used
//! throughout.

pub mod algebra;
pub mod branch;
pub mod builtins;
pub mod cloud;
pub mod codemap;
pub mod coef;
pub mod exact;
pub mod exel;
pub mod func;
pub mod ifs;
pub mod linalg;
pub mod partition;
pub mod pathrep;
pub mod piecewise;
pub mod pimsner;
pub mod report;
pub mod scalar;
pub mod spec_io;
pub mod word;

pub use crate::algebra::{AlgebraElement, AlgebraError, CuntzReport, RelationCheck};
pub use crate::branch::{BranchError, BranchReport, SeparationCheck};
pub use crate::cloud::{attractor, hausdorff_distance, self_similarity_residual, AttractorData, PointCloud};
pub use crate::codemap::{code_error_bound, code_point, coded_points, ExactIfs};
pub use crate::coef::Coef;
pub use crate::exel::{ExelError, LeftInverseReport, PointwiseReport};
pub use crate::func::{CographFunction, FnError, SampledFunction};
pub use crate::ifs::{AffineContraction, Ifs, IfsError};
pub use crate::linalg::{AffineMap, Mat};
pub use crate::partition::PartitionOfUnity;
pub use crate::piecewise::{ContinuityWarning, Piece, PiecewiseAffineMap};
pub use crate::pimsner::{CographReport, CovarianceCheck, PimsnerError};
pub use crate::scalar::{Rational, RealScalar, Scalar};
pub use crate::spec_io::{cloud_to_csv, load_system, SpecIoError, SystemSpec};
pub use crate::word::{Word, WordError};

/// Floating-point view of a system, the form the geometric layers consume.
pub type FloatIfs = Ifs<f64>;

/// Single-precision view, for memory-bound clouds.
pub type Float32Ifs = Ifs<f32>;

/// The standard double-precision point cloud.
pub type FloatCloud = PointCloud<f64>;

/// Exact affine map, as consumed by the algebraic layers.
pub type ExactMap = AffineMap<Rational>;
