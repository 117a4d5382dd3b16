//! Bakry-Emery curvature, heat semigroups and a modified heat equation on
//! weighted graphs.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

// `!(a < b)` is deliberate: NaN must take the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curvature;
pub mod error;
pub mod function;
pub mod geometry;
pub mod graph;
pub mod linalg;
pub mod modified_heat;
pub mod operators;
pub mod report;
pub mod scalar;
pub mod semigroup;
pub mod tolerance;

pub use error::{CurvatureError, GeometryError, GraphError, LinalgError, OperatorError, SemigroupError, SolveError};
pub use scalar::Scalar;

pub type Graph = graph::WeightedGraph<f64>;
pub type LocalForms = operators::LocalFormBundle<f64>;
pub type CurvatureProfile = curvature::CurvatureProfile<f64>;
pub type SolveConfig = modified_heat::SolveConfig<f64>;
pub type SolveTrace = modified_heat::SolveTrace<f64>;
pub type VolumeProfile = geometry::VolumeProfile<f64>;
