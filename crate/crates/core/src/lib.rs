//! Partial-identification anomaly detection.
//!
//! Points are scored by the sparsity of the emptiest axis-aligned box that
//! contains them. [`Forest`] approximates that score with an ensemble of
//! partition trees whose splits maximize the variance of sparsity; the
//! [`oracle`] module computes it exactly on small inputs.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64` for the common case.

pub mod baseline;
pub mod data;
pub mod domain;
pub mod error;
pub mod eval;
pub mod forest;
pub mod oracle;
pub mod scalar;
pub mod split;

pub use domain::{
    normalize, sparsity, AttributeSpec, ColumnKind, ColumnTransform, CoordKind, Dataset, Interval,
    NormalizationTransform, NormalizedData, Subcube,
};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use forest::{Forest, HyperParams, ScoreMode, ScoreReport};

pub type Forest64 = Forest<f64>;
pub type Forest32 = Forest<f32>;
pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
