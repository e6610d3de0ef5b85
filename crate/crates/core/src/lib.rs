//! Coordinate engine for statistical manifolds and statistical submersions.
//!
//! Fields are described by [`expr::Expression`]s over a single chart and
//! differentiated exactly through jets. On top of that the crate computes
//! dual connections, curvature, O'Neill tensors, fiber geometry, curvature
//! inequalities and Ricci–Bourguignon soliton diagnostics.

pub mod builtins;
pub mod error;
pub mod expr;
pub mod families;
pub mod geometry;
pub mod inequalities;
pub mod linalg;
pub mod manifest;
pub mod report;
pub mod scalar;
pub mod solitons;
pub mod submersion;
pub mod taylor;

pub use error::{EvalError, ExprError, ManifestError, NumericError};
pub use expr::{parse, Expression, Jet2};
pub use scalar::Scalar;
pub use taylor::Taylor;
