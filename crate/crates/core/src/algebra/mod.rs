//! Truncated Taylor arithmetic and vector-field evaluation.

pub mod expr;
pub mod field;
pub mod flow;
pub mod jet;
pub mod scalar;
pub mod series;
pub mod tower;

pub use expr::{Expr, FieldExpr};
pub use field::{gradient, FnField, HamiltonianField, VectorField};
pub use flow::{flow_jets, flow_taylor, lie_derivative};
pub use jet::Jet;
pub use scalar::Scalar;
pub use tower::Tower;
