//! Error type shared by the whole crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown variable `{name}` at byte {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("index out of range for chart: {0}")]
    IndexOutOfRange(String),
    #[error("ambient arity mismatch: {0} vs {1}")]
    ArityMismatch(u16, u16),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("jet order {needed} exceeds cap {cap}")]
    OrderCap { needed: usize, cap: usize },
    #[error("division by zero while evaluating {0}")]
    DivisionByZero(String),
    #[error("variable `{0}` has no assigned value")]
    Unassigned(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("velocity jet is not regular: {0}")]
    NotRegular(String),
    #[error("Lagrangian is not homogeneous")]
    NotHomogeneous,
    #[error("equation fails the homogeneity conditions: {0}")]
    NotHomogeneousEquation(String),
    #[error("expected a first-order Lagrangian, found order {0}")]
    NotFirstOrder(usize),
    #[error("form is not horizontal")]
    NotHorizontal,
    #[error("cannot evaluate: {0}")]
    Unevaluable(String),
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
