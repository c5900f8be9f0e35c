//! Coordinate-expression DSL with exact partial derivatives.
//!
//! Expressions over `x1..xn` are parsed with [`parse`] and evaluated either
//! as plain floats ([`Expr::eval`]) or as truncated multivariate Taylor
//! jets ([`Expr::eval_jet`]) carrying every partial derivative up to the
//! orders described by an [`OrderSpec`].

pub mod error;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod parser;
mod series;

pub use error::{EvalError, JetError, ParseError};
pub use expr::{AddOp, Expr, Func, MulOp};
pub use jet::{Jet, JetSpace, OrderSpec, VarGroup};
pub use parser::parse;

#[cfg(any(test, feature = "testing"))]
pub mod testing;
