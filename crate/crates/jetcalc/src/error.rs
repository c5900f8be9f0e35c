use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("{op} undefined at value {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("singular matrix (pivot {pivot:e})")]
    Singular { pivot: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier { name: String, line: usize, column: usize },
    #[error("`{function}` takes {expected} argument(s), got {found} (line {line}, column {column})")]
    Arity { function: String, expected: usize, found: usize, line: usize, column: usize },
}

impl ParseError {
    /// 1-based (line, column) of the offending token.
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::Syntax { line, column, .. } | ParseError::UnknownIdentifier { line, column, .. } | ParseError::Arity { line, column, .. } => {
                (*line, *column)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{expr}` at {point:?}: {op} undefined at value {value}")]
    Domain { expr: String, point: Vec<f64>, op: &'static str, value: f64 },
    #[error("expression uses x{var} but the point has {dim} coordinate(s)")]
    Dimension { var: usize, dim: usize },
}
