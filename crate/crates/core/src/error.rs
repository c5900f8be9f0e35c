use jetcalc::{EvalError, JetError};
use thiserror::Error;

/// Failures of the geometric computations. Points are chart coordinates.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("{field}: {source}")]
    Eval {
        field: String,
        #[source]
        source: EvalError,
    },
    #[error("{what} is not positive definite at {}", fmt_point(point))]
    NotPositiveDefinite { what: &'static str, point: Vec<f64> },
    #[error("{what} is ill-conditioned at {} (condition number {cond:e})", fmt_point(point))]
    IllConditioned { what: &'static str, cond: f64, point: Vec<f64> },
    #[error("singular {what} at {}", fmt_point(point))]
    Singular { what: &'static str, point: Vec<f64> },
    #[error("conic-domain violation at {}: W_0 = {w0}", fmt_point(point))]
    ConicViolation { w0: f64, point: Vec<f64> },
    #[error("unit-length violation at {}: |W|={norm}", fmt_point(point))]
    UnitLength { norm: f64, point: Vec<f64> },
    #[error("one-form vanishes at {}: b^2 = {b2}", fmt_point(point))]
    VanishingOneForm { b2: f64, point: Vec<f64> },
    #[error("inconsistent conformal factor at {}: e^kappa b^2 = {product}", fmt_point(point))]
    ConformalFactor { product: f64, point: Vec<f64> },
    #[error("presentations are not linked at {}: {detail}", fmt_point(point))]
    MismatchedPair { detail: String, point: Vec<f64> },
    #[error("{what} undefined at {}: {detail}", fmt_point(point))]
    Numeric { what: &'static str, detail: String, point: Vec<f64> },
    #[error("metric entries ({i}, {j}) and ({j}, {i}) differ")]
    Asymmetric { i: usize, j: usize },
    #[error("degenerate flag: transverse vector is parallel to the flagpole")]
    DegenerateFlag,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("dimension {0} outside the supported range 2..=6")]
    UnsupportedDimension(usize),
}

impl GeometryError {
    pub(crate) fn eval(field: impl Into<String>, source: EvalError) -> Self {
        GeometryError::Eval { field: field.into(), source }
    }

    pub(crate) fn from_jet(what: &'static str, e: JetError, point: &[f64]) -> Self {
        match e {
            JetError::Singular { .. } => GeometryError::Singular { what, point: point.to_vec() },
            e @ JetError::Domain { .. } => GeometryError::Numeric { what, detail: e.to_string(), point: point.to_vec() },
        }
    }
}

/// Formats a point as `(a, b, c)` using the shortest round-trip form.
pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}
