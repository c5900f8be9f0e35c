//! Coordinate fields defined by expressions, and the traits through which
//! derived presentations hand out their jets.

use std::sync::Arc;

use jetcalc::{Expr, Jet, JetSpace, OrderSpec};

use crate::error::GeometryError;

/// Largest supported chart dimension.
pub const MAX_DIM: usize = 6;

/// Anything that yields the jets of a symmetric `(0,2)` tensor field.
pub trait MetricSource: Sync {
    fn dim(&self) -> usize;
    /// Row-major `n × n` jets in `n` variables, complete to total `order`.
    fn metric_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError>;
}

/// Anything that yields the jets of a vector field.
pub trait VectorSource: Sync {
    fn dim(&self) -> usize;
    fn vector_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError>;
}

pub(crate) fn space(n: usize, order: u8) -> Arc<JetSpace> {
    JetSpace::get(&OrderSpec::total(n, order))
}

fn check_dim(n: usize) -> Result<(), GeometryError> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(GeometryError::UnsupportedDimension(n))
    }
}

fn check_point(n: usize, x: &[f64]) -> Result<(), GeometryError> {
    if x.len() == n {
        Ok(())
    } else {
        Err(GeometryError::Dimension { expected: n, found: x.len() })
    }
}

/// A symmetric matrix of expressions `h_ij(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    n: usize,
    entries: Vec<Expr>,
}

impl MetricField {
    /// Builds from row-major entries; the matrix must be symmetric as written.
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<Self, GeometryError> {
        check_dim(n)?;
        if entries.len() != n * n {
            return Err(GeometryError::Dimension { expected: n * n, found: entries.len() });
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(GeometryError::Asymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(MetricField { n, entries })
    }

    pub fn diagonal(diag: Vec<Expr>) -> Result<Self, GeometryError> {
        let n = diag.len();
        let mut entries = vec![Expr::num(0.0); n * n];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i * n + i] = d;
        }
        MetricField::new(n, entries)
    }

    pub fn euclidean(n: usize) -> Self {
        MetricField::diagonal(vec![Expr::num(1.0); n]).expect("valid dimension")
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.n + j]
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        check_point(self.n, x)?;
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.entry(i, j).eval(x).map_err(|e| GeometryError::eval(format!("h{}{}", i + 1, j + 1), e))?;
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        Ok(out)
    }
}

impl MetricSource for MetricField {
    fn dim(&self) -> usize {
        self.n
    }

    fn metric_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError> {
        check_point(self.n, x)?;
        let n = self.n;
        let sp = space(n, order);
        let mut out = vec![Jet::zero(&sp); n * n];
        for i in 0..n {
            for j in i..n {
                let e = self.entry(i, j);
                let v = e.eval_jet_in(x, &sp).map_err(|err| GeometryError::eval(format!("h{}{}", i + 1, j + 1), err))?;
                out[j * n + i] = v.clone();
                out[i * n + j] = v;
            }
        }
        Ok(out)
    }
}

/// Components `W^i(x)` of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Result<Self, GeometryError> {
        check_dim(components.len())?;
        Ok(VectorField { components })
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        eval_all(&self.components, x, "W")
    }
}

impl VectorSource for VectorField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn vector_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError> {
        jets_all(&self.components, x, order, "W")
    }
}

/// Components `b_i(x)` of a one-form.
#[derive(Clone, Debug, PartialEq)]
pub struct CovectorField {
    components: Vec<Expr>,
}

impl CovectorField {
    pub fn new(components: Vec<Expr>) -> Result<Self, GeometryError> {
        check_dim(components.len())?;
        Ok(CovectorField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        eval_all(&self.components, x, "b")
    }

    pub fn jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError> {
        jets_all(&self.components, x, order, "b")
    }
}

fn eval_all(exprs: &[Expr], x: &[f64], label: &str) -> Result<Vec<f64>, GeometryError> {
    check_point(exprs.len(), x)?;
    exprs.iter().enumerate().map(|(i, e)| e.eval(x).map_err(|err| GeometryError::eval(format!("{label}{}", i + 1), err))).collect()
}

fn jets_all(exprs: &[Expr], x: &[f64], order: u8, label: &str) -> Result<Vec<Jet>, GeometryError> {
    check_point(exprs.len(), x)?;
    let sp = space(exprs.len(), order);
    exprs.iter().enumerate().map(|(i, e)| e.eval_jet_in(x, &sp).map_err(|err| GeometryError::eval(format!("{label}{}", i + 1), err))).collect()
}
