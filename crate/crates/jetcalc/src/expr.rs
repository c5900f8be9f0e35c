use std::fmt;
use std::ops;
use std::sync::Arc;

use crate::error::{EvalError, JetError};
use crate::jet::{Jet, JetSpace, OrderSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 7] = [Func::Sin, Func::Cos, Func::Tan, Func::Exp, Func::Log, Func::Sqrt, Func::Atan];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Sign of a summand.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddOp {
    Plus,
    Minus,
}

/// Role of a factor in a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MulOp {
    Times,
    Over,
}

/// Expression tree over coordinates `x1..xn`.
///
/// Sums and products are n-ary, mirroring the grammar's repetition; the
/// first operand of either always carries `Plus` / `Times`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index (`x1` is `Var(0)`).
    Var(usize),
    Neg(Box<Expr>),
    Sum(Vec<(AddOp, Expr)>),
    Product(Vec<(MulOp, Expr)>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn powi(self, p: i32) -> Expr {
        Expr::Pow(Box::new(self), p)
    }

    /// Height of the tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 0,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => 1 + e.depth(),
            Expr::Sum(ts) => 1 + ts.iter().map(|(_, e)| e.depth()).max().unwrap_or(0),
            Expr::Product(fs) => 1 + fs.iter().map(|(_, e)| e.depth()).max().unwrap_or(0),
        }
    }

    /// Largest coordinate index used plus one (0 for constants).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.arity(),
            Expr::Sum(ts) => ts.iter().map(|(_, e)| e.arity()).max().unwrap_or(0),
            Expr::Product(fs) => fs.iter().map(|(_, e)| e.arity()).max().unwrap_or(0),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Plain floating-point evaluation.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.check_dim(x)?;
        self.eval_f64(x)
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), EvalError> {
        let need = self.arity();
        if need > x.len() {
            return Err(EvalError::Dimension { var: need, dim: x.len() });
        }
        Ok(())
    }

    fn domain(&self, x: &[f64], op: &'static str, value: f64) -> EvalError {
        EvalError::Domain { expr: self.to_string(), point: x.to_vec(), op, value }
    }

    fn eval_f64(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x[*i],
            Expr::Neg(e) => -e.eval_f64(x)?,
            Expr::Sum(ts) => {
                let mut acc = 0.0;
                for (op, e) in ts {
                    let v = e.eval_f64(x)?;
                    match op {
                        AddOp::Plus => acc += v,
                        AddOp::Minus => acc -= v,
                    }
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = 1.0;
                for (op, e) in fs {
                    let v = e.eval_f64(x)?;
                    match op {
                        MulOp::Times => acc *= v,
                        MulOp::Over => {
                            if v == 0.0 {
                                return Err(self.domain(x, "division", v));
                            }
                            acc /= v
                        }
                    }
                }
                acc
            }
            Expr::Pow(e, p) => {
                let v = e.eval_f64(x)?;
                if *p < 0 && v == 0.0 {
                    return Err(self.domain(x, "negative power", v));
                }
                v.powi(*p)
            }
            Expr::Call(f, e) => {
                let v = e.eval_f64(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Atan => v.atan(),
                    Func::Tan => {
                        if v.cos() == 0.0 {
                            return Err(self.domain(x, "tan", v));
                        }
                        v.tan()
                    }
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(self.domain(x, "log", v));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(self.domain(x, "sqrt", v));
                        }
                        v.sqrt()
                    }
                }
            }
        })
    }

    /// Taylor jet of the expression at `x` over the index set `orders`.
    /// Coordinate `x_i` is jet variable `i`; `orders` may carry extra
    /// variables, which the expression does not depend on.
    pub fn eval_jet(&self, x: &[f64], orders: &OrderSpec) -> Result<Jet, EvalError> {
        let space = JetSpace::get(orders);
        self.eval_jet_in(x, &space)
    }

    pub fn eval_jet_in(&self, x: &[f64], space: &Arc<JetSpace>) -> Result<Jet, EvalError> {
        self.check_dim(x)?;
        assert!(x.len() <= space.nvars(), "point has more coordinates than jet variables");
        self.jet_rec(x, space)
    }

    fn jet_rec(&self, x: &[f64], space: &Arc<JetSpace>) -> Result<Jet, EvalError> {
        let wrap = |e: JetError| match e {
            JetError::Domain { op, value } => self.domain(x, op, value),
            JetError::Singular { pivot } => self.domain(x, "division", pivot),
        };
        Ok(match self {
            Expr::Num(v) => Jet::constant(space, *v),
            Expr::Var(i) => Jet::variable(space, *i, x[*i]),
            Expr::Neg(e) => -e.jet_rec(x, space)?,
            Expr::Sum(ts) => {
                let mut acc = Jet::zero(space);
                for (op, e) in ts {
                    let v = e.jet_rec(x, space)?;
                    match op {
                        AddOp::Plus => acc += &v,
                        AddOp::Minus => acc = acc - v,
                    }
                }
                acc
            }
            Expr::Product(fs) => {
                let mut acc = Jet::constant(space, 1.0);
                for (op, e) in fs {
                    let v = e.jet_rec(x, space)?;
                    acc = match op {
                        MulOp::Times => acc * v,
                        MulOp::Over => acc * v.recip().map_err(wrap)?,
                    };
                }
                acc
            }
            Expr::Pow(e, p) => e.jet_rec(x, space)?.powi(*p).map_err(wrap)?,
            Expr::Call(f, e) => {
                let v = e.jet_rec(x, space)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Atan => v.atan(),
                    Func::Tan => v.tan().map_err(wrap)?,
                    Func::Log => v.ln().map_err(wrap)?,
                    Func::Sqrt => v.sqrt().map_err(wrap)?,
                }
            }
        })
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{})", -v)
    } else {
        write!(f, "{v}")
    }
}

/// Prints a form that parses back to the same tree: every sum and product
/// is parenthesised, so nesting survives the round trip.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => fmt_num(*v, f),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Sum(ts) => {
                write!(f, "(")?;
                for (k, (op, e)) in ts.iter().enumerate() {
                    match (k, op) {
                        (0, _) => write!(f, "{e}")?,
                        (_, AddOp::Plus) => write!(f, " + {e}")?,
                        (_, AddOp::Minus) => write!(f, " - {e}")?,
                    }
                }
                write!(f, ")")
            }
            Expr::Product(fs) => {
                write!(f, "(")?;
                for (k, (op, e)) in fs.iter().enumerate() {
                    match (k, op) {
                        (0, _) => write!(f, "{e}")?,
                        (_, MulOp::Times) => write!(f, "*{e}")?,
                        (_, MulOp::Over) => write!(f, "/{e}")?,
                    }
                }
                write!(f, ")")
            }
            Expr::Pow(e, p) => match **e {
                Expr::Pow(..) => write!(f, "({e})^{p}"),
                _ => write!(f, "{e}^{p}"),
            },
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![(AddOp::Plus, self), (AddOp::Plus, rhs)])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(vec![(AddOp::Plus, self), (AddOp::Minus, rhs)])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Product(vec![(MulOp::Times, self), (MulOp::Times, rhs)])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Product(vec![(MulOp::Times, self), (MulOp::Over, rhs)])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_and_display() {
        let e = (Expr::var(0) + Expr::num(1.0)) * Expr::call(Func::Sin, Expr::var(1)).powi(2);
        assert_eq!(e.to_string(), "((x1 + 1)*sin(x2)^2)");
        assert_eq!(e.arity(), 2);
        let v = e.eval(&[1.0, std::f64::consts::FRAC_PI_2]).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn negative_literal_prints_parenthesised() {
        assert_eq!(Expr::num(-2.5).to_string(), "(-2.5)");
    }

    #[test]
    fn domain_error_names_subexpression() {
        let e = Expr::var(0) + Expr::call(Func::Log, Expr::var(1));
        let err = e.eval(&[1.0, -1.0]).unwrap_err();
        match err {
            EvalError::Domain { expr, point, op, .. } => {
                assert_eq!(expr, "log(x2)");
                assert_eq!(point, vec![1.0, -1.0]);
                assert_eq!(op, "log");
            }
            other => panic!("unexpected {other:?}"),
        }
        let jet_err = e.eval_jet(&[1.0, -1.0], &OrderSpec::total(2, 2)).unwrap_err();
        assert!(matches!(jet_err, EvalError::Domain { ref expr, .. } if expr == "log(x2)"));
    }

    #[test]
    fn dimension_is_checked() {
        let e = Expr::var(2);
        assert!(matches!(e.eval(&[0.0, 1.0]), Err(EvalError::Dimension { var: 3, dim: 2 })));
    }
}
