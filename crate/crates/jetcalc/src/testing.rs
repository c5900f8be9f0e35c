//! Test support: random smooth expressions and a finite-difference oracle
//! that only uses plain floating-point evaluation.

use crate::expr::{AddOp, Expr, Func, MulOp};

/// Draws a random expression in `dim` coordinates from polynomial and
/// trigonometric building blocks that stay smooth and moderate on `[-1, 1]^dim`.
/// `uniform` must return samples in `[0, 1)`.
pub fn random_expr(dim: usize, depth: usize, uniform: &mut dyn FnMut() -> f64) -> Expr {
    let leaf = |u: &mut dyn FnMut() -> f64| {
        if u() < 0.7 {
            Expr::Var(((u() * dim as f64) as usize).min(dim - 1))
        } else {
            Expr::Num(((u() * 4.0 - 2.0) * 100.0).round() / 100.0)
        }
    };
    if depth == 0 || uniform() < 0.2 {
        return leaf(uniform);
    }
    let pick = (uniform() * 10.0) as usize;
    let sub = |u: &mut dyn FnMut() -> f64| random_expr(dim, depth - 1, u);
    match pick {
        0 => Expr::Sum(vec![(AddOp::Plus, sub(uniform)), (AddOp::Plus, sub(uniform))]),
        1 => Expr::Sum(vec![(AddOp::Plus, sub(uniform)), (AddOp::Minus, sub(uniform)), (AddOp::Plus, leaf(uniform))]),
        2 => Expr::Product(vec![(MulOp::Times, sub(uniform)), (MulOp::Times, sub(uniform))]),
        3 => {
            // denominator bounded away from zero
            let d = Expr::Sum(vec![(AddOp::Plus, Expr::Num(1.5)), (AddOp::Plus, Expr::Pow(Box::new(sub(uniform)), 2))]);
            Expr::Product(vec![(MulOp::Times, sub(uniform)), (MulOp::Over, d)])
        }
        4 => Expr::Pow(Box::new(sub(uniform)), 2 + (uniform() * 2.0) as i32),
        5 => Expr::Call(Func::Sin, Box::new(sub(uniform))),
        6 => Expr::Call(Func::Cos, Box::new(sub(uniform))),
        7 => Expr::Call(Func::Exp, Box::new(Expr::Call(Func::Sin, Box::new(sub(uniform))))),
        8 => Expr::Call(Func::Atan, Box::new(sub(uniform))),
        _ => Expr::Neg(Box::new(sub(uniform))),
    }
}

/// Tensor-product central difference of `f` at `x` for the listed variables
/// (repeats allowed) with step `h`. Error expands in even powers of `h`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], vars: &[usize], h: f64) -> f64 {
    let k = vars.len();
    if k == 0 {
        return f(x);
    }
    let mut acc = 0.0;
    let mut p = x.to_vec();
    for mask in 0u32..(1 << k) {
        p.copy_from_slice(x);
        let mut sign = 1.0;
        for (bit, &v) in vars.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                p[v] -= h;
                sign = -sign;
            } else {
                p[v] += h;
            }
        }
        acc += sign * f(&p);
    }
    acc / (2.0 * h).powi(k as i32)
}

/// Richardson-extrapolated central difference using steps `h0, h0/2, ...`
/// (`levels` of them), eliminating the `h², h⁴, ...` error terms.
pub fn richardson_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], vars: &[usize], h0: f64, levels: usize) -> f64 {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let h = h0 / 2f64.powi(i as i32);
        let mut row = vec![central_difference(f, x, vars, h)];
        for j in 1..=i {
            let factor = 4f64.powi(j as i32);
            let prev = &table[i - 1];
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    table[levels - 1][levels - 1]
}

/// Richardson extrapolation over a ladder of starting steps, returning the
/// estimate whose neighbour on the ladder agrees with it best. Large steps
/// lose to truncation on oscillatory functions, small ones to cancellation.
pub fn adaptive_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], vars: &[usize]) -> f64 {
    if vars.is_empty() {
        return f(x);
    }
    let estimates: Vec<f64> = (0..7).map(|m| richardson_partial(f, x, vars, 0.2 / 2f64.powi(m), 4)).collect();
    let mut best = (f64::INFINITY, estimates[0]);
    for w in estimates.windows(2) {
        let spread = (w[0] - w[1]).abs();
        if spread < best.0 {
            best = (spread, w[1]);
        }
    }
    best.1
}

/// All multisets of variables of size `1..=order`, as sorted index lists.
pub fn partial_index_lists(dim: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(dim: usize, left: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for v in start..dim {
            cur.push(v);
            rec(dim, left - 1, v, cur, out);
            cur.pop();
        }
    }
    rec(dim, order, 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_lists_count() {
        // 3 + 6 + 10 partials of order 1..3 in three variables
        assert_eq!(partial_index_lists(3, 3).len(), 19);
    }

    #[test]
    fn richardson_on_known_function() {
        let f = |p: &[f64]| (p[0] * p[1]).sin();
        let x = [0.3, 0.7];
        // ∂³/∂x0²∂x1 sin(x0 x1) = -x1 (2 sin u + u cos u), u = x0 x1
        let u: f64 = 0.21;
        let exact = -0.7 * (2.0 * u.sin() + u * u.cos());
        let approx = richardson_partial(&f, &x, &[0, 0, 1], 0.1, 4);
        assert!((approx - exact).abs() < 1e-8, "{approx} vs {exact}");
    }
}
