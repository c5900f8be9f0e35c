//! Dense linear algebra over jets (row-major square matrices, n ≤ 6).

use crate::error::JetError;
use crate::jet::Jet;

/// Solves `A X = B` for several right-hand sides by Gaussian elimination
/// with partial pivoting on the constant terms.
pub fn solve(a: &[Jet], n: usize, rhs: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>, JetError> {
    assert_eq!(a.len(), n * n);
    let mut m: Vec<Jet> = a.to_vec();
    let mut b: Vec<Vec<Jet>> = rhs.to_vec();
    for col in b.iter() {
        assert_eq!(col.len(), n);
    }
    let scale = a.iter().map(|j| j.value().abs()).fold(0.0, f64::max);
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| m[i * n + k].value().abs().total_cmp(&m[j * n + k].value().abs())).unwrap();
        let pv = m[piv * n + k].value();
        if pv.abs() <= f64::EPSILON * scale * n as f64 || pv == 0.0 {
            return Err(JetError::Singular { pivot: pv });
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            for col in b.iter_mut() {
                col.swap(k, piv);
            }
        }
        let inv = m[k * n + k].recip()?;
        for i in k + 1..n {
            let factor = &m[i * n + k] * &inv;
            if factor.coeffs().iter().all(|&c| c == 0.0) {
                continue;
            }
            for c in k..n {
                let t = &factor * &m[k * n + c];
                m[i * n + c] = &m[i * n + c] - &t;
            }
            for col in b.iter_mut() {
                let t = &factor * &col[k];
                col[i] = &col[i] - &t;
            }
        }
    }
    let mut out = Vec::with_capacity(b.len());
    for col in b {
        let mut x: Vec<Jet> = col;
        for k in (0..n).rev() {
            let mut acc = x[k].clone();
            for c in k + 1..n {
                acc = &acc - &(&m[k * n + c] * &x[c]);
            }
            x[k] = acc.div(&m[k * n + k])?;
        }
        out.push(x);
    }
    Ok(out)
}

/// Inverse of a jet matrix, row-major.
pub fn inverse(a: &[Jet], n: usize) -> Result<Vec<Jet>, JetError> {
    let space = a[0].space().clone();
    let cols: Vec<Vec<Jet>> = (0..n).map(|j| (0..n).map(|i| Jet::constant(&space, if i == j { 1.0 } else { 0.0 })).collect()).collect();
    let sol = solve(a, n, &cols)?;
    let mut inv = vec![Jet::zero(&space); n * n];
    for (j, col) in sol.into_iter().enumerate() {
        for (i, v) in col.into_iter().enumerate() {
            inv[i * n + j] = v;
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{JetSpace, OrderSpec};

    #[test]
    fn inverse_times_matrix_is_identity() {
        let s = JetSpace::get(&OrderSpec::total(2, 3));
        let x = Jet::variable(&s, 0, 0.3);
        let y = Jet::variable(&s, 1, -0.4);
        let a = vec![x.exp(), (&x * &y).add_scalar(0.1), (&x * &y).add_scalar(0.1), y.cos().add_scalar(1.0)];
        let inv = inverse(&a, 2).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Jet::zero(&s);
                for k in 0..2 {
                    acc.add_product(&a[i * 2 + k], &inv[k * 2 + j]);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value() - expect).abs() < 1e-14);
                assert!(acc.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn singular_is_reported() {
        let s = JetSpace::get(&OrderSpec::total(1, 1));
        let one = Jet::constant(&s, 1.0);
        let a = vec![one.clone(), one.clone(), one.clone(), one];
        assert!(matches!(inverse(&a, 2), Err(JetError::Singular { .. })));
    }
}
