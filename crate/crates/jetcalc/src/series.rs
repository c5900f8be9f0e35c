//! Univariate Taylor coefficients `f^(k)(u0) / k!` for `k = 0..=order`.

pub fn exp(u0: f64, order: usize) -> Vec<f64> {
    let e = u0.exp();
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(e / fact);
    }
    out
}

pub fn ln(u0: f64, order: usize) -> Vec<f64> {
    let mut out = vec![u0.ln()];
    for k in 1..=order {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out.push(sign / (k as f64 * u0.powi(k as i32)));
    }
    out
}

fn trig(cycle: [f64; 4], order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = 1.0;
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        out.push(cycle[k % 4] / fact);
    }
    out
}

pub fn sin(u0: f64, order: usize) -> Vec<f64> {
    let (s, c) = u0.sin_cos();
    trig([s, c, -s, -c], order)
}

pub fn cos(u0: f64, order: usize) -> Vec<f64> {
    let (s, c) = u0.sin_cos();
    trig([c, -s, -c, s], order)
}

/// Generalised binomial series of `u^p` at `u0`.
pub fn powf(u0: f64, p: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (p - (k as f64 - 1.0)) / k as f64;
        }
        out.push(if binom == 0.0 { 0.0 } else { binom * u0.powf(p - k as f64) });
    }
    out
}

/// Integer power; exact at `u0 = 0` for non-negative exponents.
pub fn powi(u0: f64, p: i32, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (p as f64 - (k as f64 - 1.0)) / k as f64;
        }
        out.push(if binom == 0.0 { 0.0 } else { binom * u0.powi(p - k as i32) });
    }
    out
}

/// `tan' = 1 + tan²` gives `(k+1) t_{k+1} = [k = 0] + Σ_{i≤k} t_i t_{k-i}`.
pub fn tan(u0: f64, order: usize) -> Vec<f64> {
    let mut t = vec![u0.tan()];
    for k in 0..order {
        let mut s: f64 = (0..=k).map(|i| t[i] * t[k - i]).sum();
        if k == 0 {
            s += 1.0;
        }
        t.push(s / (k + 1) as f64);
    }
    t
}

/// Integrates the series of `1 / (1 + (u0 + t)²)`.
pub fn atan(u0: f64, order: usize) -> Vec<f64> {
    let q = [1.0 + u0 * u0, 2.0 * u0, 1.0];
    let mut r = Vec::with_capacity(order);
    for k in 0..order {
        let mut acc = if k == 0 { 1.0 } else { 0.0 };
        if k >= 1 {
            acc -= q[1] * r[k - 1];
        }
        if k >= 2 {
            acc -= q[2] * r[k - 2];
        }
        r.push(acc / q[0]);
    }
    let mut out = vec![u0.atan()];
    out.extend(r.iter().enumerate().map(|(k, c)| c / (k + 1) as f64));
    out
}
