//! Reproducible sampling: a splitmix64 stream, Box–Muller normals, points
//! in a box, admissible tangent vectors and transverse flag edges.

use jetcalc::{AddOp, Expr, MulOp};

use crate::dense;
use crate::error::GeometryError;
use crate::kropina::{NavigationData, TangentSample};

/// Default lower bound on `W_0 / |y|_h`, the cosine of the angle between
/// a sampled direction and the wind. Third fibre derivatives of the spray
/// lose roughly `(|y|_h / W_0)^7` ulps, so directions close to the cone
/// boundary are redrawn.
pub const DEFAULT_CONE_MARGIN: f64 = 0.2;

/// The splitmix64 generator. `next_f64` uses the top 53 bits; normals come
/// in Box–Muller pairs, the second one cached.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }
}

/// `count` points uniform in the box.
pub fn sample_points(bounds: &[(f64, f64)], count: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    (0..count).map(|_| bounds.iter().map(|&(lo, hi)| rng.uniform(lo, hi)).collect()).collect()
}

/// A standard-normal direction at `x`, reflected into the conic domain and
/// scaled to unit `h`-length. Directions with `|W_0| < margin |y|_h` are
/// redrawn.
pub fn sample_tangent(nav: &NavigationData, x: &[f64], margin: f64, rng: &mut SplitMix64) -> Result<Vec<f64>, GeometryError> {
    let n = nav.dim();
    let (h, w) = nav.values(x)?;
    let wl = dense::mat_vec(&h, n, &w);
    for _ in 0..10_000 {
        let mut y = rng.normal_vec(n);
        let norm = dense::quad(&h, n, &y, &y).sqrt();
        if norm == 0.0 {
            continue;
        }
        y.iter_mut().for_each(|v| *v /= norm);
        let w0: f64 = wl.iter().zip(&y).map(|(a, b)| a * b).sum();
        if w0.abs() < margin.max(1e-6) {
            continue;
        }
        if w0 < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        return Ok(y);
    }
    Err(GeometryError::ConicViolation { w0: 0.0, point: x.to_vec() })
}

/// `per_point` admissible samples at each point, drawn in order.
pub fn sample_tangents(
    nav: &NavigationData,
    points: &[Vec<f64>],
    per_point: usize,
    margin: f64,
    rng: &mut SplitMix64,
) -> Result<Vec<TangentSample>, GeometryError> {
    let mut out = Vec::with_capacity(points.len() * per_point);
    for p in points {
        for _ in 0..per_point {
            out.push(TangentSample::new(p.clone(), sample_tangent(nav, p, margin, rng)?));
        }
    }
    Ok(out)
}

/// A standard-normal vector whose angle with `y` (in the metric `h`) is at
/// least about a milliradian.
pub fn sample_transverse(h: &[f64], y: &[f64], rng: &mut SplitMix64) -> Vec<f64> {
    let n = y.len();
    loop {
        let u = rng.normal_vec(n);
        let uu = dense::quad(h, n, &u, &u);
        let yy = dense::quad(h, n, y, y);
        let uy = dense::quad(h, n, &u, y);
        if uu * yy - uy * uy > 1e-6 * uu * yy {
            return u;
        }
    }
}

/// A polynomial of total degree `degree` in `dim` variables with
/// coefficients uniform in `[-1, 1]`, rounded to two decimals.
pub fn random_polynomial(dim: usize, degree: usize, rng: &mut SplitMix64) -> Expr {
    let mut terms = Vec::new();
    let mut exps = vec![0usize; dim];
    loop {
        let total: usize = exps.iter().sum();
        if total <= degree {
            let c = (rng.uniform(-1.0, 1.0) * 100.0).round() / 100.0;
            let mut factors = vec![(MulOp::Times, Expr::num(c))];
            for (v, &e) in exps.iter().enumerate() {
                if e > 0 {
                    factors.push((MulOp::Times, Expr::var(v).powi(e as i32)));
                }
            }
            let term = if factors.len() == 1 { factors.pop().unwrap().1 } else { Expr::Product(factors) };
            terms.push((AddOp::Plus, term));
        }
        // odometer over exponent vectors in [0, degree]^dim
        let mut k = 0;
        loop {
            if k == dim {
                return Expr::Sum(terms);
            }
            exps[k] += 1;
            if exps[k] <= degree {
                break;
            }
            exps[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // first outputs for seed 0 of the published reference implementation
        let mut r = SplitMix64::new(0);
        assert_eq!(r.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(r.next_u64(), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut r = SplitMix64::new(42);
        let xs: Vec<f64> = (0..20000).map(|_| r.normal()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03 && (var - 1.0).abs() < 0.05, "{mean} {var}");
    }

    #[test]
    fn polynomial_term_count() {
        let mut r = SplitMix64::new(1);
        let p = random_polynomial(2, 2, &mut r);
        // 1, x1, x1^2, x2, x1 x2, x2^2
        assert!(matches!(p, Expr::Sum(ref ts) if ts.len() == 6));
    }
}
