//! Riemannian geometry of `(M, h)` in a single chart: Levi-Civita
//! connection, curvature, and the covariant derivatives of a wind field.
//!
//! Arrays are dense and row-major. A tensor with indices `(a, b, c)` is
//! stored at `(a * n + b) * n + c`.

use jetcalc::Jet;

use crate::dense;
use crate::error::GeometryError;
use crate::fields::{MetricSource, VectorSource};

/// Christoffel symbols `Γ^i_jk`, stored at `[i][j][k]`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Contracts `Γ^i_jk y^j y^k`.
    pub fn contract(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = 0.0;
                for j in 0..n {
                    for k in 0..n {
                        acc += self.get(i, j, k) * y[j] * y[k];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Metric data at one point: values, first and second derivatives, the
/// connection and its first derivatives.
#[derive(Clone, Debug)]
pub struct MetricPoint {
    n: usize,
    x: Vec<f64>,
    jets: Vec<Jet>,
    h: Vec<f64>,
    h_inv: Vec<f64>,
    gamma: Christoffel,
    // [l][i][j][k] = ∂_l Γ^i_jk
    dgamma: Vec<f64>,
}

impl MetricPoint {
    /// Evaluates `h` to second order at `x`, checking positive definiteness.
    pub fn new<M: MetricSource + ?Sized>(h: &M, x: &[f64]) -> Result<Self, GeometryError> {
        let jets = h.metric_jets(x, 2)?;
        MetricPoint::from_jets(x, jets)
    }

    /// Builds from row-major metric jets complete to second order.
    pub fn from_jets(x: &[f64], jets: Vec<Jet>) -> Result<Self, GeometryError> {
        let n = x.len();
        assert_eq!(jets.len(), n * n);
        let h: Vec<f64> = jets.iter().map(Jet::value).collect();
        let h_inv = dense::spd_inverse(&h, n).ok_or_else(|| GeometryError::NotPositiveDefinite { what: "metric", point: x.to_vec() })?;
        let d1 = |i: usize, j: usize, l: usize| jets[i * n + j].partial_wrt(&[l]);
        let d2 = |i: usize, j: usize, l: usize, m: usize| jets[i * n + j].partial_wrt(&[l, m]);

        // first kind: Γ_ljk = ½(∂_j h_lk + ∂_k h_lj − ∂_l h_jk)
        let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let mut first = vec![0.0; n * n * n];
        let mut dfirst = vec![0.0; n * n * n * n];
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    first[idx3(l, j, k)] = 0.5 * (d1(l, k, j) + d1(l, j, k) - d1(j, k, l));
                    for m in 0..n {
                        dfirst[idx3(m, l, j) * n + k] = 0.5 * (d2(l, k, j, m) + d2(l, j, k, m) - d2(j, k, l, m));
                    }
                }
            }
        }
        // ∂_m h^il = −h^ia ∂_m h_ab h^bl
        let mut dinv = vec![0.0; n * n * n];
        for m in 0..n {
            for i in 0..n {
                for l in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            acc -= h_inv[i * n + a] * d1(a, b, m) * h_inv[b * n + l];
                        }
                    }
                    dinv[idx3(m, i, l)] = acc;
                }
            }
        }
        let mut gamma = vec![0.0; n * n * n];
        let mut dgamma = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut g = 0.0;
                    for l in 0..n {
                        g += h_inv[i * n + l] * first[idx3(l, j, k)];
                    }
                    gamma[idx3(i, j, k)] = g;
                    for m in 0..n {
                        let mut dg = 0.0;
                        for l in 0..n {
                            dg += dinv[idx3(m, i, l)] * first[idx3(l, j, k)] + h_inv[i * n + l] * dfirst[idx3(m, l, j) * n + k];
                        }
                        dgamma[idx3(m, i, j) * n + k] = dg;
                    }
                }
            }
        }
        Ok(MetricPoint { n, x: x.to_vec(), jets, h, h_inv, gamma: Christoffel { n, data: gamma }, dgamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn jets(&self) -> &[Jet] {
        &self.jets
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn h_inv(&self) -> &[f64] {
        &self.h_inv
    }

    pub fn christoffel(&self) -> &Christoffel {
        &self.gamma
    }

    pub fn dgamma(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n;
        self.dgamma[((l * n + i) * n + j) * n + k]
    }

    /// `h(u, v)`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dense::quad(&self.h, self.n, u, v)
    }

    /// `max |h_ij||k|`, zero for the Levi-Civita connection.
    pub fn compatibility_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = self.jets[i * n + j].partial_wrt(&[k]);
                    for r in 0..n {
                        v -= self.gamma.get(r, k, i) * self.h[r * n + j] + self.gamma.get(r, k, j) * self.h[i * n + r];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }

    /// Curvature tensor from `Γ` and `∂Γ`.
    pub fn riemann(&self) -> RiemannTensor {
        let n = self.n;
        let g = &self.gamma;
        let mut data = vec![0.0; n * n * n * n];
        for k in 0..n {
            for r in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut v = self.dgamma(b, r, a, k) - self.dgamma(a, r, b, k);
                        for e in 0..n {
                            v += g.get(r, b, e) * g.get(e, a, k) - g.get(r, a, e) * g.get(e, b, k);
                        }
                        data[((k * n + r) * n + a) * n + b] = v;
                    }
                }
            }
        }
        RiemannTensor { n, data }
    }
}

/// Curvature `R_k^r_ab`, stored at `[k][r][a][b]`, such that
/// `R(∂_b, ∂_a)∂_k = R_k^r_ab ∂_r`. For constant curvature `K` this is
/// `K (h_ka δ^r_b − h_kb δ^r_a)`.
#[derive(Clone, Debug)]
pub struct RiemannTensor {
    n: usize,
    data: Vec<f64>,
}

/// Least-squares fit of a curvature tensor to the constant-curvature form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotropicFit {
    pub k: f64,
    /// Frobenius norm of `R − K·(h δ − h δ)`.
    pub misfit: f64,
}

impl RiemannTensor {
    pub fn get(&self, k: usize, r: usize, a: usize, b: usize) -> f64 {
        let n = self.n;
        self.data[((k * n + r) * n + a) * n + b]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Sectional curvature of the plane spanned by `u` and `v`.
    pub fn sectional(&self, h: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let mut num = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let w = u[i] * v[j] * v[k];
                    if w == 0.0 {
                        continue;
                    }
                    for r in 0..n {
                        for s in 0..n {
                            num += w * self.get(k, r, j, i) * h[r * n + s] * u[s];
                        }
                    }
                }
            }
        }
        let uu = dense::quad(h, n, u, u);
        let vv = dense::quad(h, n, v, v);
        let uv = dense::quad(h, n, u, v);
        num / (uu * vv - uv * uv)
    }

    /// Largest violation of the algebraic symmetries: antisymmetry in the
    /// last pair, antisymmetry of the lowered first pair, and the cyclic
    /// first Bianchi identity.
    pub fn symmetry_residual(&self, h: &[f64]) -> f64 {
        let n = self.n;
        let lower = |s: usize, k: usize, a: usize, b: usize| (0..n).map(|r| h[s * n + r] * self.get(k, r, a, b)).sum::<f64>();
        let mut worst = 0.0f64;
        for k in 0..n {
            for s in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        worst = worst.max((self.get(k, s, a, b) + self.get(k, s, b, a)).abs());
                        worst = worst.max((lower(s, k, a, b) + lower(k, s, a, b)).abs());
                        let cyc = self.get(k, s, a, b) + self.get(a, s, b, k) + self.get(b, s, k, a);
                        worst = worst.max(cyc.abs());
                    }
                }
            }
        }
        worst
    }

    /// Fits `R_k^r_ab ≈ K (h_ka δ^r_b − h_kb δ^r_a)`.
    pub fn isotropic_fit(&self, h: &[f64]) -> IsotropicFit {
        let n = self.n;
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let form = |k: usize, r: usize, a: usize, b: usize| h[k * n + a] * delta(r, b) - h[k * n + b] * delta(r, a);
        let (mut rt, mut tt) = (0.0, 0.0);
        for k in 0..n {
            for r in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let t = form(k, r, a, b);
                        rt += self.get(k, r, a, b) * t;
                        tt += t * t;
                    }
                }
            }
        }
        let kfit = if tt > 0.0 { rt / tt } else { 0.0 };
        let mut mis = 0.0;
        for k in 0..n {
            for r in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let d = self.get(k, r, a, b) - kfit * form(k, r, a, b);
                        mis += d * d;
                    }
                }
            }
        }
        IsotropicFit { k: kfit, misfit: mis.sqrt() }
    }
}

/// Symmetric and antisymmetric parts of `W_i||j` with the derived `S^i_j`
/// and `S_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct NavDeform {
    pub n: usize,
    /// `R_ij = (W_i||j + W_j||i)/2`
    pub r: Vec<f64>,
    /// `S_ij = (W_i||j − W_j||i)/2`
    pub s: Vec<f64>,
    /// `S^i_j = h^ir S_rj`
    pub s_mixed: Vec<f64>,
    /// `S_i = W^r S_ri`
    pub s_vec: Vec<f64>,
}

/// Metric and wind data at one point, with first and second covariant
/// derivatives of `W`.
#[derive(Clone, Debug)]
pub struct ChartPoint {
    pub metric: MetricPoint,
    w: Vec<f64>,
    w_low: Vec<f64>,
    // [j][i] = ∂_j W^i
    dw: Vec<f64>,
    // [i][j] = W_i||j
    cov: Vec<f64>,
    // [i][j][k] = W_i||j||k
    cov2: Vec<f64>,
}

impl ChartPoint {
    pub fn new<M, V>(h: &M, w: &V, x: &[f64]) -> Result<Self, GeometryError>
    where
        M: MetricSource + ?Sized,
        V: VectorSource + ?Sized,
    {
        let metric = MetricPoint::new(h, x)?;
        let wj = w.vector_jets(x, 2)?;
        Ok(ChartPoint::from_parts(metric, &wj))
    }

    /// `wj` must be complete to second order in the chart variables.
    pub fn from_parts(metric: MetricPoint, wj: &[Jet]) -> Self {
        let n = metric.n();
        assert_eq!(wj.len(), n);
        let hj = metric.jets();
        let mut low = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Jet::zero(wj[0].space());
            for a in 0..n {
                acc.add_product(&hj[i * n + a], &wj[a]);
            }
            low.push(acc);
        }
        let w: Vec<f64> = wj.iter().map(Jet::value).collect();
        let w_low: Vec<f64> = low.iter().map(Jet::value).collect();
        let mut dw = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                dw[j * n + i] = wj[i].partial_wrt(&[j]);
            }
        }
        let g = metric.christoffel();
        let mut cov = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = low[i].partial_wrt(&[j]);
                for r in 0..n {
                    v -= g.get(r, i, j) * w_low[r];
                }
                cov[i * n + j] = v;
            }
        }
        let mut cov2 = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // ∂_k of W_i||j
                    let mut v = low[i].partial_wrt(&[j, k]);
                    for r in 0..n {
                        v -= metric.dgamma(k, r, i, j) * w_low[r] + g.get(r, i, j) * low[r].partial_wrt(&[k]);
                    }
                    for r in 0..n {
                        v -= g.get(r, i, k) * cov[r * n + j] + g.get(r, j, k) * cov[i * n + r];
                    }
                    cov2[(i * n + j) * n + k] = v;
                }
            }
        }
        ChartPoint { metric, w, w_low, dw, cov, cov2 }
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    /// `W^i`
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// `W_i = h_ij W^j`
    pub fn w_low(&self) -> &[f64] {
        &self.w_low
    }

    /// `∂_j W^i` at `[j][i]`.
    pub fn dw(&self, j: usize, i: usize) -> f64 {
        self.dw[j * self.n() + i]
    }

    /// `|W|_h`
    pub fn w_norm(&self) -> f64 {
        self.metric.inner(&self.w, &self.w).sqrt()
    }

    /// `W_i||j`, row-major `[i][j]`.
    pub fn covariant(&self) -> &[f64] {
        &self.cov
    }

    /// `W_i||j||k` at `[i][j][k]`.
    pub fn second_covariant(&self) -> &[f64] {
        &self.cov2
    }

    pub fn deform(&self) -> NavDeform {
        let n = self.n();
        let mut r = vec![0.0; n * n];
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                r[i * n + j] = 0.5 * (self.cov[i * n + j] + self.cov[j * n + i]);
                s[i * n + j] = 0.5 * (self.cov[i * n + j] - self.cov[j * n + i]);
            }
        }
        let hi = self.metric.h_inv();
        let mut s_mixed = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                s_mixed[i * n + j] = (0..n).map(|q| hi[i * n + q] * s[q * n + j]).sum();
            }
        }
        let s_vec = (0..n).map(|i| (0..n).map(|q| self.w[q] * s[q * n + i]).sum()).collect();
        NavDeform { n, r, s, s_mixed, s_vec }
    }

    /// `(L_W h)_ij = W^r ∂_r h_ij + h_rj ∂_i W^r + h_ir ∂_j W^r`, computed
    /// from partial derivatives without the connection.
    pub fn lie_derivative_metric(&self) -> Vec<f64> {
        let n = self.n();
        let hj = self.metric.jets();
        let h = self.metric.h();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for r in 0..n {
                    v += self.w[r] * hj[i * n + j].partial_wrt(&[r]);
                    v += h[r * n + j] * self.dw(i, r) + h[i * n + r] * self.dw(j, r);
                }
                out[i * n + j] = v;
            }
        }
        out
    }

    /// `W_r||i W^r` for each `i`; vanishes when `|W|_h` is constant.
    pub fn unit_length_derivative(&self) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|i| (0..n).map(|r| self.cov[r * n + i] * self.w[r]).sum()).collect()
    }

    /// `max |W_i||j||k − W_r R_k^r_ij|`.
    pub fn curvature_identity_residual(&self, riem: &RiemannTensor) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let rhs: f64 = (0..n).map(|r| self.w_low[r] * riem.get(k, r, i, j)).sum();
                    worst = worst.max((self.cov2[(i * n + j) * n + k] - rhs).abs());
                }
            }
        }
        worst
    }

    /// Left-hand side `h_rs W^s_||i W^r_||j` of the p-scalar relation.
    pub fn hopf_form(&self) -> Vec<f64> {
        let n = self.n();
        let hi = self.metric.h_inv();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        v += hi[a * n + b] * self.cov[a * n + i] * self.cov[b * n + j];
                    }
                }
                out[i * n + j] = v;
            }
        }
        out
    }

    /// `h_ij − W_i W_j`.
    pub fn transverse_metric(&self) -> Vec<f64> {
        let n = self.n();
        let h = self.metric.h();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = h[i * n + j] - self.w_low[i] * self.w_low[j];
            }
        }
        out
    }
}

/// `Γ^i_jk` at `x`.
pub fn christoffel<M: MetricSource + ?Sized>(h: &M, x: &[f64]) -> Result<Christoffel, GeometryError> {
    Ok(MetricPoint::new(h, x)?.gamma)
}

/// `W_i||j` at `x`, row-major.
pub fn covariant_deriv<M, V>(h: &M, w: &V, x: &[f64]) -> Result<Vec<f64>, GeometryError>
where
    M: MetricSource + ?Sized,
    V: VectorSource + ?Sized,
{
    Ok(ChartPoint::new(h, w, x)?.cov)
}

pub fn nav_deform<M, V>(h: &M, w: &V, x: &[f64]) -> Result<NavDeform, GeometryError>
where
    M: MetricSource + ?Sized,
    V: VectorSource + ?Sized,
{
    Ok(ChartPoint::new(h, w, x)?.deform())
}

pub fn lie_derivative_metric<M, V>(h: &M, w: &V, x: &[f64]) -> Result<Vec<f64>, GeometryError>
where
    M: MetricSource + ?Sized,
    V: VectorSource + ?Sized,
{
    Ok(ChartPoint::new(h, w, x)?.lie_derivative_metric())
}

pub fn riemann_tensor<M: MetricSource + ?Sized>(h: &M, x: &[f64]) -> Result<RiemannTensor, GeometryError> {
    Ok(MetricPoint::new(h, x)?.riemann())
}

/// `W_i||j||k` at `x`, stored at `[i][j][k]`.
pub fn second_covariant_deriv<M, V>(h: &M, w: &V, x: &[f64]) -> Result<Vec<f64>, GeometryError>
where
    M: MetricSource + ?Sized,
    V: VectorSource + ?Sized,
{
    Ok(ChartPoint::new(h, w, x)?.cov2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{MetricField, VectorField};
    use jetcalc::parse;

    fn metric(n: usize, diag: &[&str]) -> MetricField {
        MetricField::diagonal(diag.iter().map(|s| parse(s, n).unwrap()).collect()).unwrap()
    }

    fn wind(n: usize, comps: &[&str]) -> VectorField {
        VectorField::new(comps.iter().map(|s| parse(s, n).unwrap()).collect()).unwrap()
    }

    #[test]
    fn flat_connection_vanishes() {
        let h = metric(2, &["1", "1"]);
        let g = christoffel(&h, &[0.4, -1.2]).unwrap();
        assert!(g.as_slice().iter().all(|&v| v == 0.0));
        let r = riemann_tensor(&h, &[0.4, -1.2]).unwrap();
        assert!(r.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn surface_of_revolution_symbols() {
        let h = metric(3, &["1", "1", "sin(x2)^2"]);
        let at = |x2: f64| christoffel(&h, &[0.0, x2, 0.0]).unwrap();
        let g = at(std::f64::consts::FRAC_PI_2);
        assert!(g.get(2, 1, 2).abs() < 1e-15);
        assert!(g.get(1, 2, 2).abs() < 1e-15);
        let g = at(std::f64::consts::FRAC_PI_4);
        assert!((g.get(1, 2, 2) + 0.5).abs() < 1e-15);
        assert!((g.get(2, 1, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shear_covariant_derivative() {
        let h = metric(2, &["1", "1"]);
        let w = wind(2, &["cos(x1)", "sin(x1)"]);
        let c = covariant_deriv(&h, &w, &[0.0, 0.0]).unwrap();
        assert_eq!(c, vec![0.0, 0.0, 1.0, 0.0]);
        let d = nav_deform(&h, &w, &[0.0, 0.0]).unwrap();
        assert_eq!(d.r[1], 0.5);
        assert_eq!(d.r[2], 0.5);
        assert_eq!(d.s[1], -0.5);
        let l = lie_derivative_metric(&h, &w, &[0.0, 0.0]).unwrap();
        assert_eq!(l[1], 1.0);
    }

    #[test]
    fn product_curvature_blocks() {
        let h = metric(3, &["1", "1", "sin(x2)^2"]);
        let x = [0.3, 1.1, -0.4];
        let p = MetricPoint::new(&h, &x).unwrap();
        let r = p.riemann();
        let e = |i: usize| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        assert!((r.sectional(p.h(), &e(1), &e(2)) - 1.0).abs() < 1e-12);
        assert!(r.sectional(p.h(), &e(0), &e(2)).abs() < 1e-12);
        assert!(r.sectional(p.h(), &e(0), &[0.0, 0.3, 1.0]).abs() < 1e-12);
        assert!(r.symmetry_residual(p.h()) < 1e-12);
        assert!(p.compatibility_residual() < 1e-12);
    }

    #[test]
    fn round_sphere_is_isotropic() {
        let c = "4/(1+x1^2+x2^2+x3^2)^2";
        let h = metric(3, &[c, c, c]);
        let p = MetricPoint::new(&h, &[0.2, -0.5, 0.7]).unwrap();
        let fit = p.riemann().isotropic_fit(p.h());
        assert!((fit.k - 1.0).abs() < 1e-12, "{fit:?}");
        assert!(fit.misfit < 1e-12);
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let h = metric(2, &["1", "-1"]);
        assert!(matches!(christoffel(&h, &[0.0, 0.0]), Err(GeometryError::NotPositiveDefinite { .. })));
    }
}
