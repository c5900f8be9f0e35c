//! The Kropina metric `F = α²/β = h(y, y) / (2 h(W, y))`: the two
//! presentations and the transform between them, the fundamental tensor,
//! the geodesic spray with its Berwald derivatives, and flag curvature.

use std::sync::Arc;

use jetcalc::linalg;
use jetcalc::{Expr, Jet, JetSpace, OrderSpec};

use crate::dense;
use crate::error::GeometryError;
use crate::fields::{CovectorField, MetricField, MetricSource, VectorField, VectorSource};
use crate::riemann::ChartPoint;

/// Admissibility threshold: a tangent vector is in the conic domain when
/// `W_0 > CONE_EPS |y|_h`.
pub const CONE_EPS: f64 = 1e-9;
/// Tolerance on `|W|_h = 1` when a presentation is converted.
pub const UNIT_TOL: f64 = 1e-8;
/// Tolerance on `e^κ b² = 4`.
pub const CONFORMAL_TOL: f64 = 1e-10;
/// Largest accepted condition number of the fundamental tensor.
pub const MAX_CONDITION: f64 = 1e12;

/// Navigation data `(h, W)`.
#[derive(Clone, Debug)]
pub enum NavigationData {
    Explicit {
        h: MetricField,
        w: VectorField,
    },
    /// `h = e^κ a`, `W^i = ½ a^ij b_j`.
    FromKropina(Box<KropinaData>),
}

/// The `(a, b, κ)` presentation with `e^κ b² = 4`.
#[derive(Clone, Debug)]
pub enum KropinaData {
    /// `kappa = None` means `κ = log(4 / b²)`.
    Explicit { a: MetricField, b: CovectorField, kappa: Option<Expr> },
    /// `a = e^{−κ} h`, `b = 2 e^{−κ} W♭` for the gauge `κ` (zero if `None`).
    FromNavigation { nav: Box<NavigationData>, gauge: Option<Expr> },
}

/// Jets of `h_ij` and `W^i` in the chart variables.
#[derive(Clone, Debug)]
pub struct NavJets {
    pub h: Vec<Jet>,
    pub w: Vec<Jet>,
}

/// Jets of `a_ij`, `b_i` and `κ` in the chart variables.
#[derive(Clone, Debug)]
pub struct KropinaJets {
    pub a: Vec<Jet>,
    pub b: Vec<Jet>,
    pub kappa: Jet,
}

fn lower(h: &[Jet], w: &[Jet]) -> Vec<Jet> {
    let n = w.len();
    (0..n)
        .map(|i| {
            let mut acc = Jet::zero(w[0].space());
            for j in 0..n {
                acc.add_product(&h[i * n + j], &w[j]);
            }
            acc
        })
        .collect()
}

fn jet_inverse(m: &[Jet], n: usize, what: &'static str, x: &[f64]) -> Result<Vec<Jet>, GeometryError> {
    let vals: Vec<f64> = m.iter().map(Jet::value).collect();
    if !dense::is_positive_definite(&vals, n) {
        return Err(GeometryError::NotPositiveDefinite { what, point: x.to_vec() });
    }
    linalg::inverse(m, n).map_err(|e| GeometryError::from_jet(what, e, x))
}

impl NavigationData {
    pub fn new(h: MetricField, w: VectorField) -> Result<Self, GeometryError> {
        let n = MetricSource::dim(&h);
        if VectorSource::dim(&w) != n {
            return Err(GeometryError::Dimension { expected: n, found: VectorSource::dim(&w) });
        }
        Ok(NavigationData::Explicit { h, w })
    }

    pub fn dim(&self) -> usize {
        match self {
            NavigationData::Explicit { h, .. } => MetricSource::dim(h),
            NavigationData::FromKropina(k) => k.dim(),
        }
    }

    pub fn jets(&self, x: &[f64], order: u8) -> Result<NavJets, GeometryError> {
        match self {
            NavigationData::Explicit { h, w } => Ok(NavJets { h: h.metric_jets(x, order)?, w: w.vector_jets(x, order)? }),
            NavigationData::FromKropina(k) => {
                let n = k.dim();
                let kj = k.jets(x, order)?;
                let ek = kj.kappa.exp();
                let h = kj.a.iter().map(|a| a * &ek).collect();
                let inv = jet_inverse(&kj.a, n, "alpha metric", x)?;
                let w = (0..n)
                    .map(|i| {
                        let mut acc = Jet::zero(kj.kappa.space());
                        for j in 0..n {
                            acc.add_product(&inv[i * n + j], &kj.b[j]);
                        }
                        acc.scale(0.5)
                    })
                    .collect();
                Ok(NavJets { h, w })
            }
        }
    }

    /// `(h_ij, W^i)` at `x`.
    pub fn values(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>), GeometryError> {
        let j = self.jets(x, 0)?;
        Ok((j.h.iter().map(Jet::value).collect(), j.w.iter().map(Jet::value).collect()))
    }

    /// `|W|_h` at `x`.
    pub fn wind_norm(&self, x: &[f64]) -> Result<f64, GeometryError> {
        let (h, w) = self.values(x)?;
        Ok(dense::quad(&h, self.dim(), &w, &w).sqrt())
    }

    /// Fails with the worst offender if `|W|_h` deviates from 1 by more
    /// than `tol` at any of `points`.
    pub fn check_unit(&self, points: &[Vec<f64>], tol: f64) -> Result<(), GeometryError> {
        let mut worst: Option<(f64, &Vec<f64>, f64)> = None;
        for p in points {
            let norm = self.wind_norm(p)?;
            let dev = (norm - 1.0).abs();
            if dev > tol && worst.is_none_or(|(d, _, _)| dev > d) {
                worst = Some((dev, p, norm));
            }
        }
        match worst {
            Some((_, p, norm)) => Err(GeometryError::UnitLength { norm, point: p.clone() }),
            None => Ok(()),
        }
    }

    /// Full covariant data of `(h, W)` at `x`.
    pub fn chart_point(&self, x: &[f64]) -> Result<ChartPoint, GeometryError> {
        ChartPoint::new(self, self, x)
    }
}

impl MetricSource for NavigationData {
    fn dim(&self) -> usize {
        NavigationData::dim(self)
    }

    fn metric_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError> {
        match self {
            NavigationData::Explicit { h, .. } => h.metric_jets(x, order),
            _ => Ok(self.jets(x, order)?.h),
        }
    }
}

impl VectorSource for NavigationData {
    fn dim(&self) -> usize {
        NavigationData::dim(self)
    }

    fn vector_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError> {
        match self {
            NavigationData::Explicit { w, .. } => w.vector_jets(x, order),
            _ => Ok(self.jets(x, order)?.w),
        }
    }
}

impl KropinaData {
    pub fn new(a: MetricField, b: CovectorField, kappa: Option<Expr>) -> Result<Self, GeometryError> {
        let n = MetricSource::dim(&a);
        if b.dim() != n {
            return Err(GeometryError::Dimension { expected: n, found: b.dim() });
        }
        Ok(KropinaData::Explicit { a, b, kappa })
    }

    pub fn dim(&self) -> usize {
        match self {
            KropinaData::Explicit { a, .. } => MetricSource::dim(a),
            KropinaData::FromNavigation { nav, .. } => nav.dim(),
        }
    }

    pub fn jets(&self, x: &[f64], order: u8) -> Result<KropinaJets, GeometryError> {
        let n = self.dim();
        match self {
            KropinaData::Explicit { a, b, kappa } => {
                let aj = a.metric_jets(x, order)?;
                let bj = b.jets(x, order)?;
                let kappa = match kappa {
                    Some(k) => k.eval_jet_in(x, aj[0].space()).map_err(|e| GeometryError::eval("kappa", e))?,
                    None => {
                        let b2 = b_squared(&aj, &bj, x)?;
                        if b2.value() <= 0.0 {
                            return Err(GeometryError::VanishingOneForm { b2: b2.value(), point: x.to_vec() });
                        }
                        let ln = b2.ln().map_err(|e| GeometryError::from_jet("b^2", e, x))?;
                        (-ln).add_scalar(4f64.ln())
                    }
                };
                Ok(KropinaJets { a: aj, b: bj, kappa })
            }
            KropinaData::FromNavigation { nav, gauge } => {
                let nj = nav.jets(x, order)?;
                let sp = nj.w[0].space().clone();
                let kappa = match gauge {
                    Some(k) => k.eval_jet_in(x, &sp).map_err(|e| GeometryError::eval("kappa", e))?,
                    None => Jet::zero(&sp),
                };
                let emk = (-&kappa).exp();
                let a = nj.h.iter().map(|h| h * &emk).collect();
                let low = lower(&nj.h, &nj.w);
                let two_emk = emk.scale(2.0);
                let b = low.iter().map(|wl| wl * &two_emk).collect();
                debug_assert_eq!(n, nj.w.len());
                Ok(KropinaJets { a, b, kappa })
            }
        }
    }

    /// `(a_ij, b_i, κ)` at `x`.
    pub fn values(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64), GeometryError> {
        let j = self.jets(x, 0)?;
        Ok((j.a.iter().map(Jet::value).collect(), j.b.iter().map(Jet::value).collect(), j.kappa.value()))
    }

    /// `b² = a^ij b_i b_j` at `x`.
    pub fn b_squared(&self, x: &[f64]) -> Result<f64, GeometryError> {
        let j = self.jets(x, 0)?;
        Ok(b_squared(&j.a, &j.b, x)?.value())
    }

    /// `e^κ b²` at `x`; equals 4 for consistent data.
    pub fn conformal_product(&self, x: &[f64]) -> Result<f64, GeometryError> {
        let j = self.jets(x, 0)?;
        Ok(j.kappa.value().exp() * b_squared(&j.a, &j.b, x)?.value())
    }

    /// Fails if `b` vanishes or `e^κ b² ≠ 4` beyond `tol` at any of `points`.
    pub fn check_conformal(&self, points: &[Vec<f64>], tol: f64) -> Result<(), GeometryError> {
        for p in points {
            let b2 = self.b_squared(p)?;
            if !(b2 > 0.0) {
                return Err(GeometryError::VanishingOneForm { b2, point: p.clone() });
            }
            let prod = self.conformal_product(p)?;
            if (prod - 4.0).abs() > tol {
                return Err(GeometryError::ConformalFactor { product: prod, point: p.clone() });
            }
        }
        Ok(())
    }

    pub fn kappa_at(&self, x: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.jets(x, 0)?.kappa.value())
    }
}

fn b_squared(a: &[Jet], b: &[Jet], x: &[f64]) -> Result<Jet, GeometryError> {
    let n = b.len();
    let inv = jet_inverse(a, n, "alpha metric", x)?;
    let mut acc = Jet::zero(b[0].space());
    for i in 0..n {
        for j in 0..n {
            let t = &inv[i * n + j] * &b[i];
            acc.add_product(&t, &b[j]);
        }
    }
    Ok(acc)
}

impl MetricSource for KropinaData {
    fn dim(&self) -> usize {
        KropinaData::dim(self)
    }

    fn metric_jets(&self, x: &[f64], order: u8) -> Result<Vec<Jet>, GeometryError> {
        match self {
            KropinaData::Explicit { a, .. } => a.metric_jets(x, order),
            _ => Ok(self.jets(x, order)?.a),
        }
    }
}

/// The navigation data of `k`: `h = e^κ a`, `W^i = ½ a^ij b_j`. Fails if
/// `b` vanishes or `κ` is inconsistent at any of `points`.
pub fn to_navigation(k: &KropinaData, points: &[Vec<f64>]) -> Result<NavigationData, GeometryError> {
    k.check_conformal(points, CONFORMAL_TOL)?;
    Ok(NavigationData::FromKropina(Box::new(k.clone())))
}

/// The `(a, b)` data of `nav` in the gauge `κ ≡ 0`: `a = h`, `b = 2W♭`.
pub fn from_navigation(nav: &NavigationData, points: &[Vec<f64>]) -> Result<KropinaData, GeometryError> {
    nav.check_unit(points, UNIT_TOL)?;
    Ok(KropinaData::FromNavigation { nav: Box::new(nav.clone()), gauge: None })
}

/// As [`from_navigation`] in the gauge `κ`: `a = e^{−κ} h`, `b = 2e^{−κ} W♭`.
pub fn from_navigation_gauge(nav: &NavigationData, kappa: Expr, points: &[Vec<f64>]) -> Result<KropinaData, GeometryError> {
    nav.check_unit(points, UNIT_TOL)?;
    Ok(KropinaData::FromNavigation { nav: Box::new(nav.clone()), gauge: Some(kappa) })
}

/// A point of the tangent bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        TangentSample { x, y }
    }
}

fn admissible(w0: f64, ynorm: f64, x: &[f64]) -> Result<(), GeometryError> {
    if w0 > CONE_EPS * ynorm && ynorm > 0.0 {
        Ok(())
    } else {
        Err(GeometryError::ConicViolation { w0, point: x.to_vec() })
    }
}

/// `F = h_00 / (2 W_0)`.
pub fn eval_f(nav: &NavigationData, s: &TangentSample) -> Result<f64, GeometryError> {
    let (h, w) = nav.values(&s.x)?;
    let n = nav.dim();
    let h00 = dense::quad(&h, n, &s.y, &s.y);
    let w0 = dense::quad(&h, n, &w, &s.y);
    admissible(w0, h00.sqrt(), &s.x)?;
    Ok(h00 / (2.0 * w0))
}

/// `F = α² / β` from the `(a, b)` presentation.
pub fn eval_f_alpha_beta(k: &KropinaData, s: &TangentSample) -> Result<f64, GeometryError> {
    let (a, b, _) = k.values(&s.x)?;
    let n = k.dim();
    let a00 = dense::quad(&a, n, &s.y, &s.y);
    let beta: f64 = b.iter().zip(&s.y).map(|(b, y)| b * y).sum();
    admissible(beta, a00.sqrt(), &s.x)?;
    Ok(a00 / beta)
}

/// `h_00 / (2 W_0)` as a jet over `target`, whose first `n` variables are
/// the chart coordinates and the next `n` the fibre coordinates.
fn f_jet(nj: &NavJets, s: &TangentSample, target: &Arc<JetSpace>) -> Result<Jet, GeometryError> {
    let n = s.x.len();
    let low = lower(&nj.h, &nj.w);
    let map: Vec<usize> = (0..n).collect();
    let ys: Vec<Jet> = (0..n).map(|i| Jet::variable(target, n + i, s.y[i])).collect();
    let mut h00 = Jet::zero(target);
    let mut w0 = Jet::zero(target);
    for i in 0..n {
        let mut hy = Jet::zero(target);
        for j in 0..n {
            let hij = nj.h[i * n + j].embed(target, &map);
            hy.add_product(&ys[j], &hij);
        }
        h00.add_product(&ys[i], &hy);
        w0.add_product(&ys[i], &low[i].embed(target, &map));
    }
    admissible(w0.value(), h00.value().max(0.0).sqrt(), &s.x)?;
    let inv = w0.scale(2.0).recip().map_err(|e| GeometryError::from_jet("W_0", e, &s.x))?;
    Ok(&h00 * &inv)
}

fn f_squared(nav: &NavigationData, s: &TangentSample, spec: &OrderSpec, x_order: u8) -> Result<(Jet, Arc<JetSpace>), GeometryError> {
    let n = nav.dim();
    if s.x.len() != n || s.y.len() != n {
        return Err(GeometryError::Dimension { expected: n, found: s.x.len() });
    }
    let nj = nav.jets(&s.x, x_order)?;
    let space = JetSpace::get(spec);
    let f = f_jet(&nj, s, &space)?;
    Ok((&f * &f, space))
}

fn check_fundamental(g: &[f64], n: usize, x: &[f64]) -> Result<(), GeometryError> {
    let (lo, hi) = dense::eigen_range(g, n);
    if !(lo > 0.0) {
        return Err(GeometryError::NotPositiveDefinite { what: "fundamental tensor", point: x.to_vec() });
    }
    if hi / lo > MAX_CONDITION {
        return Err(GeometryError::IllConditioned { what: "fundamental tensor", cond: hi / lo, point: x.to_vec() });
    }
    Ok(())
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j`, row-major.
pub fn fundamental_tensor(nav: &NavigationData, s: &TangentSample) -> Result<Vec<f64>, GeometryError> {
    let n = nav.dim();
    let (f2, _) = f_squared(nav, s, &OrderSpec::split(n, n, 0, 2, 2), 0)?;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = 0.5 * f2.partial_wrt(&[n + i, n + j]);
        }
    }
    Ok(g)
}

/// The geodesic spray and its derivatives at one tangent sample.
#[derive(Clone, Debug)]
pub struct SprayJet {
    n: usize,
    f: f64,
    g_tensor: Vec<f64>,
    values: Vec<f64>,
    // [i][j] = ∂G^i/∂y^j
    first: Vec<f64>,
    // [i][j][k] = G_j^i_k
    second: Vec<f64>,
    // [i][j][k][l] = G_j^i_kl
    third: Vec<f64>,
    // [i][k] = ∂G^i/∂x^k
    dx: Vec<f64>,
    // [i][j][k] = ∂²G^i/∂x^j∂y^k
    dxy: Vec<f64>,
}

impl SprayJet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    /// Fundamental tensor `g_ij` at the sample.
    pub fn fundamental(&self) -> &[f64] {
        &self.g_tensor
    }

    /// `G^i`
    pub fn g(&self) -> &[f64] {
        &self.values
    }

    /// `G^i_j`
    pub fn g_j(&self, i: usize, j: usize) -> f64 {
        self.first[i * self.n + j]
    }

    /// `G_j^i_k`
    pub fn berwald(&self, j: usize, i: usize, k: usize) -> f64 {
        self.second[(i * self.n + j) * self.n + k]
    }

    /// `G_j^i_kl`
    pub fn berwald_deriv(&self, j: usize, i: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.third[((i * n + j) * n + k) * n + l]
    }

    /// All `G_j^i_kl`.
    pub fn berwald_curvature(&self) -> &[f64] {
        &self.third
    }

    /// Mean Berwald curvature `G_ij = G_i^r_jr`, row-major.
    pub fn mean_berwald(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|r| self.berwald_deriv(i, r, j, r)).sum();
            }
        }
        out
    }

    /// `R^i_k`, row-major.
    pub fn riemann_curvature(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut v = 2.0 * self.dx[i * n + k];
                for j in 0..n {
                    v -= y[j] * self.dxy[(i * n + j) * n + k];
                    v += 2.0 * self.values[j] * self.berwald(j, i, k);
                    v -= self.g_j(i, j) * self.g_j(j, k);
                }
                out[i * n + k] = v;
            }
        }
        out
    }

    /// Largest violation of the Euler relations `y^j G^i_j = 2G^i`,
    /// `y^k G_j^i_k = G^i_j`, `y^l G_j^i_kl = 0`, each relative to the
    /// size of the quantities involved.
    pub fn homogeneity_residual(&self, y: &[f64]) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        let rel = |d: f64, scale: f64| d.abs() / scale.max(1e-300);
        let s1 = dense::norm(&self.first) * dense::norm(y) + dense::norm(&self.values);
        let s2 = dense::norm(&self.second) * dense::norm(y) + dense::norm(&self.first);
        let s3 = (dense::norm(&self.third) * dense::norm(y)).max(dense::norm(&self.second));
        for i in 0..n {
            let e: f64 = (0..n).map(|j| y[j] * self.g_j(i, j)).sum::<f64>() - 2.0 * self.values[i];
            worst = worst.max(rel(e, s1));
            for j in 0..n {
                let e: f64 = (0..n).map(|k| y[k] * self.berwald(j, i, k)).sum::<f64>() - self.g_j(i, j);
                worst = worst.max(rel(e, s2));
                for k in 0..n {
                    let e: f64 = (0..n).map(|l| y[l] * self.berwald_deriv(j, i, k, l)).sum();
                    worst = worst.max(rel(e, s3));
                }
            }
        }
        worst
    }
}

/// Spray `G^i = ¼ g^il (∂²F²/∂y^l∂x^m y^m − ∂F²/∂x^l)` with all the
/// derivatives carried by [`SprayJet`].
pub fn spray(nav: &NavigationData, s: &TangentSample) -> Result<SprayJet, GeometryError> {
    let n = nav.dim();
    let (f2, _) = f_squared(nav, s, &OrderSpec::split(n, n, 2, 5, 5), 2)?;
    let t = JetSpace::get(&OrderSpec::split(n, n, 1, 3, 3));
    let mut g = Vec::with_capacity(n * n);
    let dy: Vec<Jet> = (0..n).map(|l| f2.derivative(n + l)).collect();
    for l in 0..n {
        for m in 0..n {
            g.push(dy[l].derivative(n + m).restrict(&t).scale(0.5));
        }
    }
    let g0: Vec<f64> = g.iter().map(Jet::value).collect();
    check_fundamental(&g0, n, &s.x)?;
    let ys: Vec<Jet> = (0..n).map(|i| Jet::variable(&t, n + i, s.y[i])).collect();
    let mut rhs = Vec::with_capacity(n);
    for l in 0..n {
        let mut acc = -&f2.derivative(l).restrict(&t);
        for m in 0..n {
            acc.add_product(&ys[m], &dy[l].derivative(m).restrict(&t));
        }
        rhs.push(acc.scale(0.25));
    }
    let sol = linalg::solve(&g, n, &[rhs]).map_err(|e| GeometryError::from_jet("fundamental tensor", e, &s.x))?;
    let gs = &sol[0];
    let mut out = SprayJet {
        n,
        f: f2.value().sqrt(),
        g_tensor: g0,
        values: gs.iter().map(Jet::value).collect(),
        first: vec![0.0; n * n],
        second: vec![0.0; n * n * n],
        third: vec![0.0; n * n * n * n],
        dx: vec![0.0; n * n],
        dxy: vec![0.0; n * n * n],
    };
    for i in 0..n {
        for j in 0..n {
            out.first[i * n + j] = gs[i].partial_wrt(&[n + j]);
            out.dx[i * n + j] = gs[i].partial_wrt(&[j]);
            for k in 0..n {
                out.second[(i * n + j) * n + k] = gs[i].partial_wrt(&[n + j, n + k]);
                out.dxy[(i * n + j) * n + k] = gs[i].partial_wrt(&[j, n + k]);
                for l in 0..n {
                    out.third[((i * n + j) * n + k) * n + l] = gs[i].partial_wrt(&[n + j, n + k, n + l]);
                }
            }
        }
    }
    Ok(out)
}

/// `G^i` alone, from the lowest-order jets that determine it.
pub fn spray_value(nav: &NavigationData, s: &TangentSample) -> Result<Vec<f64>, GeometryError> {
    let n = nav.dim();
    let (f2, _) = f_squared(nav, s, &OrderSpec::split(n, n, 1, 2, 2), 1)?;
    let mut g = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];
    for l in 0..n {
        for m in 0..n {
            g[l * n + m] = 0.5 * f2.partial_wrt(&[n + l, n + m]);
            rhs[l] += f2.partial_wrt(&[m, n + l]) * s.y[m];
        }
        rhs[l] = 0.25 * (rhs[l] - f2.partial_wrt(&[l]));
    }
    check_fundamental(&g, n, &s.x)?;
    let sol = dense::to_matrix(&g, n)
        .lu()
        .solve(&nalgebra::DVector::from_vec(rhs))
        .ok_or_else(|| GeometryError::Singular { what: "fundamental tensor", point: s.x.clone() })?;
    Ok(sol.iter().cloned().collect())
}

/// Spray of a Kropina metric whose wind is a unit Killing field:
/// `G^i = ½ γ_0^i_0 − F S^i_0`.
pub fn killing_spray(nav: &NavigationData, s: &TangentSample) -> Result<Vec<f64>, GeometryError> {
    let cp = nav.chart_point(&s.x)?;
    let f = eval_f(nav, s)?;
    let n = nav.dim();
    let half_gamma = cp.metric.christoffel().contract(&s.y);
    let d = cp.deform();
    Ok((0..n)
        .map(|i| {
            let s0: f64 = (0..n).map(|j| d.s_mixed[i * n + j] * s.y[j]).sum();
            0.5 * half_gamma[i] - f * s0
        })
        .collect())
}

/// Mean Berwald curvature `G_ij`.
pub fn mean_berwald(nav: &NavigationData, s: &TangentSample) -> Result<Vec<f64>, GeometryError> {
    Ok(spray(nav, s)?.mean_berwald())
}

/// Flag curvature `K(x, y, u) = g(R u, u) / (F² g(u, u) − g(y, u)²)`.
pub fn flag_curvature(nav: &NavigationData, s: &TangentSample, u: &[f64]) -> Result<f64, GeometryError> {
    let sj = spray(nav, s)?;
    flag_curvature_from(&sj, &s.y, u)
}

/// Flag curvature from an already computed spray jet.
pub fn flag_curvature_from(sj: &SprayJet, y: &[f64], u: &[f64]) -> Result<f64, GeometryError> {
    let n = sj.n();
    let g = sj.fundamental();
    let guu = dense::quad(g, n, u, u);
    let gyu = dense::quad(g, n, y, u);
    let f2 = dense::quad(g, n, y, y);
    let denom = f2 * guu - gyu * gyu;
    if !(denom > 1e-12 * f2 * guu) {
        return Err(GeometryError::DegenerateFlag);
    }
    let r = sj.riemann_curvature(y);
    let ru = dense::mat_vec(&r, n, u);
    Ok(dense::quad(g, n, &ru, u) / denom)
}

/// Evaluates `F` as a two-variable-group jet complete to first order; used
/// by the Killing operator.
pub(crate) fn f_first_order(nav: &NavigationData, s: &TangentSample) -> Result<Jet, GeometryError> {
    let n = nav.dim();
    let spec = OrderSpec::split(n, n, 1, 1, 1);
    let nj = nav.jets(&s.x, 1)?;
    f_jet(&nj, s, &JetSpace::get(&spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetcalc::parse;

    fn nav(n: usize, h: &[&str], w: &[&str]) -> NavigationData {
        let h = MetricField::diagonal(h.iter().map(|s| parse(s, n).unwrap()).collect()).unwrap();
        let w = VectorField::new(w.iter().map(|s| parse(s, n).unwrap()).collect()).unwrap();
        NavigationData::new(h, w).unwrap()
    }

    fn kropina(n: usize, a: &[&str], b: &[&str]) -> KropinaData {
        let a = MetricField::diagonal(a.iter().map(|s| parse(s, n).unwrap()).collect()).unwrap();
        let b = CovectorField::new(b.iter().map(|s| parse(s, n).unwrap()).collect()).unwrap();
        KropinaData::new(a, b, None).unwrap()
    }

    fn sample(x: &[f64], y: &[f64]) -> TangentSample {
        TangentSample::new(x.to_vec(), y.to_vec())
    }

    #[test]
    fn flat_values() {
        let flat = nav(2, &["1", "1"], &["1", "0"]);
        assert_eq!(eval_f(&flat, &sample(&[0.0, 0.0], &[1.0, 0.0])).unwrap(), 0.5);
        assert_eq!(eval_f(&flat, &sample(&[0.0, 0.0], &[1.0, 1.0])).unwrap(), 1.0);
        assert!(matches!(eval_f(&flat, &sample(&[0.0, 0.0], &[-1.0, 0.0])), Err(GeometryError::ConicViolation { .. })));
    }

    #[test]
    fn to_navigation_examples() {
        let origin = vec![vec![0.0, 0.0]];
        let k = kropina(2, &["1", "1"], &["2", "0"]);
        let n = to_navigation(&k, &origin).unwrap();
        let (h, w) = n.values(&[0.0, 0.0]).unwrap();
        assert_eq!(k.kappa_at(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(h, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(w, vec![1.0, 0.0]);

        let k = kropina(2, &["4", "4"], &["4", "0"]);
        assert_eq!(k.b_squared(&[0.0, 0.0]).unwrap(), 4.0);
        let (h, w) = to_navigation(&k, &origin).unwrap().values(&[0.0, 0.0]).unwrap();
        assert_eq!(h, vec![4.0, 0.0, 0.0, 4.0]);
        assert_eq!(w, vec![0.5, 0.0]);

        let k = kropina(2, &["1", "1"], &["1", "0"]);
        let n = to_navigation(&k, &origin).unwrap();
        let (h, w) = n.values(&[0.0, 0.0]).unwrap();
        assert!((h[0] - 4.0).abs() < 1e-15 && (h[3] - 4.0).abs() < 1e-15);
        assert!((n.wind_norm(&[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let low: Vec<f64> = (0..2).map(|i| h[i * 2] * w[0] + h[i * 2 + 1] * w[1]).collect();
        assert!((low[0] - 2.0).abs() < 1e-15 && low[1] == 0.0);
    }

    #[test]
    fn from_navigation_examples() {
        let origin = vec![vec![0.0, 0.0]];
        let flat = nav(2, &["1", "1"], &["1", "0"]);
        let k = from_navigation(&flat, &origin).unwrap();
        let (a, b, kappa) = k.values(&[0.0, 0.0]).unwrap();
        assert_eq!(a, vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(b, vec![2.0, 0.0]);
        assert_eq!(kappa, 0.0);
        let fast = nav(2, &["1", "1"], &["2", "0"]);
        let err = from_navigation(&fast, &origin).unwrap_err();
        assert!(matches!(err, GeometryError::UnitLength { norm, .. } if norm == 2.0));
        assert_eq!(err.to_string(), "unit-length violation at (0, 0): |W|=2");
    }

    #[test]
    fn flat_spray_vanishes() {
        let flat = nav(2, &["1", "1"], &["1", "0"]);
        let sj = spray(&flat, &sample(&[0.3, 0.1], &[0.7, -0.4])).unwrap();
        assert!(sj.g().iter().all(|v| v.abs() < 1e-15));
        assert!(sj.berwald_curvature().iter().all(|v| v.abs() < 1e-13));
        let k = flag_curvature_from(&sj, &[0.7, -0.4], &[0.1, 1.0]).unwrap();
        assert!(k.abs() < 1e-13);
    }

    #[test]
    fn fundamental_tensor_is_euler_consistent() {
        let shear = nav(2, &["1", "1"], &["cos(x1)", "sin(x1)"]);
        let s = sample(&[0.4, 0.0], &[1.0, 0.3]);
        let g = fundamental_tensor(&shear, &s).unwrap();
        let f = eval_f(&shear, &s).unwrap();
        assert!((dense::quad(&g, 2, &s.y, &s.y) - f * f).abs() < 1e-12);
        let g2 = fundamental_tensor(&shear, &sample(&[0.4, 0.0], &[2.0, 0.6])).unwrap();
        for (a, b) in g.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn spray_value_matches_full_jet() {
        let shear = nav(2, &["1", "1"], &["cos(x1)", "sin(x1)"]);
        let s = sample(&[0.4, -0.2], &[1.0, 0.3]);
        let full = spray(&shear, &s).unwrap();
        let quick = spray_value(&shear, &s).unwrap();
        for (a, b) in full.g().iter().zip(&quick) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(full.homogeneity_residual(&s.y) < 1e-12);
    }

    #[test]
    fn degenerate_flag() {
        let flat = nav(2, &["1", "1"], &["1", "0"]);
        let s = sample(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(matches!(flag_curvature(&flat, &s, &[2.0, 2.0]), Err(GeometryError::DegenerateFlag)));
    }
}
