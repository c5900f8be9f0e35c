//! Classification predicates for a Kropina structure, evaluated in both
//! presentations: conformal-Killing and Berwald conditions on `(a, b)`,
//! Killing and parallel conditions on `(h, W)`, the identities linking
//! them, and the p-scalar curvature test.

use serde::Serialize;

use crate::dense;
use crate::error::GeometryError;
use crate::kropina::{self, KropinaData, NavigationData, TangentSample};
use crate::riemann::MetricPoint;
use crate::sampling::{sample_transverse, SplitMix64};

/// Covariant derivative of `b` in the `α` connection and its parts.
#[derive(Clone, Debug)]
pub struct RsTensors {
    pub n: usize,
    /// `a_ij`
    pub a: Vec<f64>,
    /// `b_i`
    pub b: Vec<f64>,
    /// `b^i = a^ij b_j`
    pub b_up: Vec<f64>,
    pub b2: f64,
    /// `b_i;j` at `[i][j]`
    pub cov: Vec<f64>,
    /// `r_ij = (b_i;j + b_j;i)/2`
    pub r: Vec<f64>,
    /// `s_ij = (b_i;j − b_j;i)/2`
    pub s: Vec<f64>,
    /// `s_i = b^r s_ri`
    pub s_vec: Vec<f64>,
    pub kappa: f64,
    /// `∂_i κ`
    pub dkappa: Vec<f64>,
}

impl RsTensors {
    /// `s_j b_i − s_i b_j − b² s_ij`, row-major.
    pub fn s_condition(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.s_vec[j] * self.b[i] - self.s_vec[i] * self.b[j] - self.b2 * self.s[i * n + j];
            }
        }
        out
    }
}

pub fn rs_tensors(k: &KropinaData, x: &[f64]) -> Result<RsTensors, GeometryError> {
    let n = k.dim();
    let kj = k.jets(x, 2)?;
    let b: Vec<f64> = kj.b.iter().map(|j| j.value()).collect();
    let dkappa = (0..n).map(|i| kj.kappa.partial_wrt(&[i])).collect();
    let kappa = kj.kappa.value();
    let mp = MetricPoint::from_jets(x, kj.a.clone())?;
    let g = mp.christoffel();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut v = kj.b[i].partial_wrt(&[j]);
            for r in 0..n {
                v -= g.get(r, i, j) * b[r];
            }
            cov[i * n + j] = v;
        }
    }
    let b_up = dense::mat_vec(mp.h_inv(), n, &b);
    let b2: f64 = b.iter().zip(&b_up).map(|(p, q)| p * q).sum();
    if !(b2 > 0.0) {
        return Err(GeometryError::VanishingOneForm { b2, point: x.to_vec() });
    }
    let mut r = vec![0.0; n * n];
    let mut s = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            r[i * n + j] = 0.5 * (cov[i * n + j] + cov[j * n + i]);
            s[i * n + j] = 0.5 * (cov[i * n + j] - cov[j * n + i]);
        }
    }
    let s_vec = (0..n).map(|i| (0..n).map(|q| b_up[q] * s[q * n + i]).sum()).collect();
    Ok(RsTensors { n, a: mp.h().to_vec(), b, b_up, b2, cov, r, s, s_vec, kappa, dkappa })
}

/// `t ≈ c·m` with `c = m^ij t_ij / n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProportionalityFit {
    pub c: f64,
    /// `‖t − c·m‖_F / max(‖t‖_F, 1e-30)`
    pub residual: f64,
    /// `‖t − c·m‖_F`
    pub misfit: f64,
}

pub fn fit_proportional(t: &[f64], m: &[f64], n: usize) -> ProportionalityFit {
    let inv = dense::spd_inverse(m, n).expect("fit_proportional needs a positive-definite reference");
    fit_with_trace(t, m, &inv, n)
}

/// Fits `t ≈ c·m` for a possibly degenerate `m`, taking traces with the
/// inverse metric `h_inv`: `c = tr(h⁻¹t) / tr(h⁻¹m)`.
pub fn fit_with_trace(t: &[f64], m: &[f64], h_inv: &[f64], n: usize) -> ProportionalityFit {
    let tr = |p: &[f64]| -> f64 { (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| h_inv[i * n + j] * p[i * n + j]).sum() };
    let mm = tr(m);
    let c = if mm != 0.0 { tr(t) / mm } else { 0.0 };
    let diff: Vec<f64> = t.iter().zip(m).map(|(a, b)| a - c * b).collect();
    let misfit = dense::frobenius(&diff);
    ProportionalityFit { c, residual: misfit / dense::frobenius(t).max(1e-30), misfit }
}

/// Every pointwise quantity the predicates are built from.
#[derive(Clone, Debug, Serialize)]
pub struct PointResiduals {
    pub x: Vec<f64>,
    /// `r_ij ≈ c a_ij`
    pub wb: ProportionalityFit,
    /// `‖s_j b_i − s_i b_j − b² s_ij‖`
    pub s_condition: f64,
    /// `‖R_ij‖`
    pub killing: f64,
    /// `‖W_i||j‖`
    pub parallel: f64,
    /// `‖r_ij − 2e^{−κ}(R_ij − ½ W_r κ̄^r h_ij)‖`
    pub deformation: f64,
    /// `‖S_ij − (W_i S_j − W_j S_i)‖`
    pub antisymmetric: f64,
    /// `W_r κ̄^r`
    pub w_dkappa: f64,
    /// `|2 R_ij W^i W^j − (c + W_r κ̄^r) |W|²|`
    pub transvection: f64,
}

/// Evaluates both presentations at `x`. `k` and `nav` must describe the
/// same structure.
pub fn point_residuals(k: &KropinaData, nav: &NavigationData, x: &[f64]) -> Result<PointResiduals, GeometryError> {
    let n = nav.dim();
    let rs = rs_tensors(k, x)?;
    let cp = nav.chart_point(x)?;
    check_linked(&rs, cp.metric.h(), cp.w(), x)?;
    let d = cp.deform();
    let h = cp.metric.h();
    let wb = fit_proportional(&rs.r, &rs.a, n);
    let dk_up = dense::mat_vec(cp.metric.h_inv(), n, &rs.dkappa);
    let w_dkappa: f64 = cp.w_low().iter().zip(&dk_up).map(|(p, q)| p * q).sum();
    let emk = (-rs.kappa).exp();
    let mut e22 = vec![0.0; n * n];
    let mut antisym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let ij = i * n + j;
            e22[ij] = rs.r[ij] - 2.0 * emk * (d.r[ij] - 0.5 * w_dkappa * h[ij]);
            antisym[ij] = d.s[ij] - (cp.w_low()[i] * d.s_vec[j] - cp.w_low()[j] * d.s_vec[i]);
        }
    }
    let rww = dense::quad(&d.r, n, cp.w(), cp.w());
    let ww = cp.metric.inner(cp.w(), cp.w());
    Ok(PointResiduals {
        x: x.to_vec(),
        wb,
        s_condition: dense::frobenius(&rs.s_condition()),
        killing: dense::frobenius(&d.r),
        parallel: dense::frobenius(cp.covariant()),
        deformation: dense::frobenius(&e22),
        antisymmetric: dense::frobenius(&antisym),
        w_dkappa,
        transvection: (2.0 * rww - (wb.c + w_dkappa) * ww).abs(),
    })
}

fn check_linked(rs: &RsTensors, h: &[f64], w: &[f64], x: &[f64]) -> Result<(), GeometryError> {
    let ek = rs.kappa.exp();
    let scale = dense::frobenius(h).max(1.0);
    let dh = rs.a.iter().zip(h).map(|(a, h)| (ek * a - h).abs()).fold(0.0, f64::max);
    if dh > 1e-8 * scale {
        return Err(GeometryError::MismatchedPair { detail: format!("|e^kappa a - h| = {dh:e}"), point: x.to_vec() });
    }
    let dw = rs.b_up.iter().zip(w).map(|(b, w)| (0.5 * b - w).abs()).fold(0.0, f64::max);
    if dw > 1e-8 * dense::norm(w).max(1.0) {
        return Err(GeometryError::MismatchedPair { detail: format!("|b^i/2 - W^i| = {dw:e}"), point: x.to_vec() });
    }
    Ok(())
}

/// `‖r_ij − 2e^{−κ}(R_ij − ½ W_r κ̄^r h_ij)‖` at `x`.
pub fn deformation_identity(k: &KropinaData, nav: &NavigationData, x: &[f64]) -> Result<f64, GeometryError> {
    Ok(point_residuals(k, nav, x)?.deformation)
}

/// `‖S_ij − (W_i S_j − W_j S_i)‖` at `x`.
pub fn antisymmetric_test(nav: &NavigationData, x: &[f64]) -> Result<f64, GeometryError> {
    let n = nav.dim();
    let cp = nav.chart_point(x)?;
    let d = cp.deform();
    let wl = cp.w_low();
    let e: Vec<f64> = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            d.s[ij] - (wl[i] * d.s_vec[j] - wl[j] * d.s_vec[i])
        })
        .collect();
    Ok(dense::frobenius(&e))
}

/// A secondary computation that must agree with a predicate's verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub name: String,
    pub residual_max: f64,
    pub verdict: bool,
    pub agrees: bool,
}

impl CrossCheck {
    pub fn new(name: &str, residual_max: f64, tol: f64, expected: bool) -> Self {
        let verdict = residual_max <= tol;
        CrossCheck { name: name.to_string(), residual_max, verdict, agrees: verdict == expected }
    }

    /// A check whose outcome is itself a verdict; the residual is 0 or 1.
    pub fn flag(name: &str, verdict: bool, expected: bool) -> Self {
        CrossCheck { name: name.to_string(), residual_max: if verdict { 0.0 } else { 1.0 }, verdict, agrees: verdict == expected }
    }
}

/// One predicate aggregated over the sample points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredicateEntry {
    pub name: String,
    pub residual_max: f64,
    pub residual_mean: f64,
    pub fitted_scalars: Vec<f64>,
    pub verdict: bool,
    pub cross_checks: Vec<CrossCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl PredicateEntry {
    fn from_residuals(name: &str, res: &[f64], fitted: Vec<f64>, tol: f64) -> Self {
        let max = res.iter().cloned().fold(0.0, f64::max);
        let mean = if res.is_empty() { 0.0 } else { res.iter().sum::<f64>() / res.len() as f64 };
        PredicateEntry {
            name: name.to_string(),
            residual_max: max,
            residual_mean: mean,
            fitted_scalars: fitted,
            verdict: max <= tol,
            cross_checks: Vec::new(),
            note: None,
        }
    }

    /// True when every cross-check agrees with the verdict.
    pub fn consistent(&self) -> bool {
        self.cross_checks.iter().all(|c| c.agrees)
    }
}

fn residuals(k: &KropinaData, nav: &NavigationData, points: &[Vec<f64>]) -> Result<Vec<PointResiduals>, GeometryError> {
    points.iter().map(|p| point_residuals(k, nav, p)).collect()
}

/// `r_ij = c(x) a_ij` at every point, judged on the absolute misfit.
pub fn weakly_berwald_test(k: &KropinaData, points: &[Vec<f64>], tol: f64) -> Result<PredicateEntry, GeometryError> {
    let mut res = Vec::with_capacity(points.len());
    let mut cs = Vec::with_capacity(points.len());
    for p in points {
        let rs = rs_tensors(k, p)?;
        let fit = fit_proportional(&rs.r, &rs.a, rs.n);
        res.push(fit.misfit);
        cs.push(fit.c);
    }
    Ok(PredicateEntry::from_residuals("wB", &res, cs, tol))
}

/// The weakly-Berwald condition together with `s_j b_i − s_i b_j = b² s_ij`.
pub fn berwald_test(k: &KropinaData, points: &[Vec<f64>], tol: f64) -> Result<PredicateEntry, GeometryError> {
    let wb = weakly_berwald_test(k, points, tol)?;
    let mut res = Vec::with_capacity(points.len());
    for p in points {
        res.push(dense::frobenius(&rs_tensors(k, p)?.s_condition()));
    }
    let mut e = PredicateEntry::from_residuals("B", &res, wb.fitted_scalars.clone(), tol);
    e.verdict = e.verdict && wb.verdict;
    if !wb.verdict {
        e.note = Some("weakly-Berwald condition fails".into());
    }
    Ok(e)
}

/// `‖R_ij‖ ≤ tol`: `W` is Killing.
pub fn nav_weakly_berwald_test(nav: &NavigationData, points: &[Vec<f64>], tol: f64) -> Result<PredicateEntry, GeometryError> {
    let res = points.iter().map(|p| Ok(dense::frobenius(&nav.chart_point(p)?.deform().r))).collect::<Result<Vec<_>, GeometryError>>()?;
    Ok(PredicateEntry::from_residuals("navWB", &res, Vec::new(), tol))
}

/// `‖W_i||j‖ ≤ tol`: `W` is parallel.
pub fn nav_berwald_test(nav: &NavigationData, points: &[Vec<f64>], tol: f64) -> Result<PredicateEntry, GeometryError> {
    let res = points.iter().map(|p| Ok(dense::frobenius(nav.chart_point(p)?.covariant()))).collect::<Result<Vec<_>, GeometryError>>()?;
    Ok(PredicateEntry::from_residuals("navB", &res, Vec::new(), tol))
}

/// `max ‖G_ij‖` over the samples.
pub fn mean_berwald_max(nav: &NavigationData, samples: &[TangentSample]) -> Result<f64, GeometryError> {
    let mut worst = 0.0f64;
    for s in samples {
        worst = worst.max(dense::frobenius(&kropina::mean_berwald(nav, s)?));
    }
    Ok(worst)
}

/// `max ‖G_j^i_kl‖` over the samples.
pub fn berwald_curvature_max(nav: &NavigationData, samples: &[TangentSample]) -> Result<f64, GeometryError> {
    let mut worst = 0.0f64;
    for s in samples {
        worst = worst.max(dense::frobenius(kropina::spray(nav, s)?.berwald_curvature()));
    }
    Ok(worst)
}

/// The p-scalar test at the sample points.
#[derive(Clone, Debug, Serialize)]
pub struct PScalarReport {
    pub entry: PredicateEntry,
    /// `K(x)` from the isotropic fit of the curvature of `h`.
    pub k: Vec<f64>,
    pub k_mean: f64,
    pub k_std: f64,
    pub killing_max: f64,
    /// Largest misfit of `R_k^r_ij` against `K(h δ − h δ)`.
    pub isotropy_max: f64,
    /// Largest misfit of `h_rs W^s_||i W^r_||j` against `K(h − W W)`.
    pub quadratic_max: f64,
    /// Largest gap between `K` and the factor fitted in `h_rs W^s_||i W^r_||j ≈ K (h − W W)`.
    pub quadratic_k_gap: f64,
    pub curvature_identity_max: f64,
    /// Largest spread of flag curvature over random flags at one point.
    pub flag_spread: Option<f64>,
    pub flag_range: Option<(f64, f64)>,
}

/// Tests condition (a) `W` Killing and (b) `h` of scalar sectional curvature
/// `K(x)` at each point, with the derived relation (3.6), the second
/// second covariant derivative identity and, when `flags > 0`, the spread of the flag
/// curvature at a few of the points.
pub fn p_scalar_test(
    nav: &NavigationData,
    points: &[Vec<f64>],
    tol: f64,
    flags: usize,
    margin: f64,
    rng: &mut SplitMix64,
) -> Result<PScalarReport, GeometryError> {
    let n = nav.dim();
    let mut ks = Vec::with_capacity(points.len());
    let mut res = Vec::with_capacity(points.len());
    let (mut killing_max, mut iso_max, mut quadratic_max, mut gap, mut curvature_identity_max) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in points {
        let cp = nav.chart_point(p)?;
        let riem = cp.metric.riemann();
        let iso = riem.isotropic_fit(cp.metric.h());
        let killing = dense::frobenius(&cp.deform().r);
        let f36 = fit_with_trace(&cp.hopf_form(), &cp.transverse_metric(), cp.metric.h_inv(), n);
        killing_max = killing_max.max(killing);
        iso_max = iso_max.max(iso.misfit);
        quadratic_max = quadratic_max.max(f36.misfit);
        gap = gap.max((f36.c - iso.k).abs());
        curvature_identity_max = curvature_identity_max.max(cp.curvature_identity_residual(&riem));
        ks.push(iso.k);
        res.push(killing.max(iso.misfit));
    }
    let mut entry = PredicateEntry::from_residuals("pScalar", &res, ks.clone(), tol);
    let m = ks.len().max(1) as f64;
    let k_mean = ks.iter().sum::<f64>() / m;
    let k_std = if ks.len() > 1 { (ks.iter().map(|k| (k - k_mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt() } else { 0.0 };
    if killing_max > tol {
        entry.note = Some("not p-scalar: W not Killing".into());
    } else if iso_max > tol {
        entry.note = Some("not p-scalar: h is not of scalar sectional curvature".into());
    }
    if entry.verdict {
        let kmin = ks.iter().cloned().fold(f64::INFINITY, f64::min);
        entry.cross_checks.push(CrossCheck::new("K(x) >= 0", (-kmin).max(0.0), tol, true));
        entry.cross_checks.push(CrossCheck::new("quadratic", quadratic_max, tol, true));
        entry.cross_checks.push(CrossCheck::new("second covariant derivative", curvature_identity_max, tol, true));
    }
    let (mut spread, mut range) = (None, None);
    if flags > 0 {
        let (s, lo, hi) = flag_spread(nav, &points[..points.len().min(5)], flags, margin, rng)?;
        spread = Some(s);
        range = Some((lo, hi));
        entry.cross_checks.push(CrossCheck::new("flag spread", s, FLAG_SPREAD_TOL, entry.verdict));
    }
    Ok(PScalarReport {
        entry,
        k: ks,
        k_mean,
        k_std,
        killing_max,
        isotropy_max: iso_max,
        quadratic_max,
        quadratic_k_gap: gap,
        curvature_identity_max,
        flag_spread: spread,
        flag_range: range,
    })
}

/// Flag curvature of a p-scalar space is reproduced to this accuracy.
pub const FLAG_SPREAD_TOL: f64 = 1e-5;

/// `flags` random flags at each of `points`; returns the largest per-point
/// spread and the overall range of `K`.
pub fn flag_spread(nav: &NavigationData, points: &[Vec<f64>], flags: usize, margin: f64, rng: &mut SplitMix64) -> Result<(f64, f64, f64), GeometryError> {
    let edges = 5usize;
    let poles = flags.div_ceil(edges).max(1);
    let (mut spread, mut lo, mut hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let (h, _) = nav.values(p)?;
        let (mut plo, mut phi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..poles {
            let y = crate::sampling::sample_tangent(nav, p, margin, rng)?;
            let sj = kropina::spray(nav, &TangentSample::new(p.clone(), y.clone()))?;
            for _ in 0..edges {
                let u = sample_transverse(&h, &y, rng);
                let k = kropina::flag_curvature_from(&sj, &y, &u)?;
                plo = plo.min(k);
                phi = phi.max(k);
            }
        }
        spread = spread.max(phi - plo);
        lo = lo.min(plo);
        hi = hi.max(phi);
    }
    Ok((spread, lo, hi))
}

/// Output of [`classify`].
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub scene: String,
    pub seed: u64,
    pub tolerances: crate::scene::Tolerances,
    pub predicates: Vec<PredicateEntry>,
    pub points_evaluated: usize,
}

/// All predicates of a scene at its sample points, with the mean-Berwald,
/// Berwald-curvature and flag-curvature cross-checks on sampled tangents.
pub fn classify(scene: &crate::Scene) -> Result<ClassificationReport, GeometryError> {
    let tol = scene.tolerances;
    let mut rng = SplitMix64::new(scene.seed);
    let points = crate::sampling::sample_points(&scene.bounds, scene.sampling.points, &mut rng);
    let samples = crate::sampling::sample_tangents(&scene.nav, &points, scene.sampling.tangents_per_point, scene.sampling.cone_margin, &mut rng)?;
    let k = &scene.kropina;
    let nav = &scene.nav;
    let pr = residuals(k, nav, &points)?;
    let col = |f: &dyn Fn(&PointResiduals) -> f64| pr.iter().map(f).collect::<Vec<f64>>();

    let mut wb = PredicateEntry::from_residuals("wB", &col(&|r| r.wb.misfit), col(&|r| r.wb.c), tol.predicate);
    let killing = PredicateEntry::from_residuals("Killing", &col(&|r| r.killing), Vec::new(), tol.predicate);
    let gmean = mean_berwald_max(nav, &samples)?;
    wb.cross_checks.push(CrossCheck::new("Killing", killing.residual_max, tol.predicate, wb.verdict));
    wb.cross_checks.push(CrossCheck::new("mean Berwald", gmean, tol.predicate, wb.verdict));

    let s_res = col(&|r| r.s_condition);
    let mut b_extra = PredicateEntry::from_residuals("B-extra", &s_res, Vec::new(), tol.predicate);
    let antisymmetric = PredicateEntry::from_residuals("antisymmetric", &col(&|r| r.antisymmetric), Vec::new(), tol.predicate);
    b_extra.cross_checks.push(CrossCheck::new("antisymmetric", antisymmetric.residual_max, tol.predicate, b_extra.verdict));

    let mut parallel = PredicateEntry::from_residuals("parallel", &col(&|r| r.parallel), Vec::new(), tol.predicate);
    let berwald = wb.verdict && b_extra.verdict;
    let gjkl = berwald_curvature_max(nav, &samples)?;
    parallel.cross_checks.push(CrossCheck::flag("wB and B-extra", berwald, parallel.verdict));
    parallel.cross_checks.push(CrossCheck::new("Berwald curvature", gjkl, tol.predicate, parallel.verdict));

    let deformation = PredicateEntry::from_residuals("deformation", &col(&|r| r.deformation), Vec::new(), tol.identity);
    let mut killing = killing;
    let trans: Vec<f64> = pr.iter().filter(|r| r.wb.misfit <= tol.identity).map(|r| r.transvection).collect();
    if !trans.is_empty() {
        let t = trans.iter().cloned().fold(0.0, f64::max);
        killing.cross_checks.push(CrossCheck::new("transvection", t, tol.identity, true));
        let cw = pr.iter().filter(|r| r.wb.misfit <= tol.identity).map(|r| (r.wb.c + r.w_dkappa).abs()).fold(0.0, f64::max);
        killing.cross_checks.push(CrossCheck::new("c + W.dkappa", cw, tol.identity, killing.verdict));
    }

    let ps = p_scalar_test(nav, &points, tol.predicate, scene.sampling.flags, scene.sampling.cone_margin, &mut rng)?;
    Ok(ClassificationReport {
        scene: scene.name.clone(),
        seed: scene.seed,
        tolerances: tol,
        predicates: vec![wb, b_extra, killing, parallel, deformation, antisymmetric, ps.entry],
        points_evaluated: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_fit_examples() {
        let m = [1.0, 0.0, 0.0, 1.0];
        let f = fit_proportional(&[3.0, 0.0, 0.0, 3.0], &m, 2);
        assert_eq!((f.c, f.residual), (3.0, 0.0));
        let f = fit_proportional(&[0.0; 4], &m, 2);
        assert_eq!((f.c, f.residual), (0.0, 0.0));
        let f = fit_proportional(&[1.0, 0.0, 0.0, -1.0], &m, 2);
        assert_eq!((f.c, f.residual), (0.0, 1.0));
    }

    #[test]
    fn degenerate_reference_uses_its_trace() {
        // h − W W with W = e1 in the plane: only the e2 block survives
        let h_inv = [1.0, 0.0, 0.0, 1.0];
        let m = [0.0, 0.0, 0.0, 1.0];
        let f = fit_with_trace(&[0.0, 0.0, 0.0, 2.5], &m, &h_inv, 2);
        assert_eq!(f.c, 2.5);
        assert_eq!(f.misfit, 0.0);
    }

    #[test]
    fn shear_tensors_at_origin() {
        let shear = crate::Scene::builtin("shear").unwrap();
        let t = rs_tensors(&shear.kropina, &[0.0, 0.0]).unwrap();
        // b = (2 cos x1, 2 sin x1): only b_2;1 = 2 survives at the origin
        assert_eq!(t.r, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(t.s, vec![0.0, -1.0, 1.0, 0.0]);
        assert_eq!(t.s_vec, vec![0.0, -2.0]);
        assert!(t.s_condition().iter().all(|v| v.abs() < 1e-15));
    }
}
