//! Flows of vector fields with their tangent lifts, Killing operators of
//! Finsler and `(α, β)` metrics, and geodesic integration.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::classify::{fit_proportional, rs_tensors, CrossCheck, PredicateEntry};
use crate::dense;
use crate::error::GeometryError;
use crate::fields::{MetricSource, VectorSource};
use crate::kropina::{self, KropinaData, NavigationData, TangentSample};
use crate::riemann::MetricPoint;

/// `K_V(F) = ∂F/∂x^s V^s + ∂F/∂y^s ∂_u V^s y^u` for an arbitrary field `V`.
pub fn killing_operator<V: VectorSource + ?Sized>(nav: &NavigationData, v: &V, s: &TangentSample) -> Result<f64, GeometryError> {
    let n = nav.dim();
    let f = kropina::f_first_order(nav, s)?;
    let vj = v.vector_jets(&s.x, 1)?;
    let mut out = 0.0;
    for a in 0..n {
        out += f.partial_wrt(&[a]) * vj[a].value();
        let lifted: f64 = (0..n).map(|u| vj[a].partial_wrt(&[u]) * s.y[u]).sum();
        out += f.partial_wrt(&[n + a]) * lifted;
    }
    Ok(out)
}

/// The Killing equation `K_W(F)` of the Kropina metric along its own wind.
pub fn killing_eq_f(nav: &NavigationData, s: &TangentSample) -> Result<f64, GeometryError> {
    killing_operator(nav, nav, s)
}

/// `V_i;j` at `x` in the connection of `a`, row-major, with `V^i` and `V_i`.
fn lowered_covariant<M, V>(a: &M, v: &V, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>, MetricPoint), GeometryError>
where
    M: MetricSource + ?Sized,
    V: VectorSource + ?Sized,
{
    let mp = MetricPoint::new(a, x)?;
    let n = mp.n();
    let vj = v.vector_jets(x, 1)?;
    let vals: Vec<f64> = vj.iter().map(|j| j.value()).collect();
    let low = dense::mat_vec(mp.h(), n, &vals);
    let aj = mp.jets();
    let g = mp.christoffel();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut d = 0.0;
            for q in 0..n {
                d += aj[i * n + q].partial_wrt(&[j]) * vals[q] + mp.h()[i * n + q] * vj[q].partial_wrt(&[j]);
            }
            for r in 0..n {
                d -= g.get(r, i, j) * low[r];
            }
            cov[i * n + j] = d;
        }
    }
    Ok((cov, vals, mp))
}

/// `K_V(α) = (V_i;j + V_j;i) y^i y^j / (2α)`.
pub fn k_alpha<V: VectorSource + ?Sized>(k: &KropinaData, v: &V, s: &TangentSample) -> Result<f64, GeometryError> {
    let n = k.dim();
    let (cov, _, mp) = lowered_covariant(k, v, &s.x)?;
    let alpha = mp.inner(&s.y, &s.y).sqrt();
    if !(alpha > 0.0) {
        return Err(GeometryError::Numeric { what: "alpha", detail: "zero tangent vector".into(), point: s.x.clone() });
    }
    Ok(dense::quad(&cov, n, &s.y, &s.y) / alpha)
}

/// `K_V(β) = (b_j;i V^i + b^i V_i;j) y^j`.
pub fn k_beta<V: VectorSource + ?Sized>(k: &KropinaData, v: &V, s: &TangentSample) -> Result<f64, GeometryError> {
    let n = k.dim();
    let (vcov, vals, _) = lowered_covariant(k, v, &s.x)?;
    let rs = rs_tensors(k, &s.x)?;
    let mut out = 0.0;
    for j in 0..n {
        let mut c = 0.0;
        for i in 0..n {
            c += rs.cov[j * n + i] * vals[i] + rs.b_up[i] * vcov[i * n + j];
        }
        out += c * s.y[j];
    }
    Ok(out)
}

/// Named profiles `φ(s)` of an `(α, β)` metric `F = α φ(β/α)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `φ = 1/s`
    Kropina,
    /// `φ = 1 + s`
    Randers,
    /// `φ = 1`
    Riemann,
}

impl Profile {
    pub fn phi(self, s: f64) -> f64 {
        match self {
            Profile::Kropina => 1.0 / s,
            Profile::Randers => 1.0 + s,
            Profile::Riemann => 1.0,
        }
    }

    pub fn dphi(self, s: f64) -> f64 {
        match self {
            Profile::Kropina => -1.0 / (s * s),
            Profile::Randers => 1.0,
            Profile::Riemann => 0.0,
        }
    }
}

/// `F = α φ(β/α)` over the `(a, b)` fields of a Kropina presentation.
#[derive(Clone, Debug)]
pub struct AlphaBetaMetric {
    pub data: KropinaData,
    pub profile: Profile,
}

/// Both normal forms of the Killing equation at one sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KillingForms {
    /// `(φ − sφ') K_V(α) + φ' K_V(β)`
    pub general: f64,
    /// `2β K_V(α) − α K_V(β)`, defined for the Kropina profile.
    pub kropina: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl AlphaBetaMetric {
    pub fn new(data: KropinaData, profile: Profile) -> Self {
        AlphaBetaMetric { data, profile }
    }

    /// `(α, β)` at the sample.
    pub fn alpha_beta(&self, s: &TangentSample) -> Result<(f64, f64), GeometryError> {
        let (a, b, _) = self.data.values(&s.x)?;
        let n = self.data.dim();
        Ok((dense::quad(&a, n, &s.y, &s.y).sqrt(), b.iter().zip(&s.y).map(|(b, y)| b * y).sum()))
    }

    pub fn eval(&self, s: &TangentSample) -> Result<f64, GeometryError> {
        let (alpha, beta) = self.alpha_beta(s)?;
        if self.profile == Profile::Kropina && !(beta > 0.0) {
            return Err(GeometryError::ConicViolation { w0: beta, point: s.x.clone() });
        }
        Ok(alpha * self.profile.phi(beta / alpha))
    }

    pub fn killing_forms<V: VectorSource + ?Sized>(&self, v: &V, s: &TangentSample) -> Result<KillingForms, GeometryError> {
        let (alpha, beta) = self.alpha_beta(s)?;
        let sv = beta / alpha;
        let ka = k_alpha(&self.data, v, s)?;
        let kb = k_beta(&self.data, v, s)?;
        let p = self.profile;
        let general = (p.phi(sv) - sv * p.dphi(sv)) * ka + p.dphi(sv) * kb;
        let kropina = (p == Profile::Kropina).then_some(2.0 * beta * ka - alpha * kb);
        Ok(KillingForms { general, kropina, alpha, beta })
    }
}

/// The Killing equation along `V` in `(α, β)` form, with the Kropina
/// normal form when it applies.
pub fn alpha_beta_killing_eq<V: VectorSource + ?Sized>(m: &AlphaBetaMetric, v: &V, s: &TangentSample) -> Result<KillingForms, GeometryError> {
    m.killing_forms(v, s)
}

/// `b_t;s + b_s;t = c(x) a_st`, with the transvected equation
/// `b_t;s b^s + b^s b_s;t = c b_t` bounded by the primary misfit.
pub fn conformal_killing_test(k: &KropinaData, points: &[Vec<f64>], tol: f64) -> Result<PredicateEntry, GeometryError> {
    let mut res = Vec::with_capacity(points.len());
    let mut cs = Vec::with_capacity(points.len());
    let mut bound_ok = true;
    let mut worst_first = 0.0f64;
    for p in points {
        let rs = rs_tensors(k, p)?;
        let n = rs.n;
        let two_r: Vec<f64> = rs.r.iter().map(|v| 2.0 * v).collect();
        let fit = fit_proportional(&two_r, &rs.a, n);
        let first: Vec<f64> = (0..n).map(|t| (0..n).map(|s| two_r[t * n + s] * rs.b_up[s]).sum::<f64>() - fit.c * rs.b[t]).collect();
        let fr = dense::norm(&first);
        worst_first = worst_first.max(fr);
        bound_ok &= fr <= fit.misfit * dense::norm(&rs.b_up) * (1.0 + 1e-9) + 1e-13;
        res.push(fit.misfit);
        cs.push(fit.c);
    }
    let max = res.iter().cloned().fold(0.0, f64::max);
    let mean = if res.is_empty() { 0.0 } else { res.iter().sum::<f64>() / res.len() as f64 };
    let verdict = max <= tol;
    let mut cross_checks = vec![CrossCheck::flag("transvected bound", bound_ok, true)];
    if verdict {
        cross_checks.push(CrossCheck::new("transvected equation", worst_first, tol, true));
    }
    Ok(PredicateEntry { name: "conformal-killing".into(), residual_max: max, residual_mean: mean, fitted_scalars: cs, verdict, cross_checks, note: None })
}

/// A point of a flow together with the transported tangent vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowState {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("trajectory left the chart at t = {t}: {}", crate::error::fmt_point(x))]
    ChartExit { t: f64, x: Vec<f64>, partial: Vec<FlowState> },
    #[error("geodesic left the conic domain at t = {t}: W_0 = {w0}")]
    ConicExit { t: f64, w0: f64, partial: Vec<FlowState> },
    #[error("step size {0} is too small")]
    StepUnderflow(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl FlowError {
    /// States computed before the failure.
    pub fn partial(&self) -> &[FlowState] {
        match self {
            FlowError::ChartExit { partial, .. } | FlowError::ConicExit { partial, .. } => partial,
            _ => &[],
        }
    }
}

fn inside(bounds: &[(f64, f64)], x: &[f64]) -> bool {
    x.iter().zip(bounds).all(|(v, &(a, b))| *v >= a && *v <= b)
}

fn steps_for(span: f64, dt: f64) -> Result<(usize, f64), FlowError> {
    if !(dt.is_finite() && dt > 1e-12) {
        return Err(FlowError::StepUnderflow(dt));
    }
    let steps = (span.abs() / dt).round().max(1.0) as usize;
    Ok((steps, span / steps as f64))
}

fn axpy(a: &[f64], h: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(a, d)| a + h * d).collect()
}

/// One classical Runge–Kutta step for a state split into two halves.
fn rk4<F>(z: &[f64], h: f64, f: &F) -> Result<Vec<f64>, GeometryError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, GeometryError>,
{
    let k1 = f(z)?;
    let k2 = f(&axpy(z, 0.5 * h, &k1))?;
    let k3 = f(&axpy(z, 0.5 * h, &k2))?;
    let k4 = f(&axpy(z, h, &k3))?;
    Ok(z.iter().enumerate().map(|(i, v)| v + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// RK4 integration of `ẋ = V(x)`, `ẏ^i = ∂_j V^i y^j` over `[0, span]`
/// (span may be negative). Leaving `bounds` is an error carrying the
/// states computed so far.
pub fn integrate_flow<V: VectorSource + ?Sized>(v: &V, bounds: &[(f64, f64)], s0: &FlowState, span: f64, dt: f64) -> Result<Vec<FlowState>, FlowError> {
    let n = v.dim();
    let (steps, h) = steps_for(span, dt)?;
    let rhs = |z: &[f64]| -> Result<Vec<f64>, GeometryError> {
        let vj = v.vector_jets(&z[..n], 1)?;
        let mut out = Vec::with_capacity(2 * n);
        out.extend(vj.iter().map(|j| j.value()));
        for i in 0..n {
            out.push((0..n).map(|j| vj[i].partial_wrt(&[j]) * z[n + j]).sum());
        }
        Ok(out)
    };
    let mut z: Vec<f64> = s0.x.iter().chain(&s0.y).cloned().collect();
    let mut out = vec![s0.clone()];
    if !inside(bounds, &s0.x) {
        return Err(FlowError::ChartExit { t: s0.t, x: s0.x.clone(), partial: Vec::new() });
    }
    for k in 1..=steps {
        z = rk4(&z, h, &rhs)?;
        let st = FlowState { t: s0.t + k as f64 * h, x: z[..n].to_vec(), y: z[n..].to_vec() };
        if !inside(bounds, &st.x) {
            return Err(FlowError::ChartExit { t: st.t, x: st.x, partial: out });
        }
        out.push(st);
    }
    Ok(out)
}

/// Final state of [`integrate_flow`].
pub fn flow_to<V: VectorSource + ?Sized>(v: &V, bounds: &[(f64, f64)], x: &[f64], y: &[f64], span: f64, dt: f64) -> Result<FlowState, FlowError> {
    let s0 = FlowState { t: 0.0, x: x.to_vec(), y: y.to_vec() };
    Ok(integrate_flow(v, bounds, &s0, span, dt)?.pop().expect("at least the initial state"))
}

/// Largest changes of `F(x, y)` and `h(y, y)` along a flow of the wind.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowInvariants {
    pub max_df: f64,
    pub max_dh: f64,
    pub steps: usize,
}

pub fn flow_invariants(nav: &NavigationData, states: &[FlowState]) -> Result<FlowInvariants, GeometryError> {
    let n = nav.dim();
    let first = &states[0];
    let f0 = kropina::eval_f(nav, &TangentSample::new(first.x.clone(), first.y.clone()))?;
    let (h, _) = nav.values(&first.x)?;
    let h0 = dense::quad(&h, n, &first.y, &first.y);
    let (mut df, mut dh) = (0.0f64, 0.0f64);
    for s in states {
        let (h, _) = nav.values(&s.x)?;
        dh = dh.max((dense::quad(&h, n, &s.y, &s.y) - h0).abs());
        // a transported vector may leave the cone when the flow is not an isometry
        let f = kropina::eval_f(nav, &TangentSample::new(s.x.clone(), s.y.clone())).unwrap_or(f64::INFINITY);
        df = df.max((f - f0).abs());
    }
    Ok(FlowInvariants { max_df: df, max_dh: dh, steps: states.len() - 1 })
}

/// `d/dt g(φ_t x, dφ_t y)` at `t = 0` by Richardson-extrapolated central
/// differences over short RK4 flows of `v`.
pub fn flow_derivative<V, G>(v: &V, bounds: &[(f64, f64)], s: &TangentSample, g: G) -> Result<f64, FlowError>
where
    V: VectorSource + ?Sized,
    G: Fn(&[f64], &[f64]) -> Result<f64, GeometryError>,
{
    let d = |delta: f64| -> Result<f64, FlowError> {
        let p = flow_to(v, bounds, &s.x, &s.y, delta, delta / 8.0)?;
        let m = flow_to(v, bounds, &s.x, &s.y, -delta, delta / 8.0)?;
        Ok((g(&p.x, &p.y)? - g(&m.x, &m.y)?) / (2.0 * delta))
    };
    let (d1, d2) = (d(4e-3)?, d(2e-3)?);
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Which spray drives a geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeodesicMode {
    /// `G^i` of the Kropina metric
    Finsler,
    /// `½ Γ^i_jk y^j y^k` of `h`
    Riemann,
}

/// Uniformly sampled solution of `ẍ + 2G(x, ẋ) = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicTrack {
    pub mode: GeodesicMode,
    pub method: &'static str,
    pub dt: f64,
    pub states: Vec<FlowState>,
    /// `F(x, ẋ)` in Finsler mode, `|ẋ|_h` in Riemann mode.
    pub speed: Vec<f64>,
}

impl GeodesicTrack {
    /// Largest deviation of the speed from its initial value.
    pub fn speed_drift(&self) -> f64 {
        let s0 = self.speed[0];
        self.speed.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max)
    }

    /// Largest pointwise distance to another track at the same parameters.
    pub fn max_gap(&self, other: &GeodesicTrack) -> f64 {
        self.states.iter().zip(&other.states).map(|(a, b)| dense::norm(&axpy(&a.x, -1.0, &b.x))).fold(0.0, f64::max)
    }
}

fn christoffel_first_order(nav: &NavigationData, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = nav.dim();
    let hj = nav.metric_jets(x, 1)?;
    let h: Vec<f64> = hj.iter().map(|j| j.value()).collect();
    let inv = dense::spd_inverse(&h, n).ok_or_else(|| GeometryError::NotPositiveDefinite { what: "metric", point: x.to_vec() })?;
    let d = |i: usize, j: usize, l: usize| hj[i * n + j].partial_wrt(&[l]);
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] = (0..n).map(|l| 0.5 * inv[i * n + l] * (d(l, k, j) + d(l, j, k) - d(j, k, l))).sum();
            }
        }
    }
    Ok(out)
}

/// `G^i(x, y)` for the chosen mode.
pub fn spray_at(nav: &NavigationData, mode: GeodesicMode, x: &[f64], y: &[f64]) -> Result<Vec<f64>, GeometryError> {
    match mode {
        GeodesicMode::Finsler => kropina::spray_value(nav, &TangentSample::new(x.to_vec(), y.to_vec())),
        GeodesicMode::Riemann => {
            let n = nav.dim();
            let g = christoffel_first_order(nav, x)?;
            Ok((0..n)
                .map(|i| {
                    let mut acc = 0.0;
                    for j in 0..n {
                        for k in 0..n {
                            acc += g[(i * n + j) * n + k] * y[j] * y[k];
                        }
                    }
                    0.5 * acc
                })
                .collect())
        }
    }
}

fn speed(nav: &NavigationData, mode: GeodesicMode, x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
    match mode {
        GeodesicMode::Finsler => kropina::eval_f(nav, &TangentSample::new(x.to_vec(), y.to_vec())),
        GeodesicMode::Riemann => {
            let (h, _) = nav.values(x)?;
            Ok(dense::quad(&h, nav.dim(), y, y).sqrt())
        }
    }
}

/// RK4 integration of the geodesic equation. In Finsler mode the initial
/// vector is rescaled to `F(x0, y0) = 1` and the track must stay in the
/// conic domain.
pub fn integrate_geodesic(
    nav: &NavigationData,
    mode: GeodesicMode,
    bounds: &[(f64, f64)],
    x0: &[f64],
    y0: &[f64],
    span: f64,
    dt: f64,
) -> Result<GeodesicTrack, FlowError> {
    let n = nav.dim();
    let (steps, h) = steps_for(span, dt)?;
    let mut y = y0.to_vec();
    if mode == GeodesicMode::Finsler {
        let f = kropina::eval_f(nav, &TangentSample::new(x0.to_vec(), y0.to_vec()))?;
        y.iter_mut().for_each(|v| *v /= f);
    }
    if !inside(bounds, x0) {
        return Err(FlowError::ChartExit { t: 0.0, x: x0.to_vec(), partial: Vec::new() });
    }
    let rhs = |z: &[f64]| -> Result<Vec<f64>, GeometryError> {
        let g = spray_at(nav, mode, &z[..n], &z[n..])?;
        Ok(z[n..].iter().cloned().chain(g.iter().map(|v| -2.0 * v)).collect())
    };
    let mut z: Vec<f64> = x0.iter().chain(&y).cloned().collect();
    let mut states = vec![FlowState { t: 0.0, x: x0.to_vec(), y: y.clone() }];
    let mut speeds = vec![speed(nav, mode, x0, &y)?];
    for k in 1..=steps {
        let t = k as f64 * h;
        z = match rk4(&z, h, &rhs) {
            Ok(z) => z,
            Err(GeometryError::ConicViolation { w0, .. }) => return Err(FlowError::ConicExit { t, w0, partial: states }),
            Err(e) => return Err(e.into()),
        };
        let st = FlowState { t, x: z[..n].to_vec(), y: z[n..].to_vec() };
        if !inside(bounds, &st.x) {
            return Err(FlowError::ChartExit { t, x: st.x, partial: states });
        }
        match speed(nav, mode, &st.x, &st.y) {
            Ok(s) => speeds.push(s),
            Err(GeometryError::ConicViolation { w0, .. }) => return Err(FlowError::ConicExit { t, w0, partial: states }),
            Err(e) => return Err(e.into()),
        }
        states.push(st);
    }
    Ok(GeodesicTrack { mode, method: "rk4", dt: h, states, speed: speeds })
}

/// Pushes a Finsler geodesic through the flow of the wind for time
/// `t_flow` and returns the largest geodesic-equation residual
/// `|ẍ + 2G(x, ẋ)|` of the image, with `ẍ` from fourth-order differences
/// of the transported velocities at up to `stations` interior points.
pub fn isometry_geodesic_test(
    nav: &NavigationData,
    bounds: &[(f64, f64)],
    track: &GeodesicTrack,
    t_flow: f64,
    flow_dt: f64,
    stations: usize,
) -> Result<f64, FlowError> {
    let m = track.states.len();
    if m < 5 {
        return Ok(0.0);
    }
    let n = nav.dim();
    let dtau = track.dt;
    let count = stations.clamp(1, m - 4);
    let mut worst = 0.0f64;
    for q in 0..count {
        let c = 2 + (q * (m - 5)) / count.max(2).saturating_sub(1).max(1);
        let c = c.min(m - 3);
        let mut img = Vec::with_capacity(5);
        for off in [-2i64, -1, 0, 1, 2] {
            let s = &track.states[(c as i64 + off) as usize];
            img.push(flow_to(nav, bounds, &s.x, &s.y, t_flow, flow_dt)?);
        }
        let acc: Vec<f64> = (0..n).map(|i| (-img[4].y[i] + 8.0 * img[3].y[i] - 8.0 * img[1].y[i] + img[0].y[i]) / (12.0 * dtau)).collect();
        let g = spray_at(nav, GeodesicMode::Finsler, &img[2].x, &img[2].y)?;
        let r: Vec<f64> = (0..n).map(|i| acc[i] + 2.0 * g[i]).collect();
        worst = worst.max(dense::norm(&r));
    }
    Ok(worst)
}

/// CSV with header `t,x1..xn,y1..yn,F`; `F` is empty outside the conic
/// domain.
pub fn states_csv(nav: &NavigationData, states: &[FlowState]) -> String {
    let n = nav.dim();
    let mut out = String::from("t");
    for i in 1..=n {
        let _ = write!(out, ",x{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",y{i}");
    }
    out.push_str(",F\n");
    for s in states {
        let _ = write!(out, "{}", s.t);
        for v in s.x.iter().chain(&s.y) {
            let _ = write!(out, ",{v}");
        }
        match kropina::eval_f(nav, &TangentSample::new(s.x.clone(), s.y.clone())) {
            Ok(f) => {
                let _ = writeln!(out, ",{f}");
            }
            Err(_) => out.push_str(",\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{MetricField, VectorField};
    use jetcalc::parse;

    fn flat() -> NavigationData {
        NavigationData::new(MetricField::euclidean(2), VectorField::new(vec![parse("1", 2).unwrap(), parse("0", 2).unwrap()]).unwrap()).unwrap()
    }

    #[test]
    fn flat_flow_translates() {
        let nav = flat();
        let b = [(-2.0, 2.0), (-2.0, 2.0)];
        let end = flow_to(&nav, &b, &[0.0, 0.0], &[0.3, 0.4], 1.0, 1e-3).unwrap();
        assert!((end.x[0] - 1.0).abs() < 1e-12 && end.x[1].abs() < 1e-15);
        assert_eq!(end.y, vec![0.3, 0.4]);
    }

    #[test]
    fn chart_exit_keeps_partial_track() {
        let nav = flat();
        let b = [(-0.505, 0.505), (-0.505, 0.505)];
        let err = integrate_flow(&nav, &b, &FlowState { t: 0.0, x: vec![0.0, 0.0], y: vec![1.0, 0.0] }, 1.0, 1e-2).unwrap_err();
        assert!(matches!(err, FlowError::ChartExit { .. }));
        assert_eq!(err.partial().len(), 51);
    }

    #[test]
    fn profiles() {
        assert_eq!(Profile::Kropina.phi(0.5), 2.0);
        assert_eq!(Profile::Kropina.dphi(0.5), -4.0);
        assert_eq!(Profile::Randers.phi(0.5), 1.5);
        assert_eq!(Profile::Riemann.dphi(0.5), 0.0);
    }

    #[test]
    fn flat_geodesic_is_straight() {
        let nav = flat();
        let b = [(-2.0, 2.0), (-2.0, 2.0)];
        let t = integrate_geodesic(&nav, GeodesicMode::Finsler, &b, &[0.0, 0.0], &[1.0, 1.0], 0.5, 1e-2).unwrap();
        // F(y) = 1 at y = (1, 1), so the vector is kept
        let last = t.states.last().unwrap();
        assert!((last.x[0] - 0.5).abs() < 1e-12 && (last.x[1] - 0.5).abs() < 1e-12);
        assert!(t.speed_drift() < 1e-14);
    }
}
