//! Scene files: a chart, one presentation of a Kropina structure, the
//! sampling box, tolerances and an optional table of expected verdicts.
//!
//! ```toml
//! [scene]
//! name = "hopf-s3"
//! dim = 3
//! presentation = "navigation"   # or "alphabeta"
//! seed = 7
//!
//! [metric]                      # h<i><j> (navigation) or a<i><j> (alphabeta)
//! h11 = "4/(1+x1^2+x2^2+x3^2)^2"
//!
//! [wind]                        # navigation only
//! W1 = "x1*x3 - x2"
//!
//! [oneform]                     # alphabeta only; kappa is optional
//! b1 = "2"
//! kappa = "0"
//!
//! [sampling]
//! box = [[-2.0, 2.0], [-2.0, 2.0], [-2.0, 2.0]]
//! points = 50
//! tangents_per_point = 4
//! flags = 50
//! dt = 1e-3
//! cone_margin = 0.2             # minimum W_0 / |y|_h of sampled tangents
//!
//! [tolerances]
//! identity = 1e-8
//! predicate = 1e-6
//! ode = 1e-5
//!
//! [expected]
//! T-wB = true
//! ```
//!
//! Unlisted off-diagonal metric entries are zero.

use std::collections::BTreeMap;
use std::path::Path;

use jetcalc::{parse, AddOp, Expr, Func, MulOp, ParseError};
use serde::Serialize;
use thiserror::Error;
use toml::{Table, Value};

use crate::error::GeometryError;
use crate::fields::{CovectorField, MetricField, MetricSource, VectorField, MAX_DIM};
use crate::kropina::{self, KropinaData, NavigationData};

/// Bound on `|L_W h|` over the grid for built-ins expected to be Killing.
const FIXTURE_KILLING_TOL: f64 = 1e-9;

/// Names of the compiled-in scenes.
pub const BUILTINS: [&str; 4] = ["flat-const", "shear", "hopf-s3", "prod-r-s2"];

const FLAT: &str = include_str!("../scenes/flat-const.toml");
const SHEAR: &str = include_str!("../scenes/shear.toml");
const HOPF: &str = include_str!("../scenes/hopf-s3.toml");
const PROD: &str = include_str!("../scenes/prod-r-s2.toml");

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scene file: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Expression {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Constraint(#[from] GeometryError),
    #[error("unknown built-in scene `{0}`")]
    UnknownBuiltin(String),
    #[error("built-in scene `{name}` fails its self-check: {detail}")]
    Fixture { name: String, detail: String },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Schema { path: path.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Presentation {
    Navigation,
    Alphabeta,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub identity: f64,
    pub predicate: f64,
    pub ode: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { identity: 1e-8, predicate: 1e-6, ode: 1e-5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sampling {
    pub points: usize,
    pub tangents_per_point: usize,
    pub flags: usize,
    pub dt: f64,
    /// Lower bound on `W_0 / |y|_h` for sampled tangent vectors.
    pub cone_margin: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { points: 50, tangents_per_point: 4, flags: 50, dt: 1e-3, cone_margin: crate::sampling::DEFAULT_CONE_MARGIN }
    }
}

/// A validated scene with both presentations available.
#[derive(Clone, Debug)]
pub struct Scene {
    pub name: String,
    pub dim: usize,
    pub presentation: Presentation,
    pub seed: u64,
    pub bounds: Vec<(f64, f64)>,
    pub sampling: Sampling,
    pub tolerances: Tolerances,
    pub expected: BTreeMap<String, bool>,
    /// Expression sources keyed by field path, e.g. `metric.h11`.
    pub sources: BTreeMap<String, String>,
    pub nav: NavigationData,
    pub kropina: KropinaData,
}

/// What a scene reports about itself in suite output.
#[derive(Clone, Debug, Serialize)]
pub struct SceneEcho {
    pub name: String,
    pub dim: usize,
    pub presentation: Presentation,
    pub fields: BTreeMap<String, String>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub sampling: Sampling,
}

impl Scene {
    pub fn builtin(name: &str) -> Result<Scene, SceneError> {
        let src = match name {
            "flat-const" => FLAT,
            "shear" => SHEAR,
            "hopf-s3" => HOPF,
            "prod-r-s2" => PROD,
            _ => return Err(SceneError::UnknownBuiltin(name.to_string())),
        };
        let scene = Scene::from_toml_str(src)?;
        scene.self_check()?;
        Ok(scene)
    }

    /// A fixture declared weakly Berwald must have a Killing wind on the
    /// whole validation grid.
    fn self_check(&self) -> Result<(), SceneError> {
        if self.expected.get("T-wB") != Some(&true) {
            return Ok(());
        }
        for p in grid_points(&self.bounds) {
            let lie = crate::dense::frobenius(&self.nav.chart_point(&p)?.lie_derivative_metric());
            if lie > FIXTURE_KILLING_TOL {
                return Err(SceneError::Fixture { name: self.name.clone(), detail: format!("|L_W h| = {lie:e} at {}", crate::error::fmt_point(&p)) });
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Scene, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|e| SceneError::Io { path: path.display().to_string(), source: e })?;
        Scene::from_toml_str(&text)
    }

    /// A built-in name or a path to a scene file.
    pub fn resolve(arg: &str) -> Result<Scene, SceneError> {
        if BUILTINS.contains(&arg) {
            Scene::builtin(arg)
        } else {
            Scene::load(Path::new(arg))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Scene, SceneError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| SceneError::Syntax(e.to_string()))?;
        RawScene::from_table(&table)?.build()
    }

    pub fn echo(&self) -> SceneEcho {
        SceneEcho {
            name: self.name.clone(),
            dim: self.dim,
            presentation: self.presentation,
            fields: self.sources.clone(),
            bounds: self.bounds.iter().map(|&(a, b)| [a, b]).collect(),
            sampling: self.sampling,
        }
    }

    /// Midpoint of the box.
    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|&(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.bounds).all(|(v, &(a, b))| *v >= a && *v <= b)
    }

    /// A copy whose wind is `(W + δV) / |W + δV|_h`. Only for scenes given
    /// in the navigation presentation; the expected-verdict table is dropped.
    pub fn perturbed(&self, v: &[Expr], delta: f64, name: &str) -> Result<Scene, SceneError> {
        let (h, w) = match &self.nav {
            NavigationData::Explicit { h, w } => (h, w),
            _ => return Err(schema("wind", "perturbation needs a scene in the navigation presentation")),
        };
        if v.len() != self.dim {
            return Err(schema("wind", format!("perturbation has {} components, expected {}", v.len(), self.dim)));
        }
        let n = self.dim;
        let raw: Vec<Expr> =
            (0..n).map(|i| Expr::Sum(vec![(AddOp::Plus, w.components()[i].clone()), (AddOp::Plus, Expr::num(delta) * v[i].clone())])).collect();
        let mut sq = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let hij = h.entry(i, j);
                if hij.is_zero() {
                    continue;
                }
                sq.push((AddOp::Plus, Expr::Product(vec![(MulOp::Times, hij.clone()), (MulOp::Times, raw[i].clone()), (MulOp::Times, raw[j].clone())])));
            }
        }
        let norm = Expr::call(Func::Sqrt, Expr::Sum(sq));
        let comps: Vec<Expr> = raw.into_iter().map(|c| Expr::Product(vec![(MulOp::Times, c), (MulOp::Over, norm.clone())])).collect();
        let mut sources = self.sources.clone();
        for (i, c) in comps.iter().enumerate() {
            sources.insert(format!("wind.W{}", i + 1), c.to_string());
        }
        let nav = NavigationData::new(h.clone(), VectorField::new(comps)?)?;
        let grid = grid_points(&self.bounds);
        validate_navigation(&nav, &grid)?;
        let kropina = kropina::from_navigation(&nav, &grid)?;
        Ok(Scene { name: name.to_string(), expected: BTreeMap::new(), sources, nav, kropina, ..self.clone() })
    }
}

/// `5^n` points of the box, ordered by distance from its centre.
pub fn grid_points(bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let n = bounds.len();
    let mut pts = Vec::with_capacity(5usize.pow(n as u32));
    let mut idx = vec![0usize; n];
    'outer: loop {
        pts.push(idx.iter().zip(bounds).map(|(&k, &(a, b))| a + (b - a) * k as f64 / 4.0).collect::<Vec<f64>>());
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < 5 {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    let centre: Vec<f64> = bounds.iter().map(|&(a, b)| 0.5 * (a + b)).collect();
    let dist = |p: &Vec<f64>| p.iter().zip(&centre).map(|(a, c)| (a - c) * (a - c)).sum::<f64>();
    pts.sort_by(|p, q| dist(p).total_cmp(&dist(q)));
    pts
}

fn validate_navigation(nav: &NavigationData, grid: &[Vec<f64>]) -> Result<(), GeometryError> {
    for p in grid {
        let (h, _) = nav.values(p)?;
        if !crate::dense::is_positive_definite(&h, nav.dim()) {
            return Err(GeometryError::NotPositiveDefinite { what: "metric", point: p.clone() });
        }
    }
    nav.check_unit(grid, kropina::UNIT_TOL)
}

fn validate_alpha_beta(k: &KropinaData, grid: &[Vec<f64>]) -> Result<(), GeometryError> {
    for p in grid {
        let a = k.metric_jets(p, 0)?.iter().map(|j| j.value()).collect::<Vec<_>>();
        if !crate::dense::is_positive_definite(&a, k.dim()) {
            return Err(GeometryError::NotPositiveDefinite { what: "alpha metric", point: p.clone() });
        }
    }
    k.check_conformal(grid, kropina::CONFORMAL_TOL)
}

struct RawScene {
    name: String,
    dim: usize,
    presentation: Presentation,
    seed: u64,
    bounds: Vec<(f64, f64)>,
    sampling: Sampling,
    tolerances: Tolerances,
    expected: BTreeMap<String, bool>,
    sources: BTreeMap<String, String>,
    metric: Vec<Expr>,
    vector: Vec<Expr>,
    kappa: Option<Expr>,
}

fn section<'a>(root: &'a Table, name: &str, required: bool) -> Result<Option<&'a Table>, SceneError> {
    match root.get(name) {
        Some(Value::Table(t)) => Ok(Some(t)),
        Some(_) => Err(schema(name, "expected a section")),
        None if required => Err(schema(name, "missing section")),
        None => Ok(None),
    }
}

fn get_str(t: &Table, sec: &str, key: &str) -> Result<Option<String>, SceneError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(schema(format!("{sec}.{key}"), "expected a string")),
    }
}

fn get_int(t: &Table, sec: &str, key: &str) -> Result<Option<i64>, SceneError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(v)) => Ok(Some(*v)),
        Some(_) => Err(schema(format!("{sec}.{key}"), "expected an integer")),
    }
}

fn get_float(t: &Table, sec: &str, key: &str) -> Result<Option<f64>, SceneError> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Float(v)) => Ok(Some(*v)),
        Some(Value::Integer(v)) => Ok(Some(*v as f64)),
        Some(_) => Err(schema(format!("{sec}.{key}"), "expected a number")),
    }
}

fn positive_float(t: &Table, sec: &str, key: &str, default: f64) -> Result<f64, SceneError> {
    let v = get_float(t, sec, key)?.unwrap_or(default);
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(schema(format!("{sec}.{key}"), "must be positive"))
    }
}

fn count(t: &Table, sec: &str, key: &str, default: usize) -> Result<usize, SceneError> {
    match get_int(t, sec, key)? {
        None => Ok(default),
        Some(v) if v >= 1 => Ok(v as usize),
        Some(_) => Err(schema(format!("{sec}.{key}"), "must be at least 1")),
    }
}

fn reject_unknown(t: &Table, sec: &str, allowed: &[&str]) -> Result<(), SceneError> {
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(schema(format!("{sec}.{k}"), "unknown key"));
        }
    }
    Ok(())
}

/// Parses `"<prefix><i><j>"` with single-digit indices in `1..=n`.
fn index_pair(key: &str, prefix: char, n: usize) -> Option<(usize, usize)> {
    let rest = key.strip_prefix(prefix)?;
    let d: Vec<usize> = rest.chars().map(|c| c.to_digit(10).map(|v| v as usize)).collect::<Option<_>>()?;
    match d.as_slice() {
        [i, j] if (1..=n).contains(i) && (1..=n).contains(j) => Some((i - 1, j - 1)),
        _ => None,
    }
}

fn index_one(key: &str, prefix: char, n: usize) -> Option<usize> {
    let i: usize = key.strip_prefix(prefix)?.parse().ok()?;
    (1..=n).contains(&i).then(|| i - 1)
}

impl RawScene {
    fn from_table(root: &Table) -> Result<RawScene, SceneError> {
        reject_unknown(root, "", &["scene", "metric", "wind", "oneform", "sampling", "tolerances", "expected"]).map_err(|e| match e {
            SceneError::Schema { path, .. } => schema(path.trim_start_matches('.'), "unknown section"),
            other => other,
        })?;
        let sc = section(root, "scene", true)?.unwrap();
        reject_unknown(sc, "scene", &["name", "dim", "presentation", "seed"])?;
        let name = get_str(sc, "scene", "name")?.ok_or_else(|| schema("scene.name", "missing"))?;
        let dim = get_int(sc, "scene", "dim")?.ok_or_else(|| schema("scene.dim", "missing"))?;
        if !(2..=MAX_DIM as i64).contains(&dim) {
            return Err(schema("scene.dim", format!("must be between 2 and {MAX_DIM}")));
        }
        let n = dim as usize;
        let presentation = match get_str(sc, "scene", "presentation")?.as_deref() {
            None | Some("navigation") => Presentation::Navigation,
            Some("alphabeta") => Presentation::Alphabeta,
            Some(other) => return Err(schema("scene.presentation", format!("expected `navigation` or `alphabeta`, found `{other}`"))),
        };
        let seed = match sc.get("seed") {
            None => 0,
            Some(Value::Integer(v)) => *v as u64,
            Some(_) => return Err(schema("scene.seed", "expected an integer")),
        };

        let mut sources = BTreeMap::new();
        let mut parse_at = |path: String, src: &str| -> Result<Expr, SceneError> {
            let e = parse(src, n).map_err(|source| SceneError::Expression { path: path.clone(), source })?;
            sources.insert(path, src.to_string());
            Ok(e)
        };

        let prefix = if presentation == Presentation::Navigation { 'h' } else { 'a' };
        let mt = section(root, "metric", true)?.unwrap();
        let mut metric: Vec<Option<(Expr, String)>> = vec![None; n * n];
        for (key, val) in mt {
            let path = format!("metric.{key}");
            let (i, j) = index_pair(key, prefix, n).ok_or_else(|| schema(&path, format!("expected a key {prefix}<i><j> with 1 <= i, j <= {n}")))?;
            let src = match val {
                Value::String(s) => s.clone(),
                _ => return Err(schema(&path, "expected an expression string")),
            };
            let e = parse_at(path.clone(), &src)?;
            for (a, b) in [(i, j), (j, i)] {
                if let Some((prev, pkey)) = &metric[a * n + b] {
                    if *prev != e {
                        return Err(schema(&path, format!("conflicts with metric.{pkey}")));
                    }
                }
            }
            metric[i * n + j] = Some((e.clone(), key.clone()));
            metric[j * n + i] = Some((e, key.clone()));
        }
        for i in 0..n {
            if metric[i * n + i].is_none() {
                return Err(schema(format!("metric.{prefix}{}{}", i + 1, i + 1), "missing diagonal entry"));
            }
        }
        let metric: Vec<Expr> = metric.into_iter().map(|m| m.map(|p| p.0).unwrap_or(Expr::num(0.0))).collect();

        let (vec_sec, vec_prefix) = if presentation == Presentation::Navigation { ("wind", 'W') } else { ("oneform", 'b') };
        let other = if presentation == Presentation::Navigation { "oneform" } else { "wind" };
        if root.contains_key(other) {
            return Err(schema(
                other,
                format!("not used by the {} presentation", if presentation == Presentation::Navigation { "navigation" } else { "alphabeta" }),
            ));
        }
        let vt = section(root, vec_sec, true)?.unwrap();
        let mut vector: Vec<Option<Expr>> = vec![None; n];
        let mut kappa = None;
        for (key, val) in vt {
            let path = format!("{vec_sec}.{key}");
            let src = match val {
                Value::String(s) => s.clone(),
                _ => return Err(schema(&path, "expected an expression string")),
            };
            if presentation == Presentation::Alphabeta && key == "kappa" {
                kappa = Some(parse_at(path, &src)?);
                continue;
            }
            let i = index_one(key, vec_prefix, n).ok_or_else(|| schema(&path, format!("expected a key {vec_prefix}<i> with 1 <= i <= {n}")))?;
            vector[i] = Some(parse_at(path, &src)?);
        }
        let vector: Vec<Expr> = vector
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| schema(format!("{vec_sec}.{vec_prefix}{}", i + 1), "missing component")))
            .collect::<Result<_, _>>()?;

        let mut sampling = Sampling::default();
        let mut bounds = None;
        if let Some(st) = section(root, "sampling", false)? {
            reject_unknown(st, "sampling", &["box", "points", "tangents_per_point", "flags", "dt", "cone_margin"])?;
            if let Some(b) = st.get("box") {
                bounds = Some(parse_box(b, n)?);
            }
            sampling.points = count(st, "sampling", "points", sampling.points)?;
            sampling.tangents_per_point = count(st, "sampling", "tangents_per_point", sampling.tangents_per_point)?;
            sampling.flags = count(st, "sampling", "flags", sampling.flags)?;
            sampling.dt = positive_float(st, "sampling", "dt", sampling.dt)?;
            sampling.cone_margin = positive_float(st, "sampling", "cone_margin", sampling.cone_margin)?;
            if sampling.cone_margin >= 1.0 {
                return Err(schema("sampling.cone_margin", "must be below 1"));
            }
        }
        let bounds = bounds.ok_or_else(|| schema("sampling.box", "missing"))?;

        let mut tolerances = Tolerances::default();
        if let Some(tt) = section(root, "tolerances", false)? {
            reject_unknown(tt, "tolerances", &["identity", "predicate", "ode"])?;
            tolerances.identity = positive_float(tt, "tolerances", "identity", tolerances.identity)?;
            tolerances.predicate = positive_float(tt, "tolerances", "predicate", tolerances.predicate)?;
            tolerances.ode = positive_float(tt, "tolerances", "ode", tolerances.ode)?;
        }

        let mut expected = BTreeMap::new();
        if let Some(et) = section(root, "expected", false)? {
            for (k, v) in et {
                if !crate::suite::SUITE_KEYS.contains(&k.as_str()) {
                    return Err(schema(format!("expected.{k}"), "unknown suite key"));
                }
                match v {
                    Value::Boolean(b) => {
                        expected.insert(k.clone(), *b);
                    }
                    _ => return Err(schema(format!("expected.{k}"), "expected true or false")),
                }
            }
        }
        Ok(RawScene { name, dim: n, presentation, seed, bounds, sampling, tolerances, expected, sources, metric, vector, kappa })
    }

    fn build(self) -> Result<Scene, SceneError> {
        let n = self.dim;
        let metric = MetricField::new(n, self.metric)?;
        let grid = grid_points(&self.bounds);
        let (nav, kropina) = match self.presentation {
            Presentation::Navigation => {
                let nav = NavigationData::new(metric, VectorField::new(self.vector)?)?;
                validate_navigation(&nav, &grid)?;
                let k = kropina::from_navigation(&nav, &grid)?;
                (nav, k)
            }
            Presentation::Alphabeta => {
                let k = KropinaData::new(metric, CovectorField::new(self.vector)?, self.kappa)?;
                validate_alpha_beta(&k, &grid)?;
                let nav = kropina::to_navigation(&k, &grid)?;
                (nav, k)
            }
        };
        Ok(Scene {
            name: self.name,
            dim: n,
            presentation: self.presentation,
            seed: self.seed,
            bounds: self.bounds,
            sampling: self.sampling,
            tolerances: self.tolerances,
            expected: self.expected,
            sources: self.sources,
            nav,
            kropina,
        })
    }
}

fn parse_box(v: &Value, n: usize) -> Result<Vec<(f64, f64)>, SceneError> {
    let rows = v.as_array().ok_or_else(|| schema("sampling.box", "expected an array of [lo, hi] pairs"))?;
    if rows.len() != n {
        return Err(schema("sampling.box", format!("expected {n} intervals, found {}", rows.len())));
    }
    let num = |v: &Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let path = format!("sampling.box[{i}]");
            let pair = r.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema(&path, "expected [lo, hi]"))?;
            let (lo, hi) = match (num(&pair[0]), num(&pair[1])) {
                (Some(a), Some(b)) => (a, b),
                _ => return Err(schema(&path, "bounds must be numbers")),
            };
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(schema(&path, "degenerate interval"));
            }
            Ok((lo, hi))
        })
        .collect()
}
