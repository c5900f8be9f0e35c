//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::max_abs;
use jetcalc::testing::{adaptive_partial, partial_index_lists, random_expr};
use jetcalc::{parse, Expr, OrderSpec};
use kropina::classify::{self, FLAG_SPREAD_TOL};
use kropina::dynamics::{self, AlphaBetaMetric, FlowState, GeodesicMode, Profile};
use kropina::kropina::{self as kr, eval_f, eval_f_alpha_beta};
use kropina::riemann::christoffel;
use kropina::sampling::{random_polynomial, sample_points, sample_tangent, sample_tangents, SplitMix64};
use kropina::scene::{grid_points, BUILTINS};
use kropina::suite::{run_suite, Selector, SuiteOptions};
use kropina::{CovectorField, KropinaData, MetricField, NavigationData, Scene, TangentSample};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const PREDICATE: f64 = 1e-6;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixtures() -> Vec<Scene> {
    BUILTINS.iter().map(|n| Scene::builtin(n).unwrap()).collect()
}

/// Five wind perturbations of each fixture, alternating `δ = 0` and `δ = 10⁻²`.
fn perturbed_scenes() -> Vec<Scene> {
    let mut rng = SplitMix64::new(0x5eed);
    let mut out = Vec::new();
    for base in fixtures() {
        for j in 0..5 {
            let v: Vec<Expr> = (0..base.dim).map(|_| random_polynomial(base.dim, 1, &mut rng)).collect();
            let delta = if j % 2 == 0 { 0.0 } else { 1e-2 };
            out.push(base.perturbed(&v, delta, &format!("{}~{j}", base.name)).unwrap());
        }
    }
    out
}

fn all_scenes() -> Vec<Scene> {
    let mut s = fixtures();
    s.extend(perturbed_scenes());
    s
}

fn scene_samples(s: &Scene, seed: u64) -> (Vec<Vec<f64>>, Vec<TangentSample>) {
    let mut rng = SplitMix64::new(seed);
    let pts = sample_points(&s.bounds, s.sampling.points, &mut rng);
    let ts = sample_tangents(&s.nav, &pts, s.sampling.tangents_per_point, s.sampling.cone_margin, &mut rng).unwrap();
    (pts, ts)
}

fn coeff(rng: &mut SplitMix64, r: f64) -> f64 {
    (rng.uniform(-r, r) * 1000.0).round() / 1000.0
}

/// A random `(a, b)` pair on `[-1, 1]^n`, diagonally dominant with `b_1`
/// bounded away from zero.
fn random_alpha_beta(rng: &mut SplitMix64) -> (KropinaData, Vec<(f64, f64)>) {
    let n = 2 + (rng.next_u64() % 2) as usize;
    let mut a = vec![Expr::num(0.0); n * n];
    for i in 0..n {
        let src = format!("1.5 + {}*sin({}*x{} + {})", coeff(rng, 0.4), coeff(rng, 2.0), 1 + (i + 1) % n, coeff(rng, 1.0));
        a[i * n + i] = parse(&src, n).unwrap();
        for j in i + 1..n {
            let e = parse(&format!("{}*x{}*x{}", coeff(rng, 0.2), i + 1, j + 1), n).unwrap();
            a[i * n + j] = e.clone();
            a[j * n + i] = e;
        }
    }
    let b: Vec<Expr> = (0..n)
        .map(|i| {
            let src =
                if i == 0 { format!("1 + {}*cos({}*x{n})", coeff(rng, 0.3), coeff(rng, 2.0)) } else { format!("{} + {}*x1", coeff(rng, 0.5), coeff(rng, 0.5)) };
            parse(&src, n).unwrap()
        })
        .collect();
    let k = KropinaData::new(MetricField::new(n, a).unwrap(), CovectorField::new(b).unwrap(), None).unwrap();
    (k, vec![(-1.0, 1.0); n])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn ac1() -> Outcome {
    let mut f_gap = 0.0f64;
    let mut conformal = 0.0f64;
    let mut count = 0;
    let mut rng = SplitMix64::new(101);
    let probe = "sin(x1)/4 + x2^2/10";
    for s in fixtures().into_iter().filter(|s| s.name != "flat-const") {
        let grid = grid_points(&s.bounds);
        let (_, ts) = scene_samples(&s, 1);
        for k in [kr::from_navigation(&s.nav, &grid).unwrap(), kr::from_navigation_gauge(&s.nav, parse(probe, s.dim).unwrap(), &grid).unwrap()] {
            let back = kr::to_navigation(&k, &grid).unwrap();
            for t in &ts {
                let f0 = eval_f(&s.nav, t).unwrap();
                f_gap = f_gap.max(rel(eval_f_alpha_beta(&k, t).unwrap(), f0)).max(rel(eval_f(&back, t).unwrap(), f0));
            }
            for p in &grid {
                conformal = conformal.max((k.conformal_product(p).unwrap() - 4.0).abs());
            }
        }
        count += 1;
    }
    for _ in 0..20 {
        let (k, bounds) = random_alpha_beta(&mut rng);
        let grid = grid_points(&bounds);
        let nav = kr::to_navigation(&k, &grid).unwrap();
        let again = kr::from_navigation(&nav, &grid).unwrap();
        let pts = sample_points(&bounds, 20, &mut rng);
        let ts = sample_tangents(&nav, &pts, 5, 0.2, &mut rng).unwrap();
        for t in &ts {
            let f0 = eval_f_alpha_beta(&k, t).unwrap();
            f_gap = f_gap.max(rel(eval_f(&nav, t).unwrap(), f0)).max(rel(eval_f_alpha_beta(&again, t).unwrap(), f0));
        }
        for p in grid.iter().chain(&pts) {
            conformal = conformal.max((k.conformal_product(p).unwrap() - 4.0).abs());
            conformal = conformal.max((again.conformal_product(p).unwrap() - 4.0).abs());
        }
        count += 1;
    }
    ensure(f_gap <= 1e-12 && conformal <= 1e-10, format!("{count} scenes, max F gap {f_gap:.1e}, max |e^k b^2 - 4| {conformal:.1e}"))
}

fn ac2(scenes: &[Scene]) -> Outcome {
    let mut disagreements = Vec::new();
    let mut trues = 0;
    for s in scenes {
        let (pts, ts) = scene_samples(s, 2);
        let wb = classify::weakly_berwald_test(&s.kropina, &pts, PREDICATE).unwrap().verdict;
        let nav = classify::nav_weakly_berwald_test(&s.nav, &pts, PREDICATE).unwrap().verdict;
        let mb = classify::mean_berwald_max(&s.nav, &ts).unwrap();
        if wb != nav || wb != (mb <= PREDICATE) || ts.len() != 200 {
            disagreements.push(format!("{} (wB {wb}, R {nav}, |G_ij| {mb:.1e})", s.name));
        }
        trues += wb as usize;
    }
    ensure(disagreements.is_empty(), format!("{} scenes, {trues} weakly Berwald; disagreements: {:?}", scenes.len(), disagreements))
}

fn ac3(scenes: &[Scene]) -> Outcome {
    let mut disagreements = Vec::new();
    let mut gap = 0.0f64;
    let mut trues = 0;
    for s in scenes {
        let (pts, ts) = scene_samples(s, 3);
        let b = classify::berwald_test(&s.kropina, &pts, PREDICATE).unwrap().verdict;
        let par = classify::nav_berwald_test(&s.nav, &pts, PREDICATE).unwrap().verdict;
        let curv = classify::berwald_curvature_max(&s.nav, &ts).unwrap();
        if b != par || b != (curv <= PREDICATE) {
            disagreements.push(format!("{} (B {b}, parallel {par}, |G_jkl| {curv:.1e})", s.name));
        }
        trues += b as usize;
        if b && !s.name.contains('~') {
            let n = s.dim;
            for t in &ts {
                let sj = kr::spray(&s.nav, t).unwrap();
                let g = christoffel(&s.nav, &t.x).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            gap = gap.max((sj.berwald(j, i, k) - g.get(i, j, k)).abs());
                        }
                    }
                }
            }
        }
    }
    ensure(
        disagreements.is_empty() && gap <= 1e-8,
        format!("{} scenes, {trues} Berwald; max |G_j^i_k - gamma| on Berwald fixtures {gap:.1e}; disagreements: {disagreements:?}", scenes.len()),
    )
}

fn ac4(scenes: &[Scene]) -> Outcome {
    let mut worst = 0.0f64;
    let mut killing = 0;
    let mut rng = SplitMix64::new(404);
    let mut navs: Vec<(NavigationData, Vec<(f64, f64)>)> = scenes.iter().map(|s| (s.nav.clone(), s.bounds.clone())).collect();
    for _ in 0..5 {
        let (k, bounds) = random_alpha_beta(&mut rng);
        navs.push((kr::to_navigation(&k, &grid_points(&bounds)).unwrap(), bounds));
    }
    for (nav, bounds) in &navs {
        let n = bounds.len();
        let grid = grid_points(bounds);
        let pts = sample_points(bounds, 20, &mut rng);
        let gauges =
            [kr::from_navigation(nav, &grid).unwrap(), kr::from_navigation_gauge(nav, parse(&format!("sin(x1)/4 + x{n}^2/10"), n).unwrap(), &grid).unwrap()];
        for k in &gauges {
            for p in &pts {
                worst = worst.max(classify::deformation_identity(k, nav, p).unwrap());
            }
        }
        if classify::nav_weakly_berwald_test(nav, &pts, PREDICATE).unwrap().verdict {
            killing += 1;
        }
    }
    ensure(worst <= 1e-8, format!("{} winds ({killing} Killing) in two gauges, max residual {worst:.1e}", navs.len()))
}

fn ac5() -> Outcome {
    let hopf = Scene::builtin("hopf-s3").unwrap();
    let mut rng = SplitMix64::new(hopf.seed);
    let pts = sample_points(&hopf.bounds, 50, &mut rng);
    let rep = classify::p_scalar_test(&hopf.nav, &pts, PREDICATE, 50, hopf.sampling.cone_margin, &mut rng).unwrap();
    let k_dev = max_abs(&rep.k.iter().map(|k| k - 1.0).collect::<Vec<_>>());
    let spread = rep.flag_spread.unwrap_or(f64::INFINITY);
    let opts = SuiteOptions { selector: Selector::Classify, timings: false };
    let h = run_suite(&hopf, opts).unwrap();
    let f = run_suite(&Scene::builtin("flat-const").unwrap(), opts).unwrap();
    let cell = |r: &kropina::suite::SuiteResult| (r.entry("T-K0-berwald").unwrap().verdict, r.entry("T-B").unwrap().verdict);
    let (hk, hb) = cell(&h);
    let (fk, fb) = cell(&f);
    let ok = rep.entry.verdict
        && rep.k.len() == 50
        && k_dev <= 1e-6
        && rep.k_std <= 1e-6
        && spread <= FLAG_SPREAD_TOL
        && rep.curvature_identity_max <= 1e-8
        && rep.quadratic_max <= 1e-7
        && !hk
        && !hb
        && fk
        && fb;
    ensure(
        ok,
        format!(
            "|K-1| {k_dev:.1e}, std {:.1e}, flag spread {spread:.1e}, second derivative {:.1e}, quadratic relation {:.1e}; hopf (K0, B) = ({hk}, {hb}), flat = ({fk}, {fb})",
            rep.k_std, rep.curvature_identity_max, rep.quadratic_max
        ),
    )
}

fn ac6(scenes: &[Scene]) -> Outcome {
    let hopf = Scene::builtin("hopf-s3").unwrap();
    let (_, ts) = scene_samples(&hopf, 6);
    let kwf = max_abs(&ts.iter().map(|t| dynamics::killing_eq_f(&hopf.nav, t).unwrap()).collect::<Vec<_>>());
    let mut route = 0.0f64;
    for name in ["hopf-s3", "shear"] {
        let s = Scene::builtin(name).unwrap();
        let (pts, ts) = scene_samples(&s, 16);
        let m = AlphaBetaMetric::new(kr::from_navigation(&s.nav, &pts).unwrap(), Profile::Kropina);
        for t in ts.iter().take(100) {
            let forms = m.killing_forms(&s.nav, t).unwrap();
            route = route.max((forms.general - dynamics::killing_eq_f(&s.nav, t).unwrap()).abs());
        }
    }
    let mut disagreements = Vec::new();
    for s in scenes {
        let (pts, ts) = scene_samples(s, 26);
        let m = AlphaBetaMetric::new(s.kropina.clone(), Profile::Kropina);
        let kropina_max = max_abs(&ts.iter().map(|t| m.killing_forms(&s.nav, t).unwrap().kropina.unwrap()).collect::<Vec<_>>());
        let conformal = dynamics::conformal_killing_test(&s.kropina, &pts, PREDICATE).unwrap();
        if (kropina_max <= PREDICATE) != conformal.verdict {
            disagreements.push(format!("{} ({kropina_max:.1e} vs {:.1e})", s.name, conformal.residual_max));
        }
    }
    ensure(
        kwf <= 1e-6 && route <= 1e-8 && disagreements.is_empty(),
        format!(
            "hopf max |K_W F| {kwf:.1e}; general form vs direct {route:.1e} on 200 samples; conformal-Killing disagreements over {} scenes: {disagreements:?}",
            scenes.len()
        ),
    )
}

fn ac7() -> Outcome {
    let hopf = Scene::builtin("hopf-s3").unwrap();
    let shear = Scene::builtin("shear").unwrap();
    let starts = |s: &Scene, rng: &mut SplitMix64| -> Vec<FlowState> {
        let inner: Vec<(f64, f64)> = s.bounds.iter().map(|&(a, b)| (0.625 * a + 0.375 * b, 0.375 * a + 0.625 * b)).collect();
        sample_points(&inner, 4, rng)
            .into_iter()
            .map(|x| {
                let y = sample_tangent(&s.nav, &x, s.sampling.cone_margin, rng).unwrap();
                FlowState { t: 0.0, x, y }
            })
            .collect()
    };
    let mut rng = SplitMix64::new(77);
    let (mut hdf, mut hdh) = (0.0f64, 0.0f64);
    for s0 in starts(&hopf, &mut rng) {
        let states = dynamics::integrate_flow(&hopf.nav, &hopf.bounds, &s0, 1.0, 1e-3).unwrap();
        let inv = dynamics::flow_invariants(&hopf.nav, &states).unwrap();
        hdf = hdf.max(inv.max_df);
        hdh = hdh.max(inv.max_dh);
    }
    let mut shear_both = None;
    for s0 in starts(&shear, &mut rng) {
        let states = dynamics::integrate_flow(&shear.nav, &shear.bounds, &s0, 1.0, 1e-3).unwrap();
        let inv = dynamics::flow_invariants(&shear.nav, &states).unwrap();
        if inv.max_df > 1e-3 && inv.max_dh > 1e-3 {
            shear_both = Some((inv.max_df, inv.max_dh));
            break;
        }
    }
    let mut oracle = 0.0f64;
    for s in [&hopf, &shear] {
        let (_, ts) = scene_samples(s, 17);
        for t in ts.iter().take(20) {
            let fd = dynamics::flow_derivative(&s.nav, &s.bounds, t, |x, y| eval_f(&s.nav, &TangentSample::new(x.to_vec(), y.to_vec()))).unwrap();
            oracle = oracle.max((fd - dynamics::killing_eq_f(&s.nav, t).unwrap()).abs());
        }
    }
    let (sdf, sdh) = shear_both.unwrap_or((0.0, 0.0));
    ensure(
        hdf <= 1e-6 && hdh <= 1e-6 && shear_both.is_some() && oracle <= 1e-5,
        format!("hopf |dF| {hdf:.1e} |dh| {hdh:.1e}; shear |dF| {sdf:.2} |dh| {sdh:.2}; flow-derivative oracle gap {oracle:.1e}"),
    )
}

fn ac8() -> Outcome {
    let prod = Scene::builtin("prod-r-s2").unwrap();
    let mut rng = SplitMix64::new(88);
    let x0 = prod.center();
    let mut gap = 0.0f64;
    let mut pairs = 0;
    for _ in 0..4 {
        let y = sample_tangent(&prod.nav, &x0, prod.sampling.cone_margin, &mut rng).unwrap();
        let f = eval_f(&prod.nav, &TangentSample::new(x0.clone(), y.clone())).unwrap();
        let y: Vec<f64> = y.iter().map(|v| v / f).collect();
        let run = |mode| dynamics::integrate_geodesic(&prod.nav, mode, &prod.bounds, &x0, &y, 1.0, 1e-3);
        if let (Ok(a), Ok(b)) = (run(GeodesicMode::Finsler), run(GeodesicMode::Riemann)) {
            gap = gap.max(a.max_gap(&b));
            pairs += 1;
        }
    }
    let hopf = Scene::builtin("hopf-s3").unwrap();
    let x0 = vec![0.2, -0.1, 0.3];
    let mut image = 0.0f64;
    let mut tracks = 0;
    for _ in 0..3 {
        let y0 = sample_tangent(&hopf.nav, &x0, hopf.sampling.cone_margin, &mut rng).unwrap();
        let track = dynamics::integrate_geodesic(&hopf.nav, GeodesicMode::Finsler, &hopf.bounds, &x0, &y0, 0.25, 1e-3).unwrap();
        image = image.max(dynamics::isometry_geodesic_test(&hopf.nav, &hopf.bounds, &track, 0.5, 1e-2, 6).unwrap());
        tracks += 1;
    }
    ensure(
        pairs > 0 && gap <= 1e-6 && image <= 1e-5,
        format!("prod {pairs} geodesic pairs, max gap {gap:.1e}; hopf {tracks} image tracks, residual {image:.1e}"),
    )
}

fn ac9() -> Outcome {
    let mut rng = SplitMix64::new(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let e = random_expr(3, 4, &mut || rng.next_f64());
        let x: Vec<f64> = (0..3).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let jet = e.eval_jet(&x, &OrderSpec::total(3, 3)).unwrap();
        let f = |p: &[f64]| e.eval(p).unwrap();
        for vars in partial_index_lists(3, 3) {
            let fd = adaptive_partial(&f, &x, &vars);
            worst = worst.max((jet.partial_wrt(&vars) - fd).abs() / fd.abs().max(1.0));
        }
    }
    let hopf = Scene::builtin("hopf-s3").unwrap();
    let opts = SuiteOptions::default();
    let first = run_suite(&hopf, opts).unwrap().to_json();
    let second = run_suite(&hopf, opts).unwrap().to_json();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| run_suite(&hopf, opts).unwrap().to_json());
    let identical = first == second && first == serial;
    ensure(
        worst <= 1e-6 && identical,
        format!("200 expressions, worst relative error {worst:.1e}; repeated and single-threaded reports identical: {identical} ({} bytes)", first.len()),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let scenes = all_scenes();
    let criteria: Vec<Criterion> = vec![
        ("AC1 navigation round-trip", Box::new(ac1)),
        ("AC2 weakly-Berwald equivalence", Box::new(|| ac2(&scenes))),
        ("AC3 Berwald equivalence", Box::new(|| ac3(&scenes))),
        ("AC4 deformation identity", Box::new(|| ac4(&scenes))),
        ("AC5 p-scalar hopf-s3", Box::new(ac5)),
        ("AC6 Killing-equation forms", Box::new(|| ac6(&scenes))),
        ("AC7 flow isometry", Box::new(ac7)),
        ("AC8 geodesics", Box::new(ac8)),
        ("AC9 jets and determinism", Box::new(ac9)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), started.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
