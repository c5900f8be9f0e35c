mod common;

use kropina::scene::BUILTINS;
use kropina::suite::{coverage_table, run_suite, Selector, SuiteOptions, COVERAGE, SUITE_KEYS};
use kropina::Scene;

#[test]
fn builtins_meet_their_expected_tables() {
    for name in BUILTINS {
        let r = run_suite(&common::scene(name), SuiteOptions::default()).unwrap();
        assert_eq!(r.entries.len(), SUITE_KEYS.len());
        for e in &r.entries {
            assert_eq!(e.expected, Some(e.verdict), "{name} {}", e.key);
            assert!(e.consistent, "{name} {}: {:?}", e.key, e.cross_checks);
        }
        assert!(r.passed());
        assert_eq!(r.samples_evaluated, 200);
    }
}

#[test]
fn selectors_split_the_keys() {
    let s = common::scene("flat-const");
    let keys = |sel| run_suite(&s, SuiteOptions { selector: sel, timings: false }).unwrap().entries.into_iter().map(|e| e.key).collect::<Vec<_>>();
    let (c, d) = (keys(Selector::Classify), keys(Selector::Dynamics));
    assert_eq!(c.len() + d.len(), SUITE_KEYS.len());
    assert!(c.iter().all(|k| k.starts_with("T-") || k.starts_with("I-")));
    assert!(d.contains(&"T-isometry-equiv".to_string()));
    assert_eq!("dynamics".parse::<Selector>().unwrap(), Selector::Dynamics);
    assert!("everything".parse::<Selector>().is_err());
}

#[test]
fn report_json_shape() {
    let r = run_suite(&common::scene("shear"), SuiteOptions { selector: Selector::Classify, timings: true }).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["scene"]["name"], "shear");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["tolerances"]["identity"], 1e-8);
    assert!(v["timings_ms"]["total"].as_f64().unwrap() > 0.0);
    let wb = v["entries"].as_array().unwrap().iter().find(|e| e["key"] == "T-wB").unwrap();
    assert_eq!(wb["verdict"], false);
    assert!(wb["residuals"]["wB_misfit_max"].as_f64().unwrap() > 1.0);
    assert!(wb["cross_checks"].as_array().unwrap().iter().all(|c| c["agrees"] == true));
}

#[test]
fn contradicted_expectation_fails_the_run() {
    let text = include_str!("../scenes/shear.toml").replace("T-wB = false", "T-wB = true");
    let s = Scene::from_toml_str(&text).unwrap();
    let r = run_suite(&s, SuiteOptions { selector: Selector::Classify, timings: false }).unwrap();
    assert!(r.entry("T-wB").unwrap().mismatch());
    assert!(!r.passed());
}

#[test]
fn perturbing_a_killing_wind_breaks_the_isometry() {
    let hopf = common::scene("hopf-s3");
    let v = vec![jetcalc::parse("x2", 3).unwrap(), jetcalc::Expr::num(0.0), jetcalc::Expr::num(0.0)];
    let s = hopf.perturbed(&v, 1e-2, "hopf-bent").unwrap();
    let r = run_suite(&s, SuiteOptions { selector: Selector::Dynamics, timings: false }).unwrap();
    for key in ["E-killingF", "E-eq413", "E-eq414", "E-eq416", "T-isometry-equiv"] {
        let e = r.entry(key).unwrap();
        assert!(!e.verdict && e.consistent, "{key}: {e:?}");
        assert_eq!(e.expected, None);
    }
}

#[test]
fn coverage_lists_every_key_once() {
    let keys: Vec<&str> = COVERAGE.iter().map(|c| c.key).collect();
    assert_eq!(keys, SUITE_KEYS);
    assert_eq!(coverage_table().lines().count(), SUITE_KEYS.len());
}

#[test]
fn alphabeta_presentation_runs_the_suite() {
    // a = h/4 for the sphere of radius 2, so K = 1/4
    let text = r#"
[scene]
name = "hopf-radius-2"
dim = 3
presentation = "alphabeta"

[metric]
a11 = "1/(1+x1^2+x2^2+x3^2)^2"
a22 = "1/(1+x1^2+x2^2+x3^2)^2"
a33 = "1/(1+x1^2+x2^2+x3^2)^2"

[oneform]
b1 = "(x1*x3 - x2)/(1+x1^2+x2^2+x3^2)^2"
b2 = "(x2*x3 + x1)/(1+x1^2+x2^2+x3^2)^2"
b3 = "(1 + x3^2 - x1^2 - x2^2)/2/(1+x1^2+x2^2+x3^2)^2"

[sampling]
box = [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]]
points = 10
"#;
    let s = Scene::from_toml_str(text).unwrap();
    let r = run_suite(&s, SuiteOptions { selector: Selector::Classify, timings: false }).unwrap();
    let p = r.entry("T-pscalar").unwrap();
    assert!(p.verdict && p.consistent);
    assert!((p.residuals["K_mean"] - 0.25).abs() < 1e-10);
    assert!(r.entry("T-wB").unwrap().verdict);
    assert!(!r.entry("T-B").unwrap().verdict);
}
