#![allow(dead_code)]

use kropina::sampling::{sample_points, sample_tangents, SplitMix64};
use kropina::{Scene, TangentSample};

pub fn scene(name: &str) -> Scene {
    Scene::builtin(name).unwrap()
}

pub fn points(s: &Scene, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(&s.bounds, count, &mut SplitMix64::new(seed))
}

pub fn tangents(s: &Scene, count: usize, per_point: usize, seed: u64) -> Vec<TangentSample> {
    let mut rng = SplitMix64::new(seed);
    let pts = sample_points(&s.bounds, count, &mut rng);
    sample_tangents(&s.nav, &pts, per_point, s.sampling.cone_margin, &mut rng).unwrap()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn frob(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
