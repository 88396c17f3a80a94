#![allow(dead_code)]

use std::path::PathBuf;

use breakglass::rng;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Inverse-CDF draws from a continuous power law.
pub fn power_law_samples(alpha: f64, xmin: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 9_999);
    (0..n)
        .map(|_| {
            let u: f64 = r.random();
            xmin * (1.0 - u).powf(-1.0 / (alpha - 1.0))
        })
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
