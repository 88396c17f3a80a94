mod common;

use breakglass::loss_tail::{
    bootstrap_p_value, fit_power_law, ks_statistic, pareto_curve, tail_expected_loss, PowerLawFit,
    Xmin, XminMode,
};
use breakglass::{rng, Error};
use common::{fixture, median, power_law_samples, rel_close};
use proptest::prelude::*;
use rand::Rng;

fn fit_at(alpha: f64, xmin: f64) -> PowerLawFit {
    PowerLawFit {
        alpha,
        xmin,
        n_tail: 2,
        ks_statistic: 0.0,
        p_value: None,
        xmin_mode: XminMode::Fixed,
    }
}

/// Log-likelihood maximized over a grid, independent of the closed form.
fn grid_mle(losses: &[f64], xmin: f64) -> f64 {
    let n = losses.len() as f64;
    let s: f64 = losses.iter().map(|x| (x / xmin).ln()).sum();
    (110..=400)
        .map(|i| i as f64 / 100.0)
        .map(|a| (a, n * (a - 1.0).ln() - n * xmin.ln() - a * s))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
        .0
}

#[test]
fn recovers_alpha_two_and_a_half() {
    let data = power_law_samples(2.5, 1.0, 10_000, 1);
    let fit = fit_power_law(&data, Xmin::Fixed(1.0)).unwrap();
    assert!((fit.alpha - 2.5).abs() <= 0.05, "{}", fit.alpha);
    assert!((fit.alpha - grid_mle(&data, 1.0)).abs() <= 0.0051);
    assert_eq!(fit.n_tail, 10_000);
}

#[test]
fn recovers_heavy_tail_exponent() {
    let hits = (0..50)
        .filter(|&seed| {
            let data = power_law_samples(1.33, 1.0, 601, seed);
            let fit = fit_power_law(&data, Xmin::Auto).unwrap();
            (fit.alpha - 1.33).abs() <= 0.10
        })
        .count();
    assert!(hits >= 45, "{hits}/50");
}

#[test]
fn true_model_ks_is_small() {
    let ds: Vec<f64> = (0..100)
        .map(|seed| {
            let data = power_law_samples(1.33, 1.0, 601, 1000 + seed);
            fit_power_law(&data, Xmin::Fixed(1.0)).unwrap().ks_statistic
        })
        .collect();
    assert!(ds.iter().all(|&d| d > 0.0));
    assert!(median(ds) < 0.05);
}

#[test]
fn identical_samples_are_degenerate() {
    let err = fit_power_law(&[5.0; 20], Xmin::Fixed(5.0)).unwrap_err();
    assert!(matches!(err, Error::InsufficientData(_)));
    assert!(matches!(fit_power_law(&[5.0; 20], Xmin::Auto), Err(Error::InsufficientData(_))));
}

#[test]
fn input_errors() {
    assert!(matches!(fit_power_law(&[1.0; 9], Xmin::Fixed(0.5)), Err(Error::InsufficientData(_))));
    assert_eq!(fit_power_law(&[1.0, -2.0], Xmin::Auto).unwrap_err().field(), Some("losses"));
    assert_eq!(fit_power_law(&[1.0; 20], Xmin::Fixed(0.0)).unwrap_err().field(), Some("xmin"));
}

#[test]
fn quantile_samples_give_small_ks() {
    let (alpha, n) = (1.8, 200);
    let data: Vec<f64> = (1..=n)
        .map(|i| (1.0 - i as f64 / (n as f64 + 1.0)).powf(-1.0 / (alpha - 1.0)))
        .collect();
    let d = ks_statistic(&data, &fit_at(alpha, 1.0)).unwrap();
    assert!(d <= 1.0 / (n as f64 + 1.0) + 1e-12, "{d}");
    assert!(d > 0.0);
}

#[test]
fn ks_step_convention() {
    // A single point at xmin: the empirical CDF jumps to 1 where the model is 0.
    assert_eq!(ks_statistic(&[1.0], &fit_at(2.0, 1.0)).unwrap(), 1.0);
    // Tied values share the upper step.
    let d = ks_statistic(&[2.0, 2.0], &fit_at(2.0, 1.0)).unwrap();
    assert_eq!(d, 0.5);
    assert_eq!(ks_statistic(&[0.5], &fit_at(2.0, 1.0)).unwrap_err().field(), Some("losses"));
}

#[test]
fn bootstrap_is_roughly_uniform_under_the_null() {
    let small = (0..20)
        .filter(|&t| {
            let data = power_law_samples(2.0, 1.0, 300, 500 + t);
            let fit = fit_power_law(&data, Xmin::Fixed(1.0)).unwrap();
            bootstrap_p_value(&data, &fit, 100, t).unwrap() < 0.1
        })
        .count();
    assert!(small <= 4, "{small}/20");
}

#[test]
fn bootstrap_rejects_exponential_data() {
    let mut r = rng::stream(4, 0);
    let data: Vec<f64> = (0..1000).map(|_| 1.0 - (1.0 - r.random::<f64>()).ln()).collect();
    let fit = fit_power_law(&data, Xmin::Fixed(1.0)).unwrap();
    let p = bootstrap_p_value(&data, &fit, 200, 4).unwrap();
    assert!(p <= 0.01, "{p}");
}

#[test]
fn bootstrap_preconditions_and_determinism() {
    let data = power_law_samples(2.0, 1.0, 100, 3);
    let fit = fit_power_law(&data, Xmin::Auto).unwrap();
    assert_eq!(bootstrap_p_value(&data, &fit, 50, 1).unwrap_err().field(), Some("n_boot"));
    let a = bootstrap_p_value(&data, &fit, 100, 9).unwrap();
    assert_eq!(a, bootstrap_p_value(&data, &fit, 100, 9).unwrap());
    assert!((0.0..=1.0).contains(&a));
}

#[test]
fn pareto_examples() {
    let c = pareto_curve(&[1.0, 3.0]).unwrap();
    assert_eq!(c.points.len(), 2);
    assert_eq!((c.points[0].k, c.points[0].cumulative_share), (1, 0.75));
    assert_eq!((c.points[1].k, c.points[1].cumulative_share), (2, 1.0));

    let c = pareto_curve(&[2.0; 8]).unwrap();
    for k in 1..=8 {
        assert_eq!(c.share_at(k), k as f64 / 8.0);
    }
    assert!(pareto_curve(&[]).is_err());
    assert!(pareto_curve(&[1.0, 0.0]).is_err());
}

#[test]
fn pareto_top_ten_of_documented_exploits() {
    let mut rdr = csv::Reader::from_path(fixture("top_exploits_60.csv")).unwrap();
    let losses: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[2].parse().unwrap())
        .collect();
    assert_eq!(losses.len(), 60);
    let curve = pareto_curve(&losses).unwrap();
    // 625 + 611 + 570 + 326 + 220 + 200 + 197 + 190 + 182 + 160 (millions)
    // over a hand-summed total of 5,334.2 million.
    let oracle = 3_281_000_000.0 / 5_334_200_000.0;
    assert!((curve.share_at(10) - oracle).abs() < 1e-9);
    assert!((curve.share_at(60) - 1.0).abs() < 1e-9);
}

#[test]
fn tail_mean_examples() {
    assert_eq!(tail_expected_loss(&fit_at(3.0, 1.0), f64::INFINITY).unwrap(), 2.0);
    assert!((tail_expected_loss(&fit_at(3.0, 1.0), 1e12).unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(tail_expected_loss(&fit_at(1.33, 1e6), 1e6).unwrap_err().field(), Some("cap"));
    assert_eq!(tail_expected_loss(&fit_at(1.33, 1e6), f64::INFINITY).unwrap_err().field(), Some("cap"));

    // Simpson quadrature of x·f(x) in log space, x = xmin·e^t.
    let (alpha, xmin, cap): (f64, f64, f64) = (1.33, 1e6, 1e9);
    let l = (cap / xmin).ln();
    let steps = 200_000;
    let h = l / steps as f64;
    let g = |t: f64| (alpha - 1.0) * xmin * ((2.0 - alpha) * t).exp();
    let mut s = g(0.0) + g(l);
    for i in 1..steps {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let mass = 1.0 - (cap / xmin).powf(1.0 - alpha);
    let oracle = s * h / 3.0 / mass;
    let got = tail_expected_loss(&fit_at(alpha, xmin), cap).unwrap();
    assert!(rel_close(got, oracle, 1e-6), "{got} vs {oracle}");
}

proptest! {
    #[test]
    fn fit_is_scale_equivariant(
        spread in prop::collection::vec(0.01f64..100.0, 10..60),
        c in 1e-3f64..1e3,
    ) {
        let xmin = 7.0;
        let data: Vec<f64> = spread.iter().map(|u| xmin * (1.0 + u)).collect();
        let scaled: Vec<f64> = data.iter().map(|x| x * c).collect();
        let a = fit_power_law(&data, Xmin::Fixed(xmin)).unwrap();
        let b = fit_power_law(&scaled, Xmin::Fixed(xmin * c)).unwrap();
        prop_assert!(rel_close(a.alpha, b.alpha, 1e-12));
        prop_assert!(a.ks_statistic > 0.0);
    }

    #[test]
    fn pareto_is_permutation_invariant(
        data in prop::collection::vec(1.0f64..1e9, 1..80),
        seed in any::<u64>(),
    ) {
        let mut shuffled = data.clone();
        let mut r = rng::stream(seed, 0);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, r.random_range(0..=i));
        }
        let a = pareto_curve(&data).unwrap();
        prop_assert_eq!(&a, &pareto_curve(&shuffled).unwrap());
        prop_assert!(a.points.windows(2).all(|w| w[0].cumulative_share <= w[1].cumulative_share));
        prop_assert!((a.points.last().unwrap().cumulative_share - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tail_mean_increases_with_cap(
        alpha in 1.01f64..=2.0,
        c1 in 1.001f64..1e6,
        ratio in 1.001f64..1e3,
    ) {
        let fit = fit_at(alpha, 1.0);
        let lo = tail_expected_loss(&fit, c1).unwrap();
        let hi = tail_expected_loss(&fit, c1 * ratio).unwrap();
        prop_assert!(hi > lo, "{} {} {}", alpha, lo, hi);
    }
}
