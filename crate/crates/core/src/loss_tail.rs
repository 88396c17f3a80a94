//! Heavy-tailed loss statistics.
//!
//! Continuous power-law fitting by maximum likelihood with KS-based tail
//! threshold selection, a semi-parametric bootstrap goodness-of-fit test,
//! Pareto concentration curves, and truncated tail means.
//!
//! The model above the threshold `xmin` is
//!
//! ```text
//! p(x) = (α − 1) / xmin · (x / xmin)^(−α),   x ≥ xmin
//! F(x) = 1 − (x / xmin)^(1 − α)
//! ```

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Fewest samples at or above `xmin` that a fit accepts.
pub const MIN_TAIL: usize = 10;

/// Fewest bootstrap replicates accepted by [`bootstrap_p_value`].
pub const MIN_BOOTSTRAP: usize = 100;

pub const DEFAULT_BOOTSTRAP: usize = 1000;

/// How the tail threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Xmin {
    /// Scan the observed values and keep the one minimising the KS distance.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XminMode {
    Auto,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub xmin: f64,
    pub n_tail: usize,
    pub ks_statistic: f64,
    pub p_value: Option<f64>,
    pub xmin_mode: XminMode,
}

impl PowerLawFit {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::domain("alpha", format!("must be > 1, got {}", self.alpha)));
        }
        if !(self.xmin.is_finite() && self.xmin > 0.0) {
            return Err(Error::domain("xmin", format!("must be > 0, got {}", self.xmin)));
        }
        Ok(())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.xmin {
            0.0
        } else {
            -((1.0 - self.alpha) * (x / self.xmin).ln()).exp_m1()
        }
    }

    /// Inverse-CDF draw from the fit, truncated at `cap` (`f64::INFINITY` for none).
    pub fn sample_truncated<R: Rng + ?Sized>(&self, cap: f64, rng: &mut R) -> f64 {
        let mass = if cap.is_finite() { self.cdf(cap) } else { 1.0 };
        let u: f64 = rng.random();
        self.xmin * (1.0 - u * mass).powf(-1.0 / (self.alpha - 1.0))
    }
}

fn check_losses(losses: &[f64]) -> Result<()> {
    if losses.is_empty() {
        return Err(Error::InsufficientData("no losses supplied".into()));
    }
    if let Some(bad) = losses.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::domain("losses", format!("losses must be positive, got {bad}")));
    }
    Ok(())
}

fn sorted(losses: &[f64]) -> Vec<f64> {
    let mut v = losses.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// KS distance between a sorted tail and the model with the given
/// exponent. The empirical CDF is right-continuous: tied values all take
/// the upper step.
fn ks_sorted(tail: &[f64], alpha: f64, xmin: f64) -> f64 {
    let n = tail.len() as f64;
    let mut d = 0.0_f64;
    let mut i = 0;
    while i < tail.len() {
        let x = tail[i];
        let mut j = i;
        while j + 1 < tail.len() && tail[j + 1] == x {
            j += 1;
        }
        let empirical = (j + 1) as f64 / n;
        let model = if x <= xmin {
            0.0
        } else {
            -((1.0 - alpha) * (x / xmin).ln()).exp_m1()
        };
        d = d.max((empirical - model).abs());
        i = j + 1;
    }
    d
}

fn fit_sorted_tail(tail: &[f64], xmin: f64) -> Result<(f64, f64)> {
    if tail.len() < MIN_TAIL {
        return Err(Error::InsufficientData(format!(
            "{} samples at or above xmin = {xmin}, need {MIN_TAIL}",
            tail.len()
        )));
    }
    let log_sum: f64 = tail.iter().map(|x| (x / xmin).ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::InsufficientData(
            "every tail sample equals xmin; the exponent is undefined".into(),
        ));
    }
    let alpha = 1.0 + tail.len() as f64 / log_sum;
    Ok((alpha, ks_sorted(tail, alpha, xmin)))
}

/// Maximum-likelihood power-law fit.
///
/// `α = 1 + n_tail / Σ ln(xᵢ / xmin)` over the samples `≥ xmin`. With
/// [`Xmin::Auto`] every distinct observed value leaving at least
/// [`MIN_TAIL`] samples is tried, and the one with the smallest KS
/// distance wins (the smaller threshold on ties).
pub fn fit_power_law(losses: &[f64], xmin: Xmin) -> Result<PowerLawFit> {
    check_losses(losses)?;
    let data = sorted(losses);
    match xmin {
        Xmin::Fixed(x) => {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::domain("xmin", format!("must be > 0, got {x}")));
            }
            let start = data.partition_point(|v| *v < x);
            let tail = &data[start..];
            let (alpha, ks) = fit_sorted_tail(tail, x)?;
            Ok(PowerLawFit {
                alpha,
                xmin: x,
                n_tail: tail.len(),
                ks_statistic: ks,
                p_value: None,
                xmin_mode: XminMode::Fixed,
            })
        }
        Xmin::Auto => fit_auto(&data),
    }
}

fn fit_auto(data: &[f64]) -> Result<PowerLawFit> {
    let logs: Vec<f64> = data.iter().map(|x| x.ln()).collect();
    let mut suffix = vec![0.0; data.len() + 1];
    for i in (0..data.len()).rev() {
        suffix[i] = suffix[i + 1] + logs[i];
    }

    let mut best: Option<PowerLawFit> = None;
    let mut i = 0;
    while i + MIN_TAIL <= data.len() {
        let xmin = data[i];
        let tail = &data[i..];
        let n = tail.len() as f64;
        let log_sum = suffix[i] - n * logs[i];
        if log_sum > 0.0 {
            let alpha = 1.0 + n / log_sum;
            let ks = ks_sorted(tail, alpha, xmin);
            if best.as_ref().map_or(true, |b| ks < b.ks_statistic) {
                best = Some(PowerLawFit {
                    alpha,
                    xmin,
                    n_tail: tail.len(),
                    ks_statistic: ks,
                    p_value: None,
                    xmin_mode: XminMode::Auto,
                });
            }
        }
        while i < data.len() && data[i] == xmin {
            i += 1;
        }
    }
    best.ok_or_else(|| {
        Error::InsufficientData(format!(
            "no threshold leaves {MIN_TAIL} non-degenerate tail samples"
        ))
    })
}

/// KS distance between the tail of `losses` (values `≥ fit.xmin`) and the fit.
pub fn ks_statistic(losses: &[f64], fit: &PowerLawFit) -> Result<f64> {
    fit.validate()?;
    check_losses(losses).map_err(|e| match e {
        Error::InsufficientData(m) => Error::domain("losses", m),
        other => other,
    })?;
    let data = sorted(losses);
    let tail = &data[data.partition_point(|v| *v < fit.xmin)..];
    if tail.is_empty() {
        return Err(Error::domain("losses", "no samples at or above xmin"));
    }
    Ok(ks_sorted(tail, fit.alpha, fit.xmin))
}

/// Bootstrap goodness-of-fit p-value.
///
/// Each replicate keeps the observed body below `xmin` (resampled with
/// replacement), draws exactly `n_tail` tail values from the fitted
/// model, refits with the same threshold rule, and records its KS
/// distance. The p-value is the share of replicates at least as far from
/// their own fit as the data is from `fit`. Replicate `b` uses random
/// stream `b` of `seed`, so the result does not depend on thread count.
pub fn bootstrap_p_value(losses: &[f64], fit: &PowerLawFit, n_boot: usize, seed: u64) -> Result<f64> {
    if n_boot < MIN_BOOTSTRAP {
        return Err(Error::domain(
            "n_boot",
            format!("need at least {MIN_BOOTSTRAP} replicates, got {n_boot}"),
        ));
    }
    let observed = ks_statistic(losses, fit)?;
    let data = sorted(losses);
    let split = data.partition_point(|v| *v < fit.xmin);
    let body = &data[..split];
    let n_tail = data.len() - split;

    let exceed = (0..n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b);
            let mut synth: Vec<f64> = (0..n_tail)
                .map(|_| fit.sample_truncated(f64::INFINITY, &mut rng))
                .collect();
            let rule = match fit.xmin_mode {
                XminMode::Fixed => Xmin::Fixed(fit.xmin),
                XminMode::Auto => {
                    synth.extend((0..body.len()).map(|_| body[rng.random_range(0..body.len())]));
                    Xmin::Auto
                }
            };
            match fit_power_law(&synth, rule) {
                Ok(refit) => refit.ks_statistic >= observed,
                Err(_) => true,
            }
        })
        .filter(|&e| e)
        .count();
    Ok(exceed as f64 / n_boot as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub k: usize,
    pub cumulative_share: f64,
}

/// Cumulative share of total loss carried by the `k` largest incidents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoCurve {
    pub points: Vec<ParetoPoint>,
}

impl ParetoCurve {
    pub fn share_at(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            k => self.points[k.min(self.points.len()) - 1].cumulative_share,
        }
    }

    /// Fewest incidents whose combined loss reaches `share` of the total.
    pub fn incidents_for_share(&self, share: f64) -> usize {
        self.points
            .iter()
            .find(|p| p.cumulative_share >= share)
            .map_or(self.points.len(), |p| p.k)
    }
}

pub fn pareto_curve(losses: &[f64]) -> Result<ParetoCurve> {
    if losses.is_empty() {
        return Err(Error::domain("losses", "no losses supplied"));
    }
    check_losses(losses)?;
    let mut desc = sorted(losses);
    desc.reverse();
    let total: f64 = desc.iter().sum();
    let mut running = 0.0;
    let points = desc
        .iter()
        .enumerate()
        .map(|(i, x)| {
            running += x;
            ParetoPoint {
                k: i + 1,
                cumulative_share: running / total,
            }
        })
        .collect();
    Ok(ParetoCurve { points })
}

/// `(e^(b·l) − 1) / b`, continuous at `b = 0`.
fn exp_ratio(b: f64, l: f64) -> f64 {
    let z = b * l;
    if z.abs() < 1e-8 {
        l * (1.0 + z / 2.0 + z * z / 6.0)
    } else {
        z.exp_m1() / b
    }
}

/// Mean of the fitted law truncated to `[xmin, cap]`, in closed form.
///
/// For α ≤ 2 the untruncated mean is infinite, so a finite cap is always
/// required.
pub fn tail_expected_loss(fit: &PowerLawFit, cap: f64) -> Result<f64> {
    fit.validate()?;
    if !(cap > fit.xmin) || cap.is_nan() {
        return Err(Error::domain("cap", format!("must exceed xmin = {}, got {cap}", fit.xmin)));
    }
    let a = fit.alpha - 1.0;
    if cap.is_infinite() {
        if fit.alpha <= 2.0 {
            return Err(Error::domain("cap", "mean diverges for alpha <= 2 without a finite cap"));
        }
        return Ok(fit.xmin * a / (fit.alpha - 2.0));
    }
    let l = (cap / fit.xmin).ln();
    let mass = -(-a * l).exp_m1();
    Ok(a * fit.xmin * exp_ratio(2.0 - fit.alpha, l) / mass)
}
