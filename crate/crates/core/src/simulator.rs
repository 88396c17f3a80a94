//! Monte Carlo estimate of the expected cost.
//!
//! Each trial draws one event type from the threat profile and charges
//!
//! ```text
//! cost = CentralizationCost + Time' · DamageRate(h) + blast
//! ```
//!
//! where `Time' = Time(m) · U`, `U ~ Uniform[1 − jitter, 1 + jitter]`, and
//! the blast is charged on every trial (literal mode) or only on trials
//! with positive damage (trigger-only mode). Jitter is mean-preserving, so
//! the sample mean converges to [`expected_cost`](crate::cost_model::expected_cost)
//! for any jitter.
//!
//! Trials are split into a fixed number of partitions; partition `p` draws
//! from ChaCha20 stream `p` of the seed. Results are bit-for-bit
//! reproducible for a given seed and partition count, whatever the thread
//! count.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost_model::{
    blast_cost, centralization_cost, BlastMode, MarketContext, ThreatProfile,
};
use crate::error::{ensure_in_range, Error, Result};
use crate::loss_tail::PowerLawFit;
use crate::rng::{self, GENERATOR_ID};
use crate::taxonomy::{validate, Architecture};

pub const DEFAULT_PARTITIONS: usize = 16;
/// Default truncation cap of tail draws, as a multiple of `xmin`.
pub const DEFAULT_CAP_MULTIPLE: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_trials: usize,
    pub seed: u64,
    /// Half-width of the multiplicative spread on containment time, in [0, 1].
    #[serde(default)]
    pub time_jitter: f64,
    #[serde(default)]
    pub blast_on_trigger_only: bool,
    #[serde(default = "default_partitions")]
    pub partitions: usize,
}

fn default_partitions() -> usize {
    DEFAULT_PARTITIONS
}

impl SimConfig {
    pub fn new(n_trials: usize, seed: u64) -> Self {
        SimConfig {
            n_trials,
            seed,
            time_jitter: 0.0,
            blast_on_trigger_only: false,
            partitions: DEFAULT_PARTITIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::domain("n_trials", "must be at least 1"));
        }
        if self.partitions == 0 {
            return Err(Error::domain("partitions", "must be at least 1"));
        }
        ensure_in_range("time_jitter", self.time_jitter, 0.0, 1.0)
    }

    fn mode(&self) -> BlastMode {
        BlastMode::from_flag(self.blast_on_trigger_only)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub p999: f64,
}

/// Share of the mean cost coming from trials that drew one event type.
/// Contributions include the standing cost, so they sum to the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventContribution {
    pub label: String,
    pub trials: usize,
    pub mean_contribution_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub seed: u64,
    pub n_trials: usize,
    pub partitions: usize,
    pub time_jitter: f64,
    pub blast_on_trigger_only: bool,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_cost_usd: f64,
    pub cost_std: f64,
    pub min_cost_usd: f64,
    pub max_cost_usd: f64,
    pub quantiles: Quantiles,
    pub contributions: Vec<EventContribution>,
    pub metadata: SimMetadata,
}

/// Nearest-rank quantile of sorted data.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

struct Partition {
    costs: Vec<f64>,
    event_sums: Vec<f64>,
    event_counts: Vec<usize>,
}

/// Runs `trial` across partitions. `trial` returns the drawn event index
/// and the realized cost.
fn run<F>(cfg: &SimConfig, labels: Vec<String>, trial: F) -> SimResult
where
    F: Fn(&mut ChaCha20Rng) -> (usize, f64) + Sync,
{
    let k = labels.len();
    let base = cfg.n_trials / cfg.partitions;
    let extra = cfg.n_trials % cfg.partitions;
    let parts: Vec<Partition> = (0..cfg.partitions)
        .into_par_iter()
        .map(|p| {
            let n = base + usize::from(p < extra);
            let mut rng = rng::stream(cfg.seed, p as u64);
            let mut part = Partition {
                costs: Vec::with_capacity(n),
                event_sums: vec![0.0; k],
                event_counts: vec![0; k],
            };
            for _ in 0..n {
                let (h, cost) = trial(&mut rng);
                part.costs.push(cost);
                part.event_sums[h] += cost;
                part.event_counts[h] += 1;
            }
            part
        })
        .collect();

    let n = cfg.n_trials as f64;
    let (lo, hi) = parts
        .iter()
        .flat_map(|p| p.costs.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    let total: f64 = parts.iter().map(|p| p.costs.iter().sum::<f64>()).sum();
    // Rounding in the sum can push the mean of near-constant costs past
    // the sampled range.
    let mean = (total / n).clamp(lo, hi);
    let sq: f64 = parts
        .iter()
        .map(|p| p.costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>())
        .sum();
    let std = if cfg.n_trials > 1 { (sq / (n - 1.0)).sqrt() } else { 0.0 };

    let contributions = labels
        .into_iter()
        .enumerate()
        .map(|(h, label)| EventContribution {
            label,
            trials: parts.iter().map(|p| p.event_counts[h]).sum(),
            mean_contribution_usd: parts.iter().map(|p| p.event_sums[h]).sum::<f64>() / n,
        })
        .collect();

    let mut all: Vec<f64> = parts.into_iter().flat_map(|p| p.costs).collect();
    all.sort_unstable_by(f64::total_cmp);
    SimResult {
        mean_cost_usd: mean,
        cost_std: std,
        min_cost_usd: all[0],
        max_cost_usd: all[all.len() - 1],
        quantiles: Quantiles {
            p50: nearest_rank(&all, 0.5),
            p90: nearest_rank(&all, 0.9),
            p99: nearest_rank(&all, 0.99),
            p999: nearest_rank(&all, 0.999),
        },
        contributions,
        metadata: SimMetadata {
            seed: cfg.seed,
            n_trials: cfg.n_trials,
            partitions: cfg.partitions,
            time_jitter: cfg.time_jitter,
            blast_on_trigger_only: cfg.blast_on_trigger_only,
            generator: GENERATOR_ID.to_string(),
        },
    }
}

fn jittered_time(base: f64, jitter: f64, rng: &mut ChaCha20Rng) -> f64 {
    if jitter == 0.0 {
        base
    } else {
        base * (1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0))
    }
}

/// Simulates `cfg.n_trials` incident outcomes under `arch`.
pub fn simulate(
    arch: &Architecture,
    threat: &ThreatProfile,
    ctx: &MarketContext,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    let threat = threat.clone().validate()?;
    let standing = centralization_cost(arch, ctx)?;
    let blast = blast_cost(arch, ctx)?;
    let mode = cfg.mode();

    let mut cumulative = Vec::with_capacity(threat.events.len());
    let mut acc = 0.0;
    for e in &threat.events {
        acc += e.probability;
        cumulative.push(acc);
    }
    let last = threat.events.len() - 1;
    let events = &threat.events;
    let time = arch.containment_time_min;
    let labels = events.iter().map(|e| e.label.clone()).collect();

    Ok(run(cfg, labels, |rng| {
        let u: f64 = rng.random::<f64>() * acc;
        let h = cumulative.iter().position(|&c| u < c).unwrap_or(last);
        let t = jittered_time(time, cfg.time_jitter, rng);
        let rate = events[h].damage_rate;
        let charged = match mode {
            BlastMode::Literal => blast,
            BlastMode::TriggerOnly if rate > 0.0 => blast,
            BlastMode::TriggerOnly => 0.0,
        };
        (h, standing + t * rate + charged)
    }))
}

/// Heavy-tailed threat: with probability `incident_probability` an incident
/// occurs whose total loss is drawn from the fitted law (truncated at
/// `cap`), drained evenly over `exposure_window_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailThreat {
    pub fit: PowerLawFit,
    pub incident_probability: f64,
    pub exposure_window_min: f64,
    /// Defaults to `DEFAULT_CAP_MULTIPLE × xmin`.
    #[serde(default)]
    pub cap: Option<f64>,
}

impl TailThreat {
    pub fn cap(&self) -> f64 {
        self.cap.unwrap_or(DEFAULT_CAP_MULTIPLE * self.fit.xmin)
    }

    pub fn validate(&self) -> Result<()> {
        self.fit.validate()?;
        ensure_in_range("incident_probability", self.incident_probability, 0.0, 1.0)?;
        if !(self.exposure_window_min.is_finite() && self.exposure_window_min > 0.0) {
            return Err(Error::domain("exposure_window_min", "must be positive"));
        }
        let cap = self.cap();
        if cap.is_nan() || cap <= self.fit.xmin {
            return Err(Error::domain("cap", format!("must exceed xmin = {}, got {cap}", self.fit.xmin)));
        }
        if cap.is_infinite() && self.fit.alpha <= 2.0 {
            return Err(Error::domain("cap", "a finite cap is required for alpha <= 2"));
        }
        Ok(())
    }
}

/// Simulates outcomes with incident losses drawn from a fitted tail.
/// Event labels are `no_incident` and `tail_incident`.
pub fn tail_scenario(
    tail: &TailThreat,
    arch: &Architecture,
    ctx: &MarketContext,
    cfg: &SimConfig,
) -> Result<SimResult> {
    cfg.validate()?;
    tail.validate()?;
    validate(arch)?;
    let standing = centralization_cost(arch, ctx)?;
    let blast = blast_cost(arch, ctx)?;
    let cap = tail.cap();
    let p = tail.incident_probability;
    let labels = vec![crate::cost_model::NO_INCIDENT.to_string(), "tail_incident".to_string()];
    let literal = cfg.mode() == BlastMode::Literal;

    Ok(run(cfg, labels, |rng| {
        let t = jittered_time(arch.containment_time_min, cfg.time_jitter, rng);
        if rng.random::<f64>() < p {
            let loss = tail.fit.sample_truncated(cap, rng);
            (1, standing + t * loss / tail.exposure_window_min + blast)
        } else {
            (0, standing + if literal { blast } else { 0.0 })
        }
    }))
}
