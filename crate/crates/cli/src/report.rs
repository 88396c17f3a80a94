//! Operations shared by the command line and the HTTP service.
//!
//! Both front ends call these functions and serialize the returned
//! structs, so their numbers come from the same code path.

use breakglass::cost_model::{
    breakeven_sentiment, evaluate_design_space, expected_cost, rank_design_space, sweep,
    CostBreakdown, RankedArchitecture, SweepParam, SweepRow,
};
use breakglass::loss_tail::{
    bootstrap_p_value, fit_power_law, pareto_curve, PowerLawFit, Xmin, DEFAULT_BOOTSTRAP,
};
use breakglass::scenario::ScenarioDocument;
use breakglass::sentiment::{aggregate, cost_multiplier, score_post};
use breakglass::simulator::{simulate, SimConfig, SimResult, DEFAULT_PARTITIONS};
use breakglass::taxonomy::{Architecture, Calibration, CalibrationEntry, Cell, CALIBRATION_VERSION};
use breakglass::{Error, Result};
use serde::{Deserialize, Serialize};

/// One architecture with its calibrated parameters and cost decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub architecture: Cell,
    pub containment_time_min: f64,
    pub discount_rate: f64,
    pub scope_fraction: f64,
    pub standing_cost_usd: f64,
    pub expected_containment_loss_usd: f64,
    pub expected_blast_cost_usd: f64,
    pub total_usd: f64,
}

impl From<&RankedArchitecture> for CostRow {
    fn from(r: &RankedArchitecture) -> Self {
        let a = &r.architecture;
        let b = &r.breakdown;
        CostRow {
            architecture: a.cell(),
            containment_time_min: a.containment_time_min,
            discount_rate: a.discount_rate,
            scope_fraction: a.scope_fraction,
            standing_cost_usd: b.standing_cost_usd,
            expected_containment_loss_usd: b.expected_containment_loss_usd,
            expected_blast_cost_usd: b.expected_blast_cost_usd,
            total_usd: b.total_usd,
        }
    }
}

impl CostRow {
    pub fn breakdown(&self) -> CostBreakdown {
        CostBreakdown {
            standing_cost_usd: self.standing_cost_usd,
            expected_containment_loss_usd: self.expected_containment_loss_usd,
            expected_blast_cost_usd: self.expected_blast_cost_usd,
            total_usd: self.total_usd,
        }
    }
}

/// Design-space costs. For `rank` the rows are sorted cheapest first;
/// for `evaluate` they follow the design-space order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub calibration_version: String,
    pub blast_on_trigger_only: bool,
    pub rows: Vec<CostRow>,
}

impl CostReport {
    fn new(doc: &ScenarioDocument, calibration: &Calibration, rows: &[RankedArchitecture]) -> Self {
        CostReport {
            calibration_version: calibration.version.clone(),
            blast_on_trigger_only: doc.blast_on_trigger_only,
            rows: rows.iter().map(CostRow::from).collect(),
        }
    }
}

/// Ranking lines in canonical decimal form: shortest round-trip decimals,
/// comma separated, one line per architecture.
pub fn canonical_lines(rows: &[CostRow]) -> Vec<String> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            format!(
                "{},{},{},{},{},{}",
                i + 1,
                r.architecture,
                r.standing_cost_usd,
                r.expected_containment_loss_usd,
                r.expected_blast_cost_usd,
                r.total_usd
            )
        })
        .collect()
}

pub fn rank(doc: &ScenarioDocument, calibration: &Calibration) -> Result<CostReport> {
    let space = doc.design_space(calibration)?;
    let ranked = rank_design_space(&space, &doc.threat, &doc.market, doc.mode())?;
    Ok(CostReport::new(doc, calibration, &ranked))
}

/// Costs for the whole design space, or only `cells` when given.
pub fn evaluate(doc: &ScenarioDocument, calibration: &Calibration, cells: &[Cell]) -> Result<CostReport> {
    let space: Vec<Architecture> = if cells.is_empty() {
        doc.design_space(calibration)?
    } else {
        cells
            .iter()
            .map(|&c| doc.architecture(calibration, c))
            .collect::<Result<_>>()?
    };
    let rows = evaluate_design_space(&space, &doc.threat, &doc.market, doc.mode())?;
    Ok(CostReport::new(doc, calibration, &rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakevenRequest {
    pub scenario: ScenarioDocument,
    pub a: Cell,
    pub b: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakevenReport {
    pub a: Cell,
    pub b: Cell,
    /// `null` when the cost lines do not cross inside [−1, 1].
    pub breakeven_sentiment: Option<f64>,
    pub cost_a: CostBreakdown,
    pub cost_b: CostBreakdown,
}

pub fn breakeven(doc: &ScenarioDocument, calibration: &Calibration, a: Cell, b: Cell) -> Result<BreakevenReport> {
    let arch_a = doc.architecture(calibration, a)?;
    let arch_b = doc.architecture(calibration, b)?;
    let crossing = breakeven_sentiment(&arch_a, &arch_b, &doc.threat, &doc.market, doc.mode())?;
    Ok(BreakevenReport {
        a,
        b,
        breakeven_sentiment: crossing,
        cost_a: expected_cost(&arch_a, &doc.threat, &doc.market, doc.mode())?,
        cost_b: expected_cost(&arch_b, &doc.threat, &doc.market, doc.mode())?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    pub scenario: ScenarioDocument,
    pub architecture: Cell,
    pub n_trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub time_jitter: f64,
    #[serde(default = "default_partitions")]
    pub partitions: usize,
}

fn default_partitions() -> usize {
    DEFAULT_PARTITIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub architecture: Cell,
    /// Closed-form expected cost for comparison with the simulated mean.
    pub analytic: CostBreakdown,
    pub result: SimResult,
}

pub fn run_simulation(req: &SimulateRequest, calibration: &Calibration) -> Result<SimulateReport> {
    let doc = &req.scenario;
    let arch = doc.architecture(calibration, req.architecture)?;
    let cfg = SimConfig {
        n_trials: req.n_trials,
        seed: req.seed,
        time_jitter: req.time_jitter,
        blast_on_trigger_only: doc.blast_on_trigger_only,
        partitions: req.partitions,
    };
    Ok(SimulateReport {
        architecture: req.architecture,
        analytic: expected_cost(&arch, &doc.threat, &doc.market, doc.mode())?,
        result: simulate(&arch, &doc.threat, &doc.market, &cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameter: String,
    pub rows: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub best: Cell,
    pub total_usd: f64,
}

impl From<SweepRow> for SweepPoint {
    fn from(r: SweepRow) -> Self {
        SweepPoint {
            value: r.value,
            best: r.best.cell(),
            total_usd: r.total_usd,
        }
    }
}

pub fn run_sweep(
    doc: &ScenarioDocument,
    calibration: &Calibration,
    param: &SweepParam,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<SweepReport> {
    let space = doc.design_space(calibration)?;
    let rows = sweep(param, from, to, steps, &doc.threat, &doc.market, &space, doc.mode())?;
    Ok(SweepReport {
        parameter: param.to_string(),
        rows: rows.into_iter().map(SweepPoint::from).collect(),
    })
}

/// `"auto"` or a fixed positive threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XminSpec {
    Fixed(f64),
    Named(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutoTag {
    Auto,
}

impl Default for XminSpec {
    fn default() -> Self {
        XminSpec::Named(AutoTag::Auto)
    }
}

impl XminSpec {
    pub fn to_xmin(self) -> Xmin {
        match self {
            XminSpec::Fixed(x) => Xmin::Fixed(x),
            XminSpec::Named(AutoTag::Auto) => Xmin::Auto,
        }
    }
}

impl std::str::FromStr for XminSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(XminSpec::Named(AutoTag::Auto));
        }
        s.parse()
            .map(XminSpec::Fixed)
            .map_err(|_| Error::domain("xmin", format!("expected \"auto\" or a number, got {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRequest {
    pub losses: Vec<f64>,
    #[serde(default)]
    pub xmin: XminSpec,
    /// Bootstrap replicates for the goodness-of-fit p-value; omitted means none.
    #[serde(default)]
    pub bootstrap: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub fit: PowerLawFit,
    pub n: usize,
    pub top_10_share: f64,
    /// Fewest incidents accounting for 80% of the total loss.
    pub incidents_for_80_percent: usize,
}

pub fn fit(req: &FitRequest) -> Result<FitReport> {
    let mut fit = fit_power_law(&req.losses, req.xmin.to_xmin())?;
    if let Some(n_boot) = req.bootstrap {
        let seed = req
            .seed
            .ok_or_else(|| Error::domain("seed", "a seed is required with bootstrap"))?;
        fit.p_value = Some(bootstrap_p_value(&req.losses, &fit, n_boot, seed)?);
    }
    let curve = pareto_curve(&req.losses)?;
    Ok(FitReport {
        fit,
        n: req.losses.len(),
        top_10_share: curve.share_at(10),
        incidents_for_80_percent: curve.incidents_for_share(0.8),
    })
}

/// Default bootstrap size offered by the command line.
pub const CLI_BOOTSTRAP: usize = DEFAULT_BOOTSTRAP;

/// Precomputed compound scores and raw posts are pooled into one sample.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentimentRequest {
    #[serde(default)]
    pub scores: Vec<f64>,
    #[serde(default)]
    pub posts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentimentReport {
    pub n: usize,
    pub mean_sentiment: f64,
    pub cost_multiplier: f64,
    /// Scores of the submitted posts, in order.
    pub post_scores: Vec<f64>,
}

pub fn sentiment(req: &SentimentRequest) -> Result<SentimentReport> {
    let post_scores: Vec<f64> = req.posts.iter().map(|p| score_post(p)).collect::<Result<_>>()?;
    let pooled: Vec<f64> = req.scores.iter().chain(&post_scores).copied().collect();
    let mean = aggregate(&pooled)?;
    Ok(SentimentReport {
        n: pooled.len(),
        mean_sentiment: mean,
        cost_multiplier: cost_multiplier(mean)?,
        post_scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefaultsReport {
    pub calibration_version: String,
    pub entries: Vec<CalibrationEntry>,
    pub design_space: Vec<Architecture>,
}

pub fn defaults(calibration: &Calibration) -> DefaultsReport {
    DefaultsReport {
        calibration_version: calibration.version.clone(),
        entries: calibration.entries(),
        design_space: calibration.design_space(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub calibration_version: String,
    /// Calibration version compiled into this build.
    pub builtin_calibration_version: String,
}

pub fn health(calibration: &Calibration) -> Health {
    Health {
        status: "ok".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        calibration_version: calibration.version.clone(),
        builtin_calibration_version: CALIBRATION_VERSION.into(),
    }
}
