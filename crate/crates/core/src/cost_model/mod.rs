//! Expected-cost objective over the design space.
//!
//! For an architecture `m`:
//!
//! ```text
//! ExpectedCost(m) = CentralizationCost(m)
//!                 + Σ_h Pr[h] · (Time(m) · DamageRate(h) + BlastRate(m))
//!
//! CentralizationCost(m) = MarketCap · DiscountRate(m) · (1 − s̄)
//! BlastRate(m)          = γ · ScopeFraction(m) · DailyVolume / 1440
//! ```
//!
//! The blast term is a one-time shock and is never scaled by containment
//! time. Time is in minutes throughout.

mod breakeven;
mod profile;
mod sweep;

pub use breakeven::{breakeven_sentiment, breakeven_sentiment_bisect};
pub use profile::{
    profile_to_model, AuditStatus, ExploitExposure, ModelAdjustments, Novelty, ProfileTable,
    ProtocolProfile, ProtocolType, SecurityClaims,
};
pub use sweep::{sweep, SweepParam, SweepRow};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_in_range, ensure_nonnegative, Error, Result};
use crate::taxonomy::{validate, Architecture};

/// Label reserved for the event type that causes no damage.
pub const NO_INCIDENT: &str = "no_incident";

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;
const MINUTES_PER_DAY: f64 = 1440.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatEvent {
    pub label: String,
    pub probability: f64,
    /// USD lost per minute while the event is uncontained.
    pub damage_rate: f64,
}

impl ThreatEvent {
    pub fn new(label: impl Into<String>, probability: f64, damage_rate: f64) -> Self {
        ThreatEvent {
            label: label.into(),
            probability,
            damage_rate,
        }
    }
}

/// One-period distribution over adverse event types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreatProfile {
    pub events: Vec<ThreatEvent>,
}

impl ThreatProfile {
    /// Builds a profile whose probabilities already sum to one.
    pub fn new(events: Vec<ThreatEvent>) -> Result<Self> {
        ThreatProfile { events }.validate()
    }

    /// Appends a `no_incident` event carrying the residual probability.
    pub fn with_residual_no_incident(mut events: Vec<ThreatEvent>) -> Result<Self> {
        let total: f64 = events.iter().map(|e| e.probability).sum();
        if total > 1.0 + PROBABILITY_SUM_TOLERANCE {
            return Err(Error::domain(
                "probability",
                format!("event probabilities sum to {total} > 1"),
            ));
        }
        events.push(ThreatEvent::new(NO_INCIDENT, (1.0 - total).max(0.0), 0.0));
        Self::new(events)
    }

    /// A profile where nothing ever happens.
    pub fn quiet() -> Self {
        ThreatProfile {
            events: vec![ThreatEvent::new(NO_INCIDENT, 1.0, 0.0)],
        }
    }

    pub fn validate(self) -> Result<Self> {
        if self.events.is_empty() {
            return Err(Error::domain("events", "threat profile has no events"));
        }
        for (i, e) in self.events.iter().enumerate() {
            ensure_in_range("probability", e.probability, 0.0, 1.0)?;
            ensure_nonnegative("damage_rate", e.damage_rate)?;
            if e.label == NO_INCIDENT && e.damage_rate != 0.0 {
                return Err(Error::domain(
                    "damage_rate",
                    "the no_incident event must have damage_rate 0",
                ));
            }
            if self.events[..i].iter().any(|o| o.label == e.label) {
                return Err(Error::domain("label", format!("duplicate event label '{}'", e.label)));
            }
        }
        let total = self.total_probability();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::domain(
                "probability",
                format!("event probabilities must sum to 1, got {total}"),
            ));
        }
        Ok(self)
    }

    pub fn total_probability(&self) -> f64 {
        self.events.iter().map(|e| e.probability).sum()
    }

    /// `Σ Pr[h] · DamageRate(h)`, USD per minute.
    pub fn expected_damage_rate(&self) -> f64 {
        self.events.iter().map(|e| e.probability * e.damage_rate).sum()
    }

    /// Probability mass of events that trigger the mechanism (`damage_rate > 0`).
    pub fn trigger_probability(&self) -> f64 {
        self.events
            .iter()
            .filter(|e| e.damage_rate > 0.0)
            .map(|e| e.probability)
            .sum()
    }

    pub fn event(&self, label: &str) -> Option<&ThreatEvent> {
        self.events.iter().find(|e| e.label == label)
    }
}

/// Protocol-level economics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketContext {
    pub market_cap_usd: f64,
    pub daily_volume_usd: f64,
    /// γ: how harshly the community punishes disruption.
    pub culture_multiplier: f64,
    /// s̄: mean compound sentiment toward emergency powers.
    pub mean_sentiment: f64,
}

impl MarketContext {
    pub fn validate(self) -> Result<Self> {
        ensure_nonnegative("market_cap_usd", self.market_cap_usd)?;
        ensure_nonnegative("daily_volume_usd", self.daily_volume_usd)?;
        ensure_nonnegative("culture_multiplier", self.culture_multiplier)?;
        ensure_in_range("mean_sentiment", self.mean_sentiment, -1.0, 1.0)?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        self.clone().validate().map(|_| ())
    }
}

/// How the blast term is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlastMode {
    /// Charge `BlastRate(m) · Σ Pr[h]` over every event, including quiet ones.
    #[default]
    Literal,
    /// Charge the blast only for events with positive damage rate.
    TriggerOnly,
}

impl BlastMode {
    pub fn from_flag(blast_on_trigger_only: bool) -> Self {
        if blast_on_trigger_only {
            BlastMode::TriggerOnly
        } else {
            BlastMode::Literal
        }
    }

    pub fn is_trigger_only(self) -> bool {
        self == BlastMode::TriggerOnly
    }
}

/// Decomposed expected cost, USD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub standing_cost_usd: f64,
    pub expected_containment_loss_usd: f64,
    pub expected_blast_cost_usd: f64,
    pub total_usd: f64,
}

impl CostBreakdown {
    fn from_parts(standing: f64, containment: f64, blast: f64) -> Self {
        CostBreakdown {
            standing_cost_usd: standing,
            expected_containment_loss_usd: containment,
            expected_blast_cost_usd: blast,
            total_usd: standing + containment + blast,
        }
    }
}

/// Standing cost of merely holding the override: `MarketCap · DiscountRate · (1 − s̄)`.
pub fn centralization_cost(arch: &Architecture, ctx: &MarketContext) -> Result<f64> {
    validate(arch)?;
    ctx.check()?;
    Ok(standing(arch, ctx))
}

/// One-time collateral disruption of a trigger: `γ · ScopeFraction · DailyVolume / 1440`.
pub fn blast_cost(arch: &Architecture, ctx: &MarketContext) -> Result<f64> {
    validate(arch)?;
    ctx.check()?;
    Ok(blast_rate(arch, ctx))
}

fn standing(arch: &Architecture, ctx: &MarketContext) -> f64 {
    ctx.market_cap_usd * arch.discount_rate * (1.0 - ctx.mean_sentiment)
}

fn blast_rate(arch: &Architecture, ctx: &MarketContext) -> f64 {
    ctx.culture_multiplier * arch.scope_fraction * ctx.daily_volume_usd / MINUTES_PER_DAY
}

/// Expected cost of `arch` under `threat` and `ctx`.
pub fn expected_cost(
    arch: &Architecture,
    threat: &ThreatProfile,
    ctx: &MarketContext,
    mode: BlastMode,
) -> Result<CostBreakdown> {
    validate(arch)?;
    ctx.check()?;
    let threat = threat.clone().validate()?;
    Ok(evaluate_unchecked(arch, &threat, ctx, mode))
}

pub(crate) fn evaluate_unchecked(
    arch: &Architecture,
    threat: &ThreatProfile,
    ctx: &MarketContext,
    mode: BlastMode,
) -> CostBreakdown {
    let containment = arch.containment_time_min * threat.expected_damage_rate();
    let blast_mass = match mode {
        BlastMode::Literal => threat.total_probability(),
        BlastMode::TriggerOnly => threat.trigger_probability(),
    };
    CostBreakdown::from_parts(
        standing(arch, ctx),
        containment,
        blast_rate(arch, ctx) * blast_mass,
    )
}

/// One ranked design-space entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedArchitecture {
    pub architecture: Architecture,
    pub breakdown: CostBreakdown,
}

/// Evaluates every architecture, preserving input order.
pub fn evaluate_design_space(
    space: &[Architecture],
    threat: &ThreatProfile,
    ctx: &MarketContext,
    mode: BlastMode,
) -> Result<Vec<RankedArchitecture>> {
    ctx.check()?;
    let threat = threat.clone().validate()?;
    space
        .iter()
        .map(|arch| {
            validate(arch)?;
            Ok(RankedArchitecture {
                architecture: arch.clone(),
                breakdown: evaluate_unchecked(arch, &threat, ctx, mode),
            })
        })
        .collect()
}

/// Ordering used by [`rank_design_space`]: cheaper first; on equal cost,
/// more precise scope first, then more distributed authority first.
pub fn rank_order(a: &RankedArchitecture, b: &RankedArchitecture) -> Ordering {
    a.breakdown
        .total_usd
        .total_cmp(&b.breakdown.total_usd)
        .then_with(|| {
            b.architecture
                .scope
                .precision_rank()
                .cmp(&a.architecture.scope.precision_rank())
        })
        .then_with(|| {
            b.architecture
                .authority
                .distribution_rank()
                .cmp(&a.architecture.authority.distribution_rank())
        })
}

/// Sorts the design space by expected cost, cheapest first.
pub fn rank_design_space(
    space: &[Architecture],
    threat: &ThreatProfile,
    ctx: &MarketContext,
    mode: BlastMode,
) -> Result<Vec<RankedArchitecture>> {
    if space.is_empty() {
        return Err(Error::domain("space", "design space is empty"));
    }
    let mut ranked = evaluate_design_space(space, threat, ctx, mode)?;
    ranked.sort_by(rank_order);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{AuthorityMode, Calibration, Cell, ScopeLevel};

    fn arch(time: f64, discount: f64, scope_fraction: f64) -> Architecture {
        Architecture {
            scope: ScopeLevel::Protocol,
            authority: AuthorityMode::DelegatedBody,
            containment_time_min: time,
            discount_rate: discount,
            scope_fraction,
            label: String::new(),
        }
    }

    fn ctx(market_cap: f64, volume: f64, gamma: f64, s: f64) -> MarketContext {
        MarketContext {
            market_cap_usd: market_cap,
            daily_volume_usd: volume,
            culture_multiplier: gamma,
            mean_sentiment: s,
        }
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn centralization_cost_examples() {
        let c = centralization_cost(&arch(30.0, 0.02, 0.1), &ctx(1e9, 0.0, 1.0, 0.028)).unwrap();
        assert!(rel_close(c, 19_440_000.0, 1e-12), "{c}");
        let c = centralization_cost(&arch(30.0, 0.9, 0.1), &ctx(1e9, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!(c, 0.0);
        let c = centralization_cost(&arch(30.0, 0.5, 0.1), &ctx(100.0, 0.0, 1.0, -1.0)).unwrap();
        assert_eq!(c, 100.0);
        let c = centralization_cost(&arch(30.0, 0.0, 0.1), &ctx(1e9, 0.0, 1.0, -0.5)).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn blast_cost_examples() {
        assert_eq!(blast_cost(&arch(0.0, 0.0, 1.0), &ctx(0.0, 1_440_000.0, 1.0, 0.0)).unwrap(), 1000.0);
        assert_eq!(blast_cost(&arch(0.0, 0.0, 0.0), &ctx(0.0, 1_440_000.0, 1.0, 0.0)).unwrap(), 0.0);
        let b = blast_cost(&arch(0.0, 0.0, 0.1), &ctx(0.0, 14_400_000.0, 2.0, 0.0)).unwrap();
        assert!(rel_close(b, 2000.0, 1e-12), "{b}");
    }

    #[test]
    fn blast_does_not_scale_with_time() {
        let c = ctx(0.0, 1_440_000.0, 1.0, 0.0);
        let fast = expected_cost(&arch(30.0, 0.0, 1.0), &ThreatProfile::quiet(), &c, BlastMode::Literal).unwrap();
        let slow = expected_cost(&arch(43_200.0, 0.0, 1.0), &ThreatProfile::quiet(), &c, BlastMode::Literal).unwrap();
        assert_eq!(fast.expected_blast_cost_usd, slow.expected_blast_cost_usd);
    }

    #[test]
    fn zero_threat_collapses_per_mode() {
        let a = arch(30.0, 0.0, 1.0);
        let c = ctx(1e9, 1_440_000.0, 1.0, 0.0);
        let lit = expected_cost(&a, &ThreatProfile::quiet(), &c, BlastMode::Literal).unwrap();
        assert_eq!(lit.total_usd, 1000.0);
        let trig = expected_cost(&a, &ThreatProfile::quiet(), &c, BlastMode::TriggerOnly).unwrap();
        assert_eq!(trig.total_usd, 0.0);
    }

    /// Enumerates event types one at a time and accumulates each branch's
    /// realized cost weighted by its probability.
    fn enumerate_oracle(a: &Architecture, t: &ThreatProfile, c: &MarketContext, trigger_only: bool) -> f64 {
        let standing = c.market_cap_usd * a.discount_rate * (1.0 - c.mean_sentiment);
        let blast = c.culture_multiplier * a.scope_fraction * c.daily_volume_usd / 1440.0;
        let mut total = standing;
        for e in &t.events {
            let charged = if trigger_only && e.damage_rate == 0.0 { 0.0 } else { blast };
            total += e.probability * (a.containment_time_min * e.damage_rate + charged);
        }
        total
    }

    #[test]
    fn single_event_example() {
        // discount chosen so the standing cost is exactly 19,440,000.
        let a = arch(30.0, 0.02, 1.0);
        let c = ctx(1e9, 1_440_000.0, 1.0, 0.028);
        let t = ThreatProfile::with_residual_no_incident(vec![ThreatEvent::new("exploit", 0.01, 1e6)]).unwrap();
        let got = expected_cost(&a, &t, &c, BlastMode::Literal).unwrap();
        let oracle = enumerate_oracle(&a, &t, &c, false);
        assert!(rel_close(oracle, 19_741_000.0, 1e-12), "{oracle}");
        assert!(rel_close(got.total_usd, oracle, 1e-12));
        assert!(rel_close(got.standing_cost_usd, 19_440_000.0, 1e-12));
        assert!(rel_close(got.expected_containment_loss_usd, 300_000.0, 1e-12));
        assert!(rel_close(got.expected_blast_cost_usd, 1000.0, 1e-12));
    }

    #[test]
    fn two_event_example() {
        let a = arch(75.0, 0.0, 0.0);
        let c = ctx(0.0, 0.0, 1.0, 0.0);
        let t = ThreatProfile::new(vec![
            ThreatEvent::new("quiet", 0.5, 0.0),
            ThreatEvent::new("drain", 0.5, 2e5),
        ])
        .unwrap();
        let got = expected_cost(&a, &t, &c, BlastMode::Literal).unwrap();
        assert_eq!(got.total_usd, 7_500_000.0);
        assert_eq!(enumerate_oracle(&a, &t, &c, false), 7_500_000.0);
    }

    #[test]
    fn modes_differ_by_quiet_blast() {
        let a = arch(75.0, 0.01, 0.3);
        let c = ctx(5e8, 3e9, 1.7, 0.2);
        let t = ThreatProfile::with_residual_no_incident(vec![
            ThreatEvent::new("a", 0.1, 1e4),
            ThreatEvent::new("b", 0.05, 3e5),
        ])
        .unwrap();
        let lit = expected_cost(&a, &t, &c, BlastMode::Literal).unwrap();
        let trig = expected_cost(&a, &t, &c, BlastMode::TriggerOnly).unwrap();
        let quiet = t.event(NO_INCIDENT).unwrap().probability;
        let expected_gap = blast_cost(&a, &c).unwrap() * quiet;
        assert!(rel_close(lit.total_usd - trig.total_usd, expected_gap, 1e-9));
        assert!(rel_close(trig.total_usd, enumerate_oracle(&a, &t, &c, true), 1e-12));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let t = ThreatProfile::quiet();
        let err = expected_cost(&arch(1.0, 0.0, 0.0), &t, &ctx(1.0, 1.0, 1.0, 1.5), BlastMode::Literal).unwrap_err();
        assert_eq!(err.field(), Some("mean_sentiment"));
        let err = expected_cost(&arch(1.0, 0.0, 2.0), &t, &ctx(1.0, 1.0, 1.0, 0.0), BlastMode::Literal).unwrap_err();
        assert_eq!(err.field(), Some("scope_fraction"));
        let bad = ThreatProfile { events: vec![ThreatEvent::new("x", 0.4, 1.0)] };
        let err = expected_cost(&arch(1.0, 0.0, 0.0), &bad, &ctx(1.0, 1.0, 1.0, 0.0), BlastMode::Literal).unwrap_err();
        assert_eq!(err.field(), Some("probability"));
        let bad = ThreatProfile { events: vec![ThreatEvent::new(NO_INCIDENT, 1.0, 5.0)] };
        assert!(bad.validate().is_err());
        assert!(ThreatProfile { events: vec![] }.validate().is_err());
        assert!(ThreatProfile::with_residual_no_incident(vec![ThreatEvent::new("x", 1.2, 1.0)]).is_err());
    }

    #[test]
    fn rank_singleton_and_empty() {
        let space = vec![arch(1.0, 0.0, 0.0)];
        let r = rank_design_space(&space, &ThreatProfile::quiet(), &ctx(1.0, 1.0, 1.0, 0.0), BlastMode::Literal).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].architecture, space[0]);
        assert!(rank_design_space(&[], &ThreatProfile::quiet(), &ctx(1.0, 1.0, 1.0, 0.0), BlastMode::Literal).is_err());
    }

    #[test]
    fn ties_prefer_precision_then_distribution() {
        let base = arch(10.0, 0.0, 0.0);
        let network = Architecture { scope: ScopeLevel::Network, ..base.clone() };
        let account = Architecture { scope: ScopeLevel::Account, ..base.clone() };
        let c = ctx(1.0, 1.0, 1.0, 0.0);
        let r = rank_design_space(&[network, account], &ThreatProfile::quiet(), &c, BlastMode::Literal).unwrap();
        assert_eq!(r[0].architecture.scope, ScopeLevel::Account);

        let ss = Architecture { authority: AuthorityMode::SignerSet, ..base.clone() };
        let gov = Architecture { authority: AuthorityMode::Governance, ..base };
        let r = rank_design_space(&[ss, gov], &ThreatProfile::quiet(), &c, BlastMode::Literal).unwrap();
        assert_eq!(r[0].architecture.authority, AuthorityMode::Governance);
    }

    #[test]
    fn prediction_one_orderings() {
        let cal = Calibration::default();
        let mut zero_discount = cal.clone();
        zero_discount.discount_rate.signer_set = 0.0;
        zero_discount.discount_rate.delegated_body = 0.0;
        zero_discount.discount_rate.governance = 0.0;
        let c = ctx(1e9, 1e9, 1.0, 0.0);
        let threat = ThreatProfile::with_residual_no_incident(vec![ThreatEvent::new("x", 0.05, 1e5)]).unwrap();
        for scope in ScopeLevel::ALL {
            let costs: Vec<f64> = AuthorityMode::ALL
                .into_iter()
                .map(|a| {
                    let arch = zero_discount.architecture(Cell::new(scope, a));
                    expected_cost(&arch, &threat, &c, BlastMode::Literal).unwrap().total_usd
                })
                .collect();
            assert!(costs.windows(2).all(|w| w[0] <= w[1]), "{scope}: {costs:?}");

            let quiet: Vec<f64> = AuthorityMode::ALL
                .into_iter()
                .map(|a| {
                    let arch = cal.architecture(Cell::new(scope, a));
                    expected_cost(&arch, &ThreatProfile::quiet(), &c, BlastMode::Literal).unwrap().total_usd
                })
                .collect();
            assert!(quiet.windows(2).all(|w| w[0] >= w[1]), "{scope}: {quiet:?}");
        }
    }
}
