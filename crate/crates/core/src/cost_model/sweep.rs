use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::Architecture;

use super::{rank_design_space, BlastMode, MarketContext, ThreatProfile, NO_INCIDENT};

/// A scenario input that can be swept over a grid.
///
/// Textual forms: `mean_sentiment`, `culture_multiplier`, `market_cap_usd`,
/// `daily_volume_usd`, `probability:<label>`, `damage_rate:<label>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepParam {
    MeanSentiment,
    CultureMultiplier,
    MarketCap,
    DailyVolume,
    Probability(String),
    DamageRate(String),
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SweepParam::MeanSentiment => f.write_str("mean_sentiment"),
            SweepParam::CultureMultiplier => f.write_str("culture_multiplier"),
            SweepParam::MarketCap => f.write_str("market_cap_usd"),
            SweepParam::DailyVolume => f.write_str("daily_volume_usd"),
            SweepParam::Probability(l) => write!(f, "probability:{l}"),
            SweepParam::DamageRate(l) => write!(f, "damage_rate:{l}"),
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let param = match s {
            "mean_sentiment" => SweepParam::MeanSentiment,
            "culture_multiplier" => SweepParam::CultureMultiplier,
            "market_cap_usd" => SweepParam::MarketCap,
            "daily_volume_usd" => SweepParam::DailyVolume,
            _ => match s.split_once(':') {
                Some(("probability", label)) if !label.is_empty() => {
                    SweepParam::Probability(label.to_string())
                }
                Some(("damage_rate", label)) if !label.is_empty() => {
                    SweepParam::DamageRate(label.to_string())
                }
                _ => return Err(Error::domain("param", format!("unknown sweep parameter '{s}'"))),
            },
        };
        Ok(param)
    }
}

impl Serialize for SweepParam {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SweepParam {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl SweepParam {
    /// Returns copies of the inputs with this parameter set to `value`.
    ///
    /// Setting an event probability rebalances the `no_incident` event when
    /// one exists; otherwise the remaining events are rescaled
    /// proportionally so the profile still sums to one.
    pub fn apply(
        &self,
        value: f64,
        threat: &ThreatProfile,
        ctx: &MarketContext,
    ) -> Result<(ThreatProfile, MarketContext)> {
        let mut threat = threat.clone();
        let mut ctx = ctx.clone();
        match self {
            SweepParam::MeanSentiment => ctx.mean_sentiment = value,
            SweepParam::CultureMultiplier => ctx.culture_multiplier = value,
            SweepParam::MarketCap => ctx.market_cap_usd = value,
            SweepParam::DailyVolume => ctx.daily_volume_usd = value,
            SweepParam::DamageRate(label) => event_index(&threat, label)
                .map(|i| threat.events[i].damage_rate = value)?,
            SweepParam::Probability(label) => set_probability(&mut threat, label, value)?,
        }
        Ok((threat.validate()?, ctx.validate()?))
    }
}

fn event_index(threat: &ThreatProfile, label: &str) -> Result<usize> {
    threat
        .events
        .iter()
        .position(|e| e.label == label)
        .ok_or_else(|| Error::domain("param", format!("no event labelled '{label}'")))
}

fn set_probability(threat: &mut ThreatProfile, label: &str, value: f64) -> Result<()> {
    crate::error::ensure_in_range("probability", value, 0.0, 1.0)?;
    let target = event_index(threat, label)?;
    let old = threat.events[target].probability;
    threat.events[target].probability = value;

    if let Some(quiet) = threat
        .events
        .iter()
        .position(|e| e.label == NO_INCIDENT)
        .filter(|&q| q != target)
    {
        let rebalanced = threat.events[quiet].probability + old - value;
        if rebalanced < -1e-12 {
            return Err(Error::domain(
                "probability",
                format!("setting '{label}' to {value} leaves no room for {NO_INCIDENT}"),
            ));
        }
        threat.events[quiet].probability = rebalanced.max(0.0);
        return Ok(());
    }

    let others: f64 = threat
        .events
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, e)| e.probability)
        .sum();
    let room = 1.0 - value;
    if others == 0.0 {
        if room > 1e-12 {
            return Err(Error::domain(
                "probability",
                format!("cannot rebalance: every other event has probability 0"),
            ));
        }
        return Ok(());
    }
    for (i, e) in threat.events.iter_mut().enumerate() {
        if i != target {
            e.probability *= room / others;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub best: Architecture,
    pub total_usd: f64,
}

/// Evenly spaced grid from `from` to `to` (inclusive), best architecture at each point.
pub fn sweep(
    param: &SweepParam,
    from: f64,
    to: f64,
    steps: usize,
    threat: &ThreatProfile,
    ctx: &MarketContext,
    space: &[Architecture],
    mode: BlastMode,
) -> Result<Vec<SweepRow>> {
    if steps < 2 {
        return Err(Error::domain("steps", format!("need at least 2 steps, got {steps}")));
    }
    if !(from.is_finite() && to.is_finite()) || from > to {
        return Err(Error::domain("range", format!("range [{from}, {to}] is not well ordered")));
    }
    (0..steps)
        .map(|i| {
            let value = if i + 1 == steps {
                to
            } else {
                from + (to - from) * i as f64 / (steps - 1) as f64
            };
            let (t, c) = param.apply(value, threat, ctx)?;
            let ranked = rank_design_space(space, &t, &c, mode)?;
            let top = ranked.into_iter().next().expect("nonempty ranking");
            Ok(SweepRow {
                value,
                best: top.architecture,
                total_usd: top.breakdown.total_usd,
            })
        })
        .collect()
}
