//! Qualitative protocol profile → model inputs.
//!
//! Only the direction of each effect is fixed (flash loans are the fastest
//! drains, zero-days hit hardest, more audits lower the event probability,
//! claimed immutability raises the trust tax, larger TVL widens the blast).
//! Every magnitude lives in [`ProfileTable`] and may be overridden.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_in_range, ensure_nonnegative, Error, Result};
use crate::taxonomy::Architecture;

use super::{MarketContext, ThreatEvent, ThreatProfile};

macro_rules! string_enum {
    ($name:ident, $field:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant,)+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)+
                }
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::domain($field, format!("unknown value '{s}'"))),
                }
            }
        }
    };
}

string_enum!(ProtocolType, "protocol_type" {
    Amm => "AMM",
    Lending => "Lending",
    Bridge => "Bridge",
    Stablecoin => "Stablecoin",
    Other => "Other",
});

string_enum!(ExploitExposure, "exploit_exposure" {
    FlashLoan => "flash_loan",
    Reentrancy => "reentrancy",
    Oracle => "oracle",
    AccessControl => "access_control",
    LogicError => "logic_error",
});

string_enum!(Novelty, "novelty" {
    KnownVariant => "known_variant",
    ZeroDay => "zero_day",
});

string_enum!(AuditStatus, "audit_status" {
    None => "none",
    Single => "single",
    Multiple => "multiple",
});

string_enum!(SecurityClaims, "security_claims" {
    ImmutableClaimed => "immutable_claimed",
    UpgradeableDisclosed => "upgradeable_disclosed",
});

/// Observable characteristics of a protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolProfile {
    pub protocol_type: ProtocolType,
    pub exploit_exposure: ExploitExposure,
    pub novelty: Novelty,
    pub audit_status: AuditStatus,
    pub security_claims: SecurityClaims,
    pub tvl_usd: f64,
    pub sentiment: f64,
}

/// Per-protocol-type tier: base event probability and damage multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTier {
    pub base_probability: f64,
    pub damage_multiplier: f64,
}

/// Lookup table of tier magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    pub amm: ProtocolTier,
    pub lending: ProtocolTier,
    pub bridge: ProtocolTier,
    pub stablecoin: ProtocolTier,
    pub other: ProtocolTier,
    /// Damage rates as fractions of TVL drained per minute.
    pub flash_loan_drain: f64,
    pub oracle_drain: f64,
    pub access_control_drain: f64,
    pub reentrancy_drain: f64,
    pub logic_error_drain: f64,
    pub zero_day_damage_multiplier: f64,
    pub audit_none_probability_scale: f64,
    pub audit_single_probability_scale: f64,
    pub audit_multiple_probability_scale: f64,
    pub immutable_discount_multiplier: f64,
    pub upgradeable_discount_multiplier: f64,
    /// Daily volume as a fraction of TVL.
    pub daily_turnover: f64,
}

impl Default for ProfileTable {
    fn default() -> Self {
        let tier = |p, d| ProtocolTier {
            base_probability: p,
            damage_multiplier: d,
        };
        ProfileTable {
            amm: tier(0.04, 1.0),
            lending: tier(0.05, 1.2),
            bridge: tier(0.08, 2.0),
            stablecoin: tier(0.03, 1.5),
            other: tier(0.05, 1.0),
            flash_loan_drain: 0.02,
            oracle_drain: 0.01,
            access_control_drain: 0.008,
            reentrancy_drain: 0.005,
            logic_error_drain: 0.003,
            zero_day_damage_multiplier: 2.0,
            audit_none_probability_scale: 1.0,
            audit_single_probability_scale: 0.6,
            audit_multiple_probability_scale: 0.35,
            immutable_discount_multiplier: 2.0,
            upgradeable_discount_multiplier: 1.0,
            daily_turnover: 0.2,
        }
    }
}

impl ProfileTable {
    fn protocol(&self, t: ProtocolType) -> ProtocolTier {
        match t {
            ProtocolType::Amm => self.amm,
            ProtocolType::Lending => self.lending,
            ProtocolType::Bridge => self.bridge,
            ProtocolType::Stablecoin => self.stablecoin,
            ProtocolType::Other => self.other,
        }
    }

    fn drain(&self, e: ExploitExposure) -> f64 {
        match e {
            ExploitExposure::FlashLoan => self.flash_loan_drain,
            ExploitExposure::Oracle => self.oracle_drain,
            ExploitExposure::AccessControl => self.access_control_drain,
            ExploitExposure::Reentrancy => self.reentrancy_drain,
            ExploitExposure::LogicError => self.logic_error_drain,
        }
    }

    fn audit_scale(&self, a: AuditStatus) -> f64 {
        match a {
            AuditStatus::None => self.audit_none_probability_scale,
            AuditStatus::Single => self.audit_single_probability_scale,
            AuditStatus::Multiple => self.audit_multiple_probability_scale,
        }
    }

    fn discount_multiplier(&self, c: SecurityClaims) -> f64 {
        match c {
            SecurityClaims::ImmutableClaimed => self.immutable_discount_multiplier,
            SecurityClaims::UpgradeableDisclosed => self.upgradeable_discount_multiplier,
        }
    }
}

/// Model-side effects of a profile beyond the threat distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAdjustments {
    /// Multiplies every architecture's discount rate.
    pub discount_multiplier: f64,
    /// Daily volume exposed to a trigger, derived from TVL.
    pub daily_volume_usd: f64,
    pub mean_sentiment: f64,
}

impl ModelAdjustments {
    /// Applies the adjustments to a market context.
    pub fn apply_to_market(&self, ctx: &MarketContext) -> Result<MarketContext> {
        MarketContext {
            daily_volume_usd: self.daily_volume_usd,
            mean_sentiment: self.mean_sentiment,
            ..ctx.clone()
        }
        .validate()
    }

    /// Scales the discount rate of every architecture.
    pub fn apply_to_space(&self, space: &[Architecture]) -> Vec<Architecture> {
        space
            .iter()
            .map(|a| Architecture {
                discount_rate: a.discount_rate * self.discount_multiplier,
                ..a.clone()
            })
            .collect()
    }
}

/// Maps a qualitative profile to a threat profile and market adjustments.
pub fn profile_to_model(
    profile: &ProtocolProfile,
    table: &ProfileTable,
) -> Result<(ThreatProfile, ModelAdjustments)> {
    ensure_nonnegative("tvl_usd", profile.tvl_usd)?;
    ensure_in_range("sentiment", profile.sentiment, -1.0, 1.0)?;

    let tier = table.protocol(profile.protocol_type);
    let probability = (tier.base_probability * table.audit_scale(profile.audit_status)).min(1.0);
    let novelty = match profile.novelty {
        Novelty::KnownVariant => 1.0,
        Novelty::ZeroDay => table.zero_day_damage_multiplier,
    };
    let damage_rate =
        profile.tvl_usd * table.drain(profile.exploit_exposure) * tier.damage_multiplier * novelty;

    let threat = ThreatProfile::with_residual_no_incident(vec![ThreatEvent::new(
        profile.exploit_exposure.as_str(),
        probability,
        damage_rate,
    )])?;
    let adjustments = ModelAdjustments {
        discount_multiplier: table.discount_multiplier(profile.security_claims),
        daily_volume_usd: profile.tvl_usd * table.daily_turnover,
        mean_sentiment: profile.sentiment,
    };
    Ok((threat, adjustments))
}
