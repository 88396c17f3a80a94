//! Incident datasets: ingestion, stratification and intervention statistics.
//!
//! Records are stratified into four layers: systemic failures,
//! non-addressable incidents, intervention-eligible exploits, and the
//! subset of eligible exploits where a mechanism was actually triggered.
//! Authority and scope statistics are computed over intervened rows.
//!
//! Every aggregate sums values in sorted order, so results do not depend
//! on record order.

mod io;
mod synth;

pub use io::{
    ingest, ingest_csv, ingest_json, write_csv, write_json, IngestReport, RowError, COLUMNS,
};
pub use synth::{synthesize_reference, LayerTarget, REFERENCE_LAYERS};

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::taxonomy::{AuthorityMode, Cell, ScopeLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackVector {
    LogicError,
    AccessControl,
    OracleManipulation,
    FlashLoan,
    Reentrancy,
    Bridge,
    KeyCompromise,
    Other,
}

impl AttackVector {
    pub const ALL: [AttackVector; 8] = [
        AttackVector::LogicError,
        AttackVector::AccessControl,
        AttackVector::OracleManipulation,
        AttackVector::FlashLoan,
        AttackVector::Reentrancy,
        AttackVector::Bridge,
        AttackVector::KeyCompromise,
        AttackVector::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackVector::LogicError => "logic_error",
            AttackVector::AccessControl => "access_control",
            AttackVector::OracleManipulation => "oracle_manipulation",
            AttackVector::FlashLoan => "flash_loan",
            AttackVector::Reentrancy => "reentrancy",
            AttackVector::Bridge => "bridge",
            AttackVector::KeyCompromise => "key_compromise",
            AttackVector::Other => "other",
        }
    }
}

impl fmt::Display for AttackVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttackVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        AttackVector::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::domain("attack_vector", format!("unknown attack vector '{s}'")))
    }
}

/// Stratification layer of an incident.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    /// Economic-design collapse no pause could have stopped.
    Systemic,
    /// Rug pulls, phishing and other incidents without an intervention point.
    NonAddressable,
    /// Technical exploits where an emergency mechanism could apply.
    Eligible,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Systemic, Category::NonAddressable, Category::Eligible];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Systemic => "systemic",
            Category::NonAddressable => "non_addressable",
            Category::Eligible => "eligible",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Category::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::domain("category", format!("unknown category '{s}'")))
    }
}

/// One exploit or intervention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentRecord {
    pub id: String,
    pub date: NaiveDate,
    pub chain: String,
    pub protocol: String,
    pub loss_usd: f64,
    pub loss_prevented_usd: f64,
    pub attack_vector: AttackVector,
    pub category: Category,
    pub intervened: bool,
    /// Missing on an intervened row when the response spans several
    /// authority modes; such rows are counted as unattributed.
    pub authority: Option<AuthorityMode>,
    pub scope: Option<ScopeLevel>,
    /// Minutes from first credible alert to the first containment trigger.
    pub time_to_detect_min: Option<f64>,
    /// Minutes from detection to mechanism execution.
    pub time_to_contain_min: Option<f64>,
    pub success: Option<bool>,
    pub sentiment: Option<f64>,
}

impl IncidentRecord {
    /// Checks the record invariants, returning the offending field.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        fn nonneg(field: &'static str, v: f64) -> Result<(), (&'static str, String)> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err((field, format!("must be a nonnegative number, got {v}")))
            }
        }
        if self.id.trim().is_empty() {
            return Err(("id", "must not be empty".into()));
        }
        nonneg("loss_usd", self.loss_usd)?;
        nonneg("loss_prevented_usd", self.loss_prevented_usd)?;
        if let Some(t) = self.time_to_detect_min {
            nonneg("time_to_detect_min", t)?;
        }
        if let Some(t) = self.time_to_contain_min {
            nonneg("time_to_contain_min", t)?;
        }
        if let Some(s) = self.sentiment {
            if !(s.is_finite() && (-1.0..=1.0).contains(&s)) {
                return Err(("sentiment", format!("must be in [-1, 1], got {s}")));
            }
        }
        if self.intervened {
            if self.category == Category::Systemic {
                return Err(("intervened", "systemic rows cannot be intervened".into()));
            }
            if self.scope.is_none() {
                return Err(("scope", "required when intervened = true".into()));
            }
        }
        Ok(())
    }

    fn counts_as_intervened(&self) -> bool {
        self.intervened && self.category == Category::Eligible
    }
}

fn ordered_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Lower median: the `(n − 1) / 2`-th order statistic.
pub fn lower_median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[(v.len() - 1) / 2])
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LayerTotals {
    pub count: usize,
    pub loss_usd: f64,
}

impl LayerTotals {
    fn of<'a>(rows: impl Iterator<Item = &'a IncidentRecord> + Clone) -> Self {
        LayerTotals {
            count: rows.clone().count(),
            loss_usd: ordered_sum(rows.map(|r| r.loss_usd)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StratificationSummary {
    pub systemic: LayerTotals,
    pub non_addressable: LayerTotals,
    pub eligible: LayerTotals,
    /// Subset of `eligible` where a mechanism was triggered.
    pub intervened: LayerTotals,
    pub total: LayerTotals,
}

pub fn stratify(records: &[IncidentRecord]) -> StratificationSummary {
    let layer = |c: Category| LayerTotals::of(records.iter().filter(move |r| r.category == c));
    StratificationSummary {
        systemic: layer(Category::Systemic),
        non_addressable: layer(Category::NonAddressable),
        eligible: layer(Category::Eligible),
        intervened: LayerTotals::of(records.iter().filter(|r| r.counts_as_intervened())),
        total: LayerTotals::of(records.iter()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorityGroup {
    /// `None` for intervened rows without a single authority mode.
    pub authority: Option<AuthorityMode>,
    pub count: usize,
    /// Share of all intervened rows.
    pub share: f64,
    pub median_time_to_contain_min: Option<f64>,
    pub success_rate: Option<f64>,
    pub loss_prevented_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorityStats {
    pub intervened: usize,
    /// One group per authority mode, then an unattributed group if any
    /// intervened row lacks an authority.
    pub groups: Vec<AuthorityGroup>,
}

impl AuthorityStats {
    pub fn group(&self, authority: AuthorityMode) -> &AuthorityGroup {
        self.groups
            .iter()
            .find(|g| g.authority == Some(authority))
            .expect("every authority mode has a group")
    }
}

fn success_rate<'a>(rows: impl Iterator<Item = &'a IncidentRecord>) -> Option<f64> {
    let (wins, recorded) = rows
        .filter_map(|r| r.success)
        .fold((0usize, 0usize), |(w, n), s| (w + usize::from(s), n + 1));
    (recorded > 0).then(|| wins as f64 / recorded as f64)
}

/// Per-authority performance over intervened, eligible rows.
pub fn authority_stats(records: &[IncidentRecord]) -> AuthorityStats {
    let intervened: Vec<&IncidentRecord> =
        records.iter().filter(|r| r.counts_as_intervened()).collect();
    let total = intervened.len();
    let group = |authority: Option<AuthorityMode>| {
        let rows: Vec<&IncidentRecord> = intervened
            .iter()
            .copied()
            .filter(|r| r.authority == authority)
            .collect();
        let times: Vec<f64> = rows.iter().filter_map(|r| r.time_to_contain_min).collect();
        AuthorityGroup {
            authority,
            count: rows.len(),
            share: if total == 0 { 0.0 } else { rows.len() as f64 / total as f64 },
            median_time_to_contain_min: lower_median(&times),
            success_rate: success_rate(rows.iter().copied()),
            loss_prevented_usd: ordered_sum(rows.iter().map(|r| r.loss_prevented_usd)),
        }
    };
    let mut groups: Vec<AuthorityGroup> =
        AuthorityMode::ALL.into_iter().map(|a| group(Some(a))).collect();
    let unattributed = group(None);
    if unattributed.count > 0 {
        groups.push(unattributed);
    }
    AuthorityStats {
        intervened: total,
        groups,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub scope: ScopeLevel,
    pub authority: AuthorityMode,
    pub count: usize,
    pub success_rate: Option<f64>,
}

/// Intervention counts and success rates over the 5 × 3 design space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeAuthorityMatrix {
    pub cells: Vec<MatrixCell>,
}

impl ScopeAuthorityMatrix {
    pub fn get(&self, scope: ScopeLevel, authority: AuthorityMode) -> &MatrixCell {
        self.cells
            .iter()
            .find(|c| c.scope == scope && c.authority == authority)
            .expect("matrix covers every cell")
    }

    pub fn column_total(&self, authority: AuthorityMode) -> usize {
        self.cells
            .iter()
            .filter(|c| c.authority == authority)
            .map(|c| c.count)
            .sum()
    }
}

pub fn scope_authority_matrix(records: &[IncidentRecord]) -> ScopeAuthorityMatrix {
    let cells = Cell::all()
        .map(|cell| {
            let rows = || {
                records.iter().filter(move |r| {
                    r.counts_as_intervened()
                        && r.scope == Some(cell.scope)
                        && r.authority == Some(cell.authority)
                })
            };
            MatrixCell {
                scope: cell.scope,
                authority: cell.authority,
                count: rows().count(),
                success_rate: success_rate(rows()),
            }
        })
        .collect();
    ScopeAuthorityMatrix { cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VectorStats {
    pub attack_vector: AttackVector,
    pub count: usize,
    pub loss_usd: f64,
}

/// Counts and losses per attack vector over all records.
pub fn attack_vector_stats(records: &[IncidentRecord]) -> Vec<VectorStats> {
    AttackVector::ALL
        .into_iter()
        .map(|v| {
            let totals = LayerTotals::of(records.iter().filter(move |r| r.attack_vector == v));
            VectorStats {
                attack_vector: v,
                count: totals.count,
                loss_usd: totals.loss_usd,
            }
        })
        .collect()
}
