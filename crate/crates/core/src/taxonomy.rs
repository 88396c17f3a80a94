//! The Scope × Authority design space.
//!
//! Every emergency-override architecture is one cell of a 5 × 3 grid: how
//! much of the system a trigger disrupts ([`ScopeLevel`]) crossed with who
//! may pull it ([`AuthorityMode`]). Each cell carries the calibration the
//! cost model needs: containment time, standing discount rate and the
//! fraction of activity a trigger disrupts.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_in_range, ensure_nonnegative, Error, Result};

/// Precision of an intervention, broadest first.
///
/// `Ord` follows blast breadth: `Network` is the greatest value and
/// `Account` the least.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopeLevel {
    Account,
    Module,
    Protocol,
    Asset,
    Network,
}

impl ScopeLevel {
    /// Broadest to most precise.
    pub const ALL: [ScopeLevel; 5] = [
        ScopeLevel::Network,
        ScopeLevel::Asset,
        ScopeLevel::Protocol,
        ScopeLevel::Module,
        ScopeLevel::Account,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScopeLevel::Network => "network",
            ScopeLevel::Asset => "asset",
            ScopeLevel::Protocol => "protocol",
            ScopeLevel::Module => "module",
            ScopeLevel::Account => "account",
        }
    }

    /// 0 for `Network` up to 4 for `Account`.
    pub fn precision_rank(self) -> u8 {
        4 - self as u8
    }
}

impl fmt::Display for ScopeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScopeLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScopeLevel::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain("scope", format!("unknown scope level '{s}'")))
    }
}

/// Who holds the trigger, from concentrated to distributed.
///
/// `Ord` follows distribution: `SignerSet` is the least value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorityMode {
    SignerSet,
    DelegatedBody,
    Governance,
}

impl AuthorityMode {
    pub const ALL: [AuthorityMode; 3] = [
        AuthorityMode::SignerSet,
        AuthorityMode::DelegatedBody,
        AuthorityMode::Governance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuthorityMode::SignerSet => "signer_set",
            AuthorityMode::DelegatedBody => "delegated_body",
            AuthorityMode::Governance => "governance",
        }
    }

    /// 0 for `SignerSet` up to 2 for `Governance`.
    pub fn distribution_rank(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for AuthorityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AuthorityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AuthorityMode::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::domain("authority", format!("unknown authority mode '{s}'")))
    }
}

/// Identity of an architecture: its cell in the design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub scope: ScopeLevel,
    pub authority: AuthorityMode,
}

impl Cell {
    pub fn new(scope: ScopeLevel, authority: AuthorityMode) -> Self {
        Cell { scope, authority }
    }

    /// All 15 cells, broadest scope first, then concentrated authority first.
    pub fn all() -> impl Iterator<Item = Cell> {
        ScopeLevel::ALL
            .into_iter()
            .flat_map(|s| AuthorityMode::ALL.into_iter().map(move |a| Cell::new(s, a)))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.scope, self.authority)
    }
}

impl FromStr for Cell {
    type Err = Error;

    /// Parses `scope/authority`, e.g. `module/delegated_body`.
    fn from_str(s: &str) -> Result<Self> {
        let (scope, authority) = s.split_once('/').ok_or_else(|| {
            Error::domain("architecture", format!("expected scope/authority, got '{s}'"))
        })?;
        Ok(Cell::new(scope.parse()?, authority.parse()?))
    }
}

/// One calibrated emergency-override architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub scope: ScopeLevel,
    pub authority: AuthorityMode,
    /// Minutes from detection to mechanism execution.
    pub containment_time_min: f64,
    /// Standing valuation discount, as a fraction of market cap.
    pub discount_rate: f64,
    /// Share of activity disrupted when the mechanism is triggered.
    pub scope_fraction: f64,
    #[serde(default)]
    pub label: String,
}

impl Architecture {
    pub fn cell(&self) -> Cell {
        Cell::new(self.scope, self.authority)
    }

    /// Returns `self` if every field satisfies its bounds.
    pub fn validate(self) -> Result<Self> {
        validate(&self)?;
        Ok(self)
    }
}

/// Checks the architecture invariants; the error names the offending field.
pub fn validate(arch: &Architecture) -> Result<()> {
    ensure_nonnegative("containment_time_min", arch.containment_time_min)?;
    ensure_nonnegative("discount_rate", arch.discount_rate)?;
    ensure_in_range("scope_fraction", arch.scope_fraction, 0.0, 1.0)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContainmentTimes {
    pub signer_set: f64,
    pub delegated_body: f64,
    /// Governance below network scope.
    pub governance: f64,
    /// Governance at network scope (fork-style remediation).
    pub governance_network: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscountRates {
    pub signer_set: f64,
    pub delegated_body: f64,
    pub governance: f64,
    /// Multiplier applied at network scope.
    pub network_scale: f64,
    /// Multiplier applied at account scope.
    pub account_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScopeFractions {
    pub network: f64,
    pub asset: f64,
    pub protocol: f64,
    pub module: f64,
    pub account: f64,
}

/// Calibration table from which the default design space is built.
///
/// Loadable from a TOML file (see `config/calibration.toml`); the built-in
/// [`Default`] is used when no file is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    pub version: String,
    pub containment_time_min: ContainmentTimes,
    pub discount_rate: DiscountRates,
    pub scope_fraction: ScopeFractions,
}

pub const CALIBRATION_VERSION: &str = "2026.1";

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            version: CALIBRATION_VERSION.to_string(),
            containment_time_min: ContainmentTimes {
                signer_set: 30.0,
                delegated_body: 75.0,
                governance: 4_320.0,
                governance_network: 43_200.0,
            },
            discount_rate: DiscountRates {
                signer_set: 0.05,
                delegated_body: 0.02,
                governance: 0.005,
                network_scale: 1.5,
                account_scale: 0.5,
            },
            scope_fraction: ScopeFractions {
                network: 1.0,
                asset: 0.25,
                protocol: 0.10,
                module: 0.02,
                account: 0.0001,
            },
        }
    }
}

/// One row of the annotated calibration listing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationEntry {
    pub key: &'static str,
    pub value: f64,
    pub provenance: &'static str,
}

impl Calibration {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cal: Calibration =
            toml::from_str(text).map_err(|e| Error::Parse(format!("calibration: {e}")))?;
        cal.validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("calibration serializes")
    }

    pub fn validate(self) -> Result<Self> {
        let t = &self.containment_time_min;
        ensure_nonnegative("containment_time_min.signer_set", t.signer_set)?;
        ensure_nonnegative("containment_time_min.delegated_body", t.delegated_body)?;
        ensure_nonnegative("containment_time_min.governance", t.governance)?;
        ensure_nonnegative("containment_time_min.governance_network", t.governance_network)?;
        let d = &self.discount_rate;
        ensure_nonnegative("discount_rate.signer_set", d.signer_set)?;
        ensure_nonnegative("discount_rate.delegated_body", d.delegated_body)?;
        ensure_nonnegative("discount_rate.governance", d.governance)?;
        ensure_nonnegative("discount_rate.network_scale", d.network_scale)?;
        ensure_nonnegative("discount_rate.account_scale", d.account_scale)?;
        let f = &self.scope_fraction;
        ensure_in_range("scope_fraction.network", f.network, 0.0, 1.0)?;
        ensure_in_range("scope_fraction.asset", f.asset, 0.0, 1.0)?;
        ensure_in_range("scope_fraction.protocol", f.protocol, 0.0, 1.0)?;
        ensure_in_range("scope_fraction.module", f.module, 0.0, 1.0)?;
        ensure_in_range("scope_fraction.account", f.account, 0.0, 1.0)?;
        Ok(self)
    }

    pub fn containment_time(&self, cell: Cell) -> f64 {
        let t = &self.containment_time_min;
        match cell.authority {
            AuthorityMode::SignerSet => t.signer_set,
            AuthorityMode::DelegatedBody => t.delegated_body,
            AuthorityMode::Governance if cell.scope == ScopeLevel::Network => t.governance_network,
            AuthorityMode::Governance => t.governance,
        }
    }

    pub fn discount(&self, cell: Cell) -> f64 {
        let d = &self.discount_rate;
        let base = match cell.authority {
            AuthorityMode::SignerSet => d.signer_set,
            AuthorityMode::DelegatedBody => d.delegated_body,
            AuthorityMode::Governance => d.governance,
        };
        match cell.scope {
            ScopeLevel::Network => base * d.network_scale,
            ScopeLevel::Account => base * d.account_scale,
            _ => base,
        }
    }

    pub fn scope_fraction(&self, scope: ScopeLevel) -> f64 {
        let f = &self.scope_fraction;
        match scope {
            ScopeLevel::Network => f.network,
            ScopeLevel::Asset => f.asset,
            ScopeLevel::Protocol => f.protocol,
            ScopeLevel::Module => f.module,
            ScopeLevel::Account => f.account,
        }
    }

    pub fn architecture(&self, cell: Cell) -> Architecture {
        Architecture {
            scope: cell.scope,
            authority: cell.authority,
            containment_time_min: self.containment_time(cell),
            discount_rate: self.discount(cell),
            scope_fraction: self.scope_fraction(cell.scope),
            label: cell.to_string(),
        }
    }

    /// The 15-cell design space under this calibration, in [`Cell::all`] order.
    pub fn design_space(&self) -> Vec<Architecture> {
        Cell::all().map(|c| self.architecture(c)).collect()
    }

    /// Time nondecreasing and discount nonincreasing along the authority
    /// order, at every scope.
    pub fn is_monotone(&self) -> bool {
        ScopeLevel::ALL.into_iter().all(|scope| {
            let cells: Vec<Cell> = AuthorityMode::ALL
                .into_iter()
                .map(|a| Cell::new(scope, a))
                .collect();
            cells.windows(2).all(|w| {
                self.containment_time(w[0]) <= self.containment_time(w[1])
                    && self.discount(w[0]) >= self.discount(w[1])
            })
        })
    }

    /// Flat listing of every calibration constant with where it comes from.
    pub fn entries(&self) -> Vec<CalibrationEntry> {
        let t = &self.containment_time_min;
        let d = &self.discount_rate;
        let f = &self.scope_fraction;
        let placeholder = "calibration placeholder; only the ordering is empirical";
        vec![
            entry("containment_time_min.signer_set", t.signer_set, "median signer-set containment in the verified intervention cases"),
            entry("containment_time_min.delegated_body", t.delegated_body, "midpoint of the observed 60-90 minute delegated-body range"),
            entry("containment_time_min.governance", t.governance, "3 days; modeling choice for sub-network governance"),
            entry("containment_time_min.governance_network", t.governance_network, "30 days; network hard-fork precedent"),
            entry("discount_rate.signer_set", d.signer_set, placeholder),
            entry("discount_rate.delegated_body", d.delegated_body, placeholder),
            entry("discount_rate.governance", d.governance, placeholder),
            entry("discount_rate.network_scale", d.network_scale, placeholder),
            entry("discount_rate.account_scale", d.account_scale, placeholder),
            entry("scope_fraction.network", f.network, "a network halt stops all activity"),
            entry("scope_fraction.asset", f.asset, "interpolated default"),
            entry("scope_fraction.protocol", f.protocol, "interpolated default"),
            entry("scope_fraction.module", f.module, "interpolated default"),
            entry("scope_fraction.account", f.account, "targeted freeze touching under 0.01% of accounts"),
        ]
    }
}

fn entry(key: &'static str, value: f64, provenance: &'static str) -> CalibrationEntry {
    CalibrationEntry { key, value, provenance }
}

/// The 15 architectures under the built-in calibration.
pub fn default_design_space() -> Vec<Architecture> {
    Calibration::default().design_space()
}
