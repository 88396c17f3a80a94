//! Scenario documents: everything needed to evaluate the design space.
//!
//! A scenario is JSON or TOML with the fields of [`ScenarioDocument`].
//! `overrides` replaces calibration values for individual cells.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cost_model::{BlastMode, MarketContext, ThreatProfile};
use crate::error::{Error, Result};
use crate::taxonomy::{validate, Architecture, Calibration, Cell};

/// Per-cell replacement of calibration values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureOverride {
    pub cell: Cell,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub containment_time_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default)]
    pub name: String,
    pub threat: ThreatProfile,
    pub market: MarketContext,
    #[serde(default)]
    pub blast_on_trigger_only: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<ArchitectureOverride>,
    /// Path of an incident dataset the scenario was calibrated from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
}

const FIXTURE: &str = include_str!("../fixtures/scenario_fixture.json");

impl ScenarioDocument {
    /// The bundled reference scenario.
    pub fn fixture() -> ScenarioDocument {
        ScenarioDocument::from_json(FIXTURE).expect("bundled fixture is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScenarioDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        doc.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let doc: ScenarioDocument = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        doc.validate()
    }

    /// Loads `.toml` files as TOML and everything else as JSON.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
            Self::from_toml(&text)
        } else {
            Self::from_json(&text)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Checks every embedded value against its invariants.
    pub fn validate(self) -> Result<Self> {
        let threat = self.threat.clone().validate()?;
        let market = self.market.clone().validate()?;
        let mut seen = Vec::new();
        for o in &self.overrides {
            if seen.contains(&o.cell) {
                return Err(Error::domain("overrides", format!("duplicate override for {}", o.cell)));
            }
            seen.push(o.cell);
            validate(&o.apply(Calibration::default().architecture(o.cell)))?;
        }
        Ok(ScenarioDocument { threat, market, ..self })
    }

    pub fn mode(&self) -> BlastMode {
        BlastMode::from_flag(self.blast_on_trigger_only)
    }

    /// The calibrated design space with this scenario's overrides applied.
    pub fn design_space(&self, calibration: &Calibration) -> Result<Vec<Architecture>> {
        calibration
            .design_space()
            .into_iter()
            .map(|a| {
                let a = match self.overrides.iter().find(|o| o.cell == a.cell()) {
                    Some(o) => o.apply(a),
                    None => a,
                };
                a.validate()
            })
            .collect()
    }

    /// The architecture for one cell, with overrides applied.
    pub fn architecture(&self, calibration: &Calibration, cell: Cell) -> Result<Architecture> {
        let a = calibration.architecture(cell);
        match self.overrides.iter().find(|o| o.cell == cell) {
            Some(o) => o.apply(a).validate(),
            None => a.validate(),
        }
    }
}

impl ArchitectureOverride {
    pub fn apply(&self, base: Architecture) -> Architecture {
        Architecture {
            containment_time_min: self.containment_time_min.unwrap_or(base.containment_time_min),
            discount_rate: self.discount_rate.unwrap_or(base.discount_rate),
            scope_fraction: self.scope_fraction.unwrap_or(base.scope_fraction),
            ..base
        }
    }
}
