//! Tabular and JSON incident files.
//!
//! CSV: UTF-8, comma separated, one header row naming exactly the
//! [`COLUMNS`] (in any order). Dates are ISO `YYYY-MM-DD`; booleans are
//! `true`/`false`; enumerations use their snake_case names; an empty cell
//! means "not recorded". The JSON alternative is an array of objects with
//! the same field names, `null` for missing values.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AttackVector, Category, IncidentRecord};
use crate::error::{Error, Result};
use crate::taxonomy::{AuthorityMode, ScopeLevel};

pub const COLUMNS: [&str; 15] = [
    "id",
    "date",
    "chain",
    "protocol",
    "loss_usd",
    "loss_prevented_usd",
    "attack_vector",
    "category",
    "intervened",
    "authority",
    "scope",
    "time_to_detect_min",
    "time_to_contain_min",
    "success",
    "sentiment",
];

/// A rejected row. `row` is the 1-based line number for CSV input and the
/// 1-based array position for JSON input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub row: u64,
    pub id: Option<String>,
    pub field: String,
    pub reason: String,
}

/// Parsed rows plus every rejected row with its reason.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IngestReport {
    pub records: Vec<IncidentRecord>,
    pub errors: Vec<RowError>,
}

impl IngestReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Reads a `.json` file as the structured alternative, anything else as CSV.
pub fn ingest(path: impl AsRef<Path>) -> Result<IngestReport> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let mut text = String::new();
        std::io::BufReader::new(file).read_to_string(&mut text)?;
        ingest_json(&text)
    } else {
        ingest_csv(file)
    }
}

struct Row<'a> {
    cells: &'a csv::StringRecord,
    index: &'a HashMap<&'static str, usize>,
}

type FieldResult<T> = std::result::Result<T, (&'static str, String)>;

impl Row<'_> {
    fn raw(&self, field: &'static str) -> &str {
        self.cells.get(self.index[field]).unwrap_or("").trim()
    }

    fn required(&self, field: &'static str) -> FieldResult<&str> {
        match self.raw(field) {
            "" => Err((field, "required value is empty".into())),
            v => Ok(v),
        }
    }

    fn parse<T: FromStr>(&self, field: &'static str) -> FieldResult<T> {
        let v = self.required(field)?;
        v.parse().map_err(|_| (field, format!("cannot parse '{v}'")))
    }

    fn optional<T: FromStr>(&self, field: &'static str) -> FieldResult<Option<T>> {
        match self.raw(field) {
            "" => Ok(None),
            v => v
                .parse()
                .map(Some)
                .map_err(|_| (field, format!("cannot parse '{v}'"))),
        }
    }

    fn number(&self, field: &'static str) -> FieldResult<f64> {
        let v: f64 = self.parse(field)?;
        finite(field, v)
    }

    fn optional_number(&self, field: &'static str) -> FieldResult<Option<f64>> {
        self.optional::<f64>(field)?
            .map(|v| finite(field, v))
            .transpose()
    }

    fn flag(&self, field: &'static str) -> FieldResult<bool> {
        parse_bool(field, self.required(field)?)
    }

    fn optional_flag(&self, field: &'static str) -> FieldResult<Option<bool>> {
        match self.raw(field) {
            "" => Ok(None),
            v => parse_bool(field, v).map(Some),
        }
    }

    fn record(&self) -> FieldResult<IncidentRecord> {
        let date = self.required("date")?;
        let record = IncidentRecord {
            id: self.required("id")?.to_string(),
            date: NaiveDate::parse_from_str(date, "%Y-%m-%d")
                .map_err(|_| ("date", format!("'{date}' is not an ISO date")))?,
            chain: self.raw("chain").to_string(),
            protocol: self.raw("protocol").to_string(),
            loss_usd: self.number("loss_usd")?,
            loss_prevented_usd: self.number("loss_prevented_usd")?,
            attack_vector: self.parse_enum::<AttackVector>("attack_vector")?,
            category: self.parse_enum::<Category>("category")?,
            intervened: self.flag("intervened")?,
            authority: self.optional_enum::<AuthorityMode>("authority")?,
            scope: self.optional_enum::<ScopeLevel>("scope")?,
            time_to_detect_min: self.optional_number("time_to_detect_min")?,
            time_to_contain_min: self.optional_number("time_to_contain_min")?,
            success: self.optional_flag("success")?,
            sentiment: self.optional_number("sentiment")?,
        };
        record.validate()?;
        Ok(record)
    }

    fn parse_enum<T: FromStr<Err = Error>>(&self, field: &'static str) -> FieldResult<T> {
        let v = self.required(field)?;
        v.parse().map_err(|e: Error| (field, e.to_string()))
    }

    fn optional_enum<T: FromStr<Err = Error>>(&self, field: &'static str) -> FieldResult<Option<T>> {
        match self.raw(field) {
            "" => Ok(None),
            v => v.parse().map(Some).map_err(|e: Error| (field, e.to_string())),
        }
    }
}

fn finite(field: &'static str, v: f64) -> FieldResult<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err((field, format!("must be finite, got {v}")))
    }
}

fn parse_bool(field: &'static str, v: &str) -> FieldResult<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err((field, format!("expected true or false, got '{v}'"))),
    }
}

/// Parses CSV incident data. Missing or unknown columns are a schema error;
/// bad values are reported per row alongside the rows that parsed.
pub fn ingest_csv<R: Read>(reader: R) -> Result<IngestReport> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header: {e}")))?
        .clone();

    let mut index = HashMap::new();
    let mut unknown = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim().trim_start_matches('\u{feff}');
        match COLUMNS.iter().find(|c| **c == h) {
            Some(c) => {
                if index.insert(*c, i).is_some() {
                    return Err(Error::Schema(format!("duplicate column '{h}'")));
                }
            }
            None => unknown.push(h.to_string()),
        }
    }
    let missing: Vec<&str> = COLUMNS.iter().copied().filter(|c| !index.contains_key(c)).collect();
    if !missing.is_empty() || !unknown.is_empty() {
        return Err(Error::Schema(format!(
            "missing columns [{}]; unknown columns [{}]",
            missing.join(", "),
            unknown.join(", ")
        )));
    }

    let mut report = IngestReport::default();
    for result in rdr.records() {
        let cells = match result {
            Ok(c) => c,
            Err(e) => {
                let row = e.position().map_or(0, |p| p.line());
                report.errors.push(RowError {
                    row,
                    id: None,
                    field: String::new(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let row_no = cells.position().map_or(0, |p| p.line());
        if cells.len() != headers.len() {
            report.errors.push(RowError {
                row: row_no,
                id: cells.get(index["id"]).map(str::to_string),
                field: String::new(),
                reason: format!("expected {} cells, found {}", headers.len(), cells.len()),
            });
            continue;
        }
        let row = Row {
            cells: &cells,
            index: &index,
        };
        match row.record() {
            Ok(r) => report.records.push(r),
            Err((field, reason)) => report.errors.push(RowError {
                row: row_no,
                id: Some(row.raw("id").to_string()).filter(|s| !s.is_empty()),
                field: field.to_string(),
                reason,
            }),
        }
    }
    Ok(report)
}

/// Parses a JSON array of incident objects.
pub fn ingest_json(text: &str) -> Result<IngestReport> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text)
        .map_err(|e| Error::Schema(format!("expected a JSON array of incidents: {e}")))?;
    let mut report = IngestReport::default();
    for (i, value) in values.into_iter().enumerate() {
        let row = i as u64 + 1;
        let id = value.get("id").and_then(|v| v.as_str()).map(str::to_string);
        if let Some(obj) = value.as_object() {
            let unknown: Vec<&String> = obj.keys().filter(|k| !COLUMNS.contains(&k.as_str())).collect();
            if !unknown.is_empty() {
                return Err(Error::Schema(format!("row {row}: unknown fields {unknown:?}")));
            }
        }
        let parsed = serde_json::from_value::<IncidentRecord>(value)
            .map_err(|e| (String::new(), e.to_string()))
            .and_then(|r| r.validate().map(|_| r).map_err(|(f, m)| (f.to_string(), m)));
        match parsed {
            Ok(r) => report.records.push(r),
            Err((field, reason)) => report.errors.push(RowError { row, id, field, reason }),
        }
    }
    Ok(report)
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, T::to_string)
}

/// Writes records in the CSV schema. Numbers use the shortest decimal that
/// parses back to the same `f64`, so ingest → write → ingest is lossless.
pub fn write_csv<W: Write>(records: &[IncidentRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let map_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(COLUMNS).map_err(map_err)?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.date.format("%Y-%m-%d").to_string(),
            r.chain.clone(),
            r.protocol.clone(),
            r.loss_usd.to_string(),
            r.loss_prevented_usd.to_string(),
            r.attack_vector.to_string(),
            r.category.to_string(),
            r.intervened.to_string(),
            opt(&r.authority),
            opt(&r.scope),
            opt(&r.time_to_detect_min),
            opt(&r.time_to_contain_min),
            opt(&r.success),
            opt(&r.sentiment),
        ])
        .map_err(map_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(records: &[IncidentRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}
