//! Command-line front end.
//!
//! Usage errors exit with status 2. Failures after parsing exit with
//! status 1 and print one JSON line `{"code", "field", "message"}` on stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use breakglass::cost_model::SweepParam;
use breakglass::incidents::{
    attack_vector_stats, authority_stats, ingest, scope_authority_matrix, stratify, synthesize_reference,
    write_csv, write_json, AuthorityStats, COLUMNS, IncidentRecord, IngestReport, LayerTotals, ScopeAuthorityMatrix,
    StratificationSummary, VectorStats,
};
use breakglass::scenario::ScenarioDocument;
use breakglass::taxonomy::{AuthorityMode, Calibration, Cell, ScopeLevel};
use breakglass::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::api::ErrorBody;
use crate::output::{num, opt, pct, usd, Table};
use crate::report::{self, CostReport, FitRequest, SimulateRequest, XminSpec};

#[derive(Debug, Parser)]
#[command(name = "breakglass", version, about = "Emergency-override architecture analysis")]
pub struct Cli {
    /// Calibration table (TOML). Defaults to the built-in table.
    #[arg(long, global = true, value_name = "PATH")]
    pub calibration: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate an incident dataset (CSV or .json) and optionally re-export it.
    Ingest {
        #[arg(required_unless_present = "synthetic")]
        path: Option<PathBuf>,
        /// Generate the reference-shaped synthetic dataset from this seed instead.
        #[arg(long, conflicts_with = "path")]
        synthetic: Option<u64>,
        /// Write the accepted records here (.json or CSV by extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Layer counts and loss sums.
    Stratify { path: PathBuf },
    /// Authority, scope and attack-vector statistics of intervened incidents.
    Stats { path: PathBuf },
    /// Fit a power law to losses from a dataset or a file of one number per line.
    Fit {
        path: PathBuf,
        /// "auto" or a fixed threshold in USD.
        #[arg(long, default_value = "auto")]
        xmin: String,
        /// Bootstrap replicates for the goodness-of-fit p-value.
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Which dataset rows to fit.
        #[arg(long, value_enum, default_value_t = Layer::All)]
        layer: Layer,
    },
    /// Rank the design space by expected cost.
    Rank {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Cost breakdown for every architecture, or only the given ones.
    Evaluate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long = "architecture", value_name = "SCOPE/AUTHORITY")]
        architectures: Vec<Cell>,
    },
    /// Monte Carlo cost distribution of one architecture.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, value_name = "SCOPE/AUTHORITY")]
        architecture: Cell,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = breakglass::simulator::DEFAULT_PARTITIONS)]
        partitions: usize,
    },
    /// Best architecture over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// mean_sentiment, culture_multiplier, market_cap_usd, daily_volume_usd,
        /// probability:<label> or damage_rate:<label>.
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
    },
    /// Mean sentiment at which two architectures cost the same.
    Breakeven {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, value_name = "SCOPE/AUTHORITY")]
        a: Cell,
        #[arg(long, value_name = "SCOPE/AUTHORITY")]
        b: Cell,
    },
    /// Run the JSON service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Print the calibration table with provenance.
    Defaults,
}

#[derive(Debug, clap::Args)]
pub struct ScenarioArg {
    /// Scenario file (JSON or .toml), or "fixture" for the bundled one.
    #[arg(long, value_name = "PATH|fixture")]
    pub scenario: String,
}

impl ScenarioArg {
    fn load(&self) -> Result<ScenarioDocument> {
        if self.scenario == "fixture" {
            Ok(ScenarioDocument::fixture())
        } else {
            ScenarioDocument::load(&self.scenario)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layer {
    All,
    Eligible,
    Intervened,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return e.exit_code();
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let line = serde_json::to_string(&ErrorBody::from_error(&e)).expect("error serializes");
            let _ = writeln!(err, "{line}");
            1
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let calibration = match &cli.calibration {
        Some(path) => Calibration::load(path)?,
        None => Calibration::default(),
    };
    let fmt = cli.format;
    match cli.command {
        Command::Ingest { path, synthetic, out: dest } => {
            let report = match (synthetic, path) {
                (Some(seed), _) => IngestReport {
                    records: synthesize_reference(seed),
                    errors: Vec::new(),
                },
                (None, Some(path)) => ingest(path)?,
                (None, None) => unreachable!("clap requires one of path or --synthetic"),
            };
            if let Some(dest) = dest {
                export(&report.records, &dest)?;
            }
            print_ingest(&report, fmt, out)?;
            match report.errors.first() {
                None => Ok(()),
                Some(first) => Err(Error::domain(
                    first.field.clone(),
                    format!(
                        "{} of {} rows rejected; first at row {}: {}",
                        report.errors.len(),
                        report.errors.len() + report.records.len(),
                        first.row,
                        first.reason
                    ),
                )),
            }
        }
        Command::Stratify { path } => {
            let s = stratify(&load_records(&path)?);
            match fmt {
                Format::Json => json(out, &s),
                Format::Table => print_strata(&s, out),
            }
        }
        Command::Stats { path } => {
            let records = load_records(&path)?;
            let stats = Stats {
                authority: authority_stats(&records),
                matrix: scope_authority_matrix(&records),
                attack_vectors: attack_vector_stats(&records),
            };
            match fmt {
                Format::Json => json(out, &stats),
                Format::Table => print_stats(&stats, out),
            }
        }
        Command::Fit { path, xmin, bootstrap, seed, layer } => {
            let req = FitRequest {
                losses: load_losses(&path, layer)?,
                xmin: xmin.parse::<XminSpec>()?,
                bootstrap,
                seed,
            };
            let r = report::fit(&req)?;
            match fmt {
                Format::Json => json(out, &r),
                Format::Table => {
                    let mut t = Table::new(["quantity", "value"]);
                    t.row(["n".to_string(), r.n.to_string()]);
                    t.row(["n_tail".to_string(), r.fit.n_tail.to_string()]);
                    t.row(["alpha".to_string(), format!("{:.4}", r.fit.alpha)]);
                    t.row(["xmin_usd".to_string(), usd(r.fit.xmin)]);
                    t.row(["ks_statistic".to_string(), format!("{:.4}", r.fit.ks_statistic)]);
                    t.row(["p_value".to_string(), opt(r.fit.p_value, 3)]);
                    t.row(["top_10_share".to_string(), pct(r.top_10_share)]);
                    t.row(["incidents_for_80_percent".to_string(), r.incidents_for_80_percent.to_string()]);
                    t.write(out).map_err(io)
                }
            }
        }
        Command::Rank { scenario } => {
            let r = report::rank(&scenario.load()?, &calibration)?;
            print_costs(&r, true, fmt, out)
        }
        Command::Evaluate { scenario, architectures } => {
            let r = report::evaluate(&scenario.load()?, &calibration, &architectures)?;
            print_costs(&r, false, fmt, out)
        }
        Command::Simulate { scenario, architecture, trials, seed, jitter, partitions } => {
            let req = SimulateRequest {
                scenario: scenario.load()?,
                architecture,
                n_trials: trials,
                seed,
                time_jitter: jitter,
                partitions,
            };
            let r = report::run_simulation(&req, &calibration)?;
            match fmt {
                Format::Json => json(out, &r),
                Format::Table => print_simulation(&r, out),
            }
        }
        Command::Sweep { scenario, param, from, to, steps } => {
            let r = report::run_sweep(&scenario.load()?, &calibration, &param, from, to, steps)?;
            match fmt {
                Format::Json => json(out, &r),
                Format::Table => {
                    let mut t = Table::new([r.parameter.as_str(), "best", "total_usd"]);
                    for p in &r.rows {
                        t.row([p.value.to_string(), p.best.to_string(), usd(p.total_usd)]);
                    }
                    t.write(out).map_err(io)
                }
            }
        }
        Command::Breakeven { scenario, a, b } => {
            let r = report::breakeven(&scenario.load()?, &calibration, a, b)?;
            match fmt {
                Format::Json => json(out, &r),
                Format::Table => {
                    let mut t = Table::new(["architecture", "standing_usd", "containment_usd", "blast_usd", "total_usd"]);
                    for (cell, c) in [(r.a, r.cost_a), (r.b, r.cost_b)] {
                        t.row([
                            cell.to_string(),
                            usd(c.standing_cost_usd),
                            usd(c.expected_containment_loss_usd),
                            usd(c.expected_blast_cost_usd),
                            usd(c.total_usd),
                        ]);
                    }
                    t.write(out).map_err(io)?;
                    match r.breakeven_sentiment {
                        Some(s) => writeln!(out, "breakeven mean sentiment: {s}"),
                        None => writeln!(out, "breakeven mean sentiment: none in [-1, 1]"),
                    }
                    .map_err(io)
                }
            }
        }
        Command::Serve { bind } => {
            let rt = tokio::runtime::Runtime::new().map_err(io)?;
            rt.block_on(crate::api::serve(&bind, calibration)).map_err(io)
        }
        Command::Defaults => {
            let r = report::defaults(&calibration);
            match fmt {
                Format::Json => json(out, &r),
                Format::Table => {
                    writeln!(out, "calibration {}", r.calibration_version).map_err(io)?;
                    let mut t = Table::new(["key", "value", "provenance"]);
                    for e in &r.entries {
                        t.row([e.key.to_string(), e.value.to_string(), e.provenance.to_string()]);
                    }
                    t.write(out).map_err(io)
                }
            }
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out, "{text}").map_err(io)
}

/// Ingests `path`, failing on the first rejected row.
fn load_records(path: &Path) -> Result<Vec<IncidentRecord>> {
    let report = ingest(path)?;
    if let Some(e) = report.errors.first() {
        return Err(Error::domain(
            e.field.clone(),
            format!("row {}: {} ({} rows rejected)", e.row, e.reason, report.errors.len()),
        ));
    }
    Ok(report.records)
}

fn load_losses(path: &Path, layer: Layer) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#'));
    if first.is_some_and(|l| l.parse::<f64>().is_ok()) {
        return text
            .lines()
            .enumerate()
            .map(|(i, l)| (i, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .map(|(i, l)| {
                l.parse::<f64>()
                    .map_err(|_| Error::domain("losses", format!("line {}: not a number: {l:?}", i + 1)))
            })
            .collect();
    }
    if !is_full_dataset(first.unwrap_or_default()) {
        return loss_column(path);
    }
    let records = load_records(path)?;
    Ok(records
        .iter()
        .filter(|r| match layer {
            Layer::All => true,
            Layer::Eligible => r.category == breakglass::incidents::Category::Eligible,
            Layer::Intervened => r.intervened && r.category == breakglass::incidents::Category::Eligible,
        })
        .map(|r| r.loss_usd)
        .collect())
}

fn is_full_dataset(header: &str) -> bool {
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    COLUMNS.iter().all(|c| names.contains(c))
}

/// Reads the `loss_usd` column of an arbitrary CSV file.
fn loss_column(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| Error::Schema(e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h.trim() == "loss_usd")
        .ok_or_else(|| Error::Schema("expected a loss_usd column or one number per line".into()))?;
    rdr.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
            let v = rec.get(col).unwrap_or("").trim();
            v.parse::<f64>()
                .map_err(|_| Error::domain("loss_usd", format!("row {}: not a number: {v:?}", i + 2)))
        })
        .collect()
}

fn export(records: &[IncidentRecord], dest: &Path) -> Result<()> {
    if dest.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        std::fs::write(dest, write_json(records)).map_err(io)
    } else {
        let file = std::fs::File::create(dest).map_err(io)?;
        write_csv(records, file)
    }
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    accepted: usize,
    rejected: usize,
    errors: &'a [breakglass::incidents::RowError],
}

fn print_ingest(r: &IngestReport, fmt: Format, out: &mut dyn Write) -> Result<()> {
    let summary = IngestSummary {
        accepted: r.records.len(),
        rejected: r.errors.len(),
        errors: &r.errors,
    };
    if fmt == Format::Json {
        return json(out, &summary);
    }
    writeln!(out, "accepted {}  rejected {}", summary.accepted, summary.rejected).map_err(io)?;
    if !r.errors.is_empty() {
        let mut t = Table::new(["row", "id", "field", "reason"]);
        for e in &r.errors {
            t.row([e.row.to_string(), e.id.clone().unwrap_or_default(), e.field.clone(), e.reason.clone()]);
        }
        t.write(out).map_err(io)?;
    }
    Ok(())
}

fn print_strata(s: &StratificationSummary, out: &mut dyn Write) -> Result<()> {
    let mut t = Table::new(["layer", "count", "loss_usd"]);
    let layers: [(&str, &LayerTotals); 5] = [
        ("systemic", &s.systemic),
        ("non_addressable", &s.non_addressable),
        ("eligible", &s.eligible),
        ("intervened", &s.intervened),
        ("total", &s.total),
    ];
    for (name, l) in layers {
        t.row([name.to_string(), l.count.to_string(), usd(l.loss_usd)]);
    }
    t.write(out).map_err(io)
}

#[derive(Serialize)]
struct Stats {
    authority: AuthorityStats,
    matrix: ScopeAuthorityMatrix,
    attack_vectors: Vec<VectorStats>,
}

fn print_stats(s: &Stats, out: &mut dyn Write) -> Result<()> {
    writeln!(out, "intervened {}", s.authority.intervened).map_err(io)?;
    let mut t = Table::new(["authority", "count", "share", "median_ttc_min", "success_rate", "prevented_usd"]);
    for g in &s.authority.groups {
        t.row([
            g.authority.map_or("unattributed", AuthorityMode::as_str).to_string(),
            g.count.to_string(),
            pct(g.share),
            opt(g.median_time_to_contain_min, 0),
            g.success_rate.map_or_else(|| "-".into(), pct),
            usd(g.loss_prevented_usd),
        ]);
    }
    t.write(out).map_err(io)?;

    writeln!(out).map_err(io)?;
    let mut t = Table::new(
        std::iter::once("scope").chain(AuthorityMode::ALL.iter().map(|a| a.as_str())),
    );
    for scope in ScopeLevel::ALL {
        let cells = AuthorityMode::ALL.iter().map(|&a| {
            let c = s.matrix.get(scope, a);
            match c.success_rate {
                Some(r) => format!("{} ({})", c.count, pct(r)),
                None => c.count.to_string(),
            }
        });
        t.row(std::iter::once(scope.as_str().to_string()).chain(cells));
    }
    t.write(out).map_err(io)?;

    writeln!(out).map_err(io)?;
    let mut t = Table::new(["attack_vector", "count", "loss_usd"]);
    for v in &s.attack_vectors {
        t.row([v.attack_vector.as_str().to_string(), v.count.to_string(), usd(v.loss_usd)]);
    }
    t.write(out).map_err(io)
}

fn print_costs(r: &CostReport, ranked: bool, fmt: Format, out: &mut dyn Write) -> Result<()> {
    if fmt == Format::Json {
        return json(out, r);
    }
    let mut headers = vec!["architecture", "time_min", "discount", "scope_frac", "standing_usd", "containment_usd", "blast_usd", "total_usd"];
    if ranked {
        headers.insert(0, "rank");
    }
    let mut t = Table::new(headers);
    for (i, row) in r.rows.iter().enumerate() {
        let mut cells = vec![
            row.architecture.to_string(),
            num(row.containment_time_min),
            num(row.discount_rate),
            num(row.scope_fraction),
            usd(row.standing_cost_usd),
            usd(row.expected_containment_loss_usd),
            usd(row.expected_blast_cost_usd),
            usd(row.total_usd),
        ];
        if ranked {
            cells.insert(0, (i + 1).to_string());
        }
        t.row(cells);
    }
    t.write(out).map_err(io)
}

fn print_simulation(r: &report::SimulateReport, out: &mut dyn Write) -> Result<()> {
    let s = &r.result;
    let m = &s.metadata;
    writeln!(
        out,
        "{}  trials {}  seed {}  partitions {}  jitter {}  generator {}",
        r.architecture, m.n_trials, m.seed, m.partitions, m.time_jitter, m.generator
    )
    .map_err(io)?;
    let mut t = Table::new(["statistic", "usd"]);
    t.row(["analytic_expected".to_string(), usd(r.analytic.total_usd)]);
    t.row(["mean".to_string(), usd(s.mean_cost_usd)]);
    t.row(["std".to_string(), usd(s.cost_std)]);
    t.row(["min".to_string(), usd(s.min_cost_usd)]);
    t.row(["p50".to_string(), usd(s.quantiles.p50)]);
    t.row(["p90".to_string(), usd(s.quantiles.p90)]);
    t.row(["p99".to_string(), usd(s.quantiles.p99)]);
    t.row(["p99.9".to_string(), usd(s.quantiles.p999)]);
    t.row(["max".to_string(), usd(s.max_cost_usd)]);
    t.write(out).map_err(io)?;
    writeln!(out).map_err(io)?;
    let mut t = Table::new(["event", "trials", "mean_contribution_usd"]);
    for c in &s.contributions {
        t.row([c.label.clone(), c.trials.to_string(), usd(c.mean_contribution_usd)]);
    }
    t.write(out).map_err(io)
}
