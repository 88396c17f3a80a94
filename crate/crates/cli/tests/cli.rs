use std::path::PathBuf;
use std::process::{Command, Output};

use breakglass::cost_model::rank_design_space;
use breakglass::incidents::REFERENCE_LAYERS;
use breakglass::scenario::ScenarioDocument;
use breakglass::taxonomy::Calibration;
use breakglass_cli::report::{canonical_lines, CostReport, CostRow};
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_breakglass")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn core_fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn library_lines() -> Vec<String> {
    let doc = ScenarioDocument::fixture();
    let space = doc.design_space(&Calibration::default()).unwrap();
    let ranked = rank_design_space(&space, &doc.threat, &doc.market, doc.mode()).unwrap();
    canonical_lines(&ranked.iter().map(CostRow::from).collect::<Vec<_>>())
}

#[test]
fn rank_fixture_table_has_fifteen_rows_in_library_order() {
    let o = bin(&["rank", "--scenario", "fixture"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 16);
    let cells: Vec<&str> = lines[1..].iter().map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    let want: Vec<String> = library_lines().iter().map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    assert_eq!(cells, want);
}

#[test]
fn rank_json_is_bitwise_library() {
    let o = bin(&["rank", "--scenario", "fixture", "--format", "json"]);
    assert!(o.status.success());
    let report: CostReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(canonical_lines(&report.rows), library_lines());
}

#[test]
fn output_is_deterministic() {
    let args = ["simulate", "--scenario", "fixture", "--architecture", "module/delegated_body", "--seed", "5", "--trials", "50000", "--format", "json"];
    let a = bin(&args);
    let b = bin(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = bin(&["rank", "--scenario", "fixture", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = bin(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_error_exits_one_with_json_line() {
    let mut doc = ScenarioDocument::fixture();
    doc.market.mean_sentiment = 1.5;
    let path = tmp("bad_sentiment.json");
    std::fs::write(&path, doc.to_json()).unwrap();
    let o = bin(&["rank", "--scenario", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["code"], "domain_error");
    assert_eq!(v["field"], "mean_sentiment");
    assert!(v["message"].is_string());
}

#[test]
fn toml_scenario_matches_json() {
    let doc = ScenarioDocument::fixture();
    let path = tmp("fixture.toml");
    std::fs::write(&path, doc.to_toml().unwrap()).unwrap();
    let a = bin(&["rank", "--scenario", path.to_str().unwrap(), "--format", "json"]);
    let b = bin(&["rank", "--scenario", "fixture", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn defaults_prints_provenance() {
    let o = bin(&["defaults"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("calibration 2026.1"));
    assert!(text.contains("containment_time_min.signer_set"));
    assert!(text.contains("placeholder"));
    assert_eq!(text.lines().count(), 2 + 14);
}

#[test]
fn custom_calibration_file_is_used() {
    let mut cal = Calibration::default();
    cal.version = "test.1".into();
    cal.containment_time_min.delegated_body = 60.0;
    let path = tmp("cal.toml");
    std::fs::write(&path, cal.to_toml_string()).unwrap();
    let o = bin(&["--calibration", path.to_str().unwrap(), "evaluate", "--scenario", "fixture", "--architecture", "module/delegated_body", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["calibration_version"], "test.1");
    assert_eq!(v["rows"][0]["containment_time_min"], 60.0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn ingest_stratify_and_stats() {
    let o = bin(&["ingest", core_fixture("incidents_cases.csv").as_str()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("accepted 20  rejected 0"));

    let o = bin(&["stratify", core_fixture("incidents_cases.csv").as_str(), "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["systemic"]["count"], 2);
    assert_eq!(v["non_addressable"]["count"], 1);
    assert_eq!(v["eligible"]["count"], 17);
    assert_eq!(v["intervened"]["count"], 16);

    let o = bin(&["stats", core_fixture("intervention_cases_52.csv").as_str(), "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["authority"]["intervened"], 52);
    assert_eq!(v["authority"]["groups"][0]["count"], 37);
    assert_eq!(v["matrix"]["cells"].as_array().unwrap().len(), 15);
}

#[test]
fn ingest_reports_bad_rows() {
    let text = std::fs::read_to_string(core_fixture("incidents_cases.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut fields: Vec<String> = lines[2].split(',').map(str::to_string).collect();
    fields[4] = "-5".into();
    lines[2] = fields.join(",");
    let path = tmp("bad_rows.csv");
    std::fs::write(&path, lines.join("\n")).unwrap();

    let o = bin(&["ingest", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rejected"], 1);
    assert_eq!(v["errors"][0]["field"], "loss_usd");
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["field"], "loss_usd");
}

#[test]
fn synthetic_export_round_trips_through_stratify() {
    let path = tmp("synth.csv");
    let o = bin(&["ingest", "--synthetic", "11", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let o = bin(&["stratify", path.to_str().unwrap(), "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let layers = ["systemic", "non_addressable", "eligible", "intervened"];
    assert_eq!(v["systemic"]["count"], REFERENCE_LAYERS[0].count);
    assert_eq!(v["non_addressable"]["count"], REFERENCE_LAYERS[1].count);
    assert_eq!(v["eligible"]["count"], REFERENCE_LAYERS[2].count);
    assert_eq!(v["intervened"]["count"], REFERENCE_LAYERS[3].count);
    for (name, target) in layers.iter().zip(REFERENCE_LAYERS) {
        assert_eq!(v[name]["loss_usd"].as_f64().unwrap(), target.loss_usd, "{name}");
    }
}

#[test]
fn fit_reads_loss_column_and_number_lists() {
    let o = bin(&["fit", core_fixture("top_exploits_60.csv").as_str(), "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 60);
    assert!((v["top_10_share"].as_f64().unwrap() - 3_281.0 / 5_334.2).abs() < 1e-9);

    let path = tmp("losses.txt");
    let nums: Vec<String> = (1..=100).map(|i| (1.0 - i as f64 / 101.0).powf(-1.0).to_string()).collect();
    std::fs::write(&path, nums.join("\n")).unwrap();
    let o = bin(&["fit", path.to_str().unwrap(), "--xmin", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["fit"]["n_tail"], 100);

    let o = bin(&["fit", path.to_str().unwrap(), "--bootstrap", "100"]);
    assert_eq!(o.status.code(), Some(1));
    let o = bin(&["fit", path.to_str().unwrap(), "--xmin", "banana"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn breakeven_and_sweep() {
    let o = bin(&["breakeven", "--scenario", "fixture", "--a", "module/signer_set", "--b", "module/delegated_body", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["breakeven_sentiment"].as_f64().unwrap() - 0.985).abs() < 1e-12);

    let o = bin(&["breakeven", "--scenario", "fixture", "--a", "module/signer_set", "--b", "module/signer_set"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["code"], "degenerate");

    let o = bin(&["sweep", "--scenario", "fixture", "--param", "culture_multiplier", "--from", "0.1", "--to", "5", "--steps", "50", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0]["best"]["scope"], "module");
    assert_eq!(rows[49]["best"]["scope"], "account");
}

#[test]
fn in_process_runner_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = breakglass_cli::cli::run(["breakglass", "rank", "--scenario", "fixture"], &mut out, &mut err);
    assert_eq!(code, 0);
    assert_eq!(out, bin(&["rank", "--scenario", "fixture"]).stdout);
}
