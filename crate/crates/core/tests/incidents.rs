mod common;

use breakglass::incidents::{
    attack_vector_stats, authority_stats, ingest, ingest_csv, scope_authority_matrix, stratify,
    synthesize_reference, write_csv, write_json, ingest_json, AttackVector, Category,
    IncidentRecord, REFERENCE_LAYERS,
};
use breakglass::rng;
use breakglass::taxonomy::{AuthorityMode, Calibration, Cell};
use common::fixture;
use proptest::prelude::*;
use rand::Rng;

fn cases_52() -> Vec<IncidentRecord> {
    let report = ingest(fixture("intervention_cases_52.csv")).unwrap();
    assert!(report.is_clean(), "{:?}", report.errors);
    report.records
}

fn shuffled(records: &[IncidentRecord], seed: u64) -> Vec<IncidentRecord> {
    let mut v = records.to_vec();
    let mut r = rng::stream(seed, 0);
    for i in (1..v.len()).rev() {
        v.swap(i, r.random_range(0..=i));
    }
    v
}

#[test]
fn documented_cases_ingest_cleanly() {
    let report = ingest(fixture("incidents_cases.csv")).unwrap();
    assert_eq!(report.records.len(), 20);
    assert!(report.is_clean());
    let s = stratify(&report.records);
    assert_eq!((s.systemic.count, s.non_addressable.count, s.eligible.count), (2, 1, 17));
    assert_eq!(s.intervened.count, 16);
    assert_eq!(s.total.loss_usd, s.systemic.loss_usd + s.non_addressable.loss_usd + s.eligible.loss_usd);

    // Hand sum of the attack-vector column equals the grand total.
    let by_vector = attack_vector_stats(&report.records);
    assert_eq!(by_vector.iter().map(|v| v.count).sum::<usize>(), 20);
    let logic = by_vector.iter().find(|v| v.attack_vector == AttackVector::LogicError).unwrap();
    assert_eq!(logic.count, 8);
    assert_eq!(logic.loss_usd, 197e6 + 220e6 + 128e6 + 3e6 + 20.7e6 + 9e6 + 9.4e6 + 3.9e6);
    let total: f64 = by_vector.iter().map(|v| v.loss_usd).sum();
    assert!((total - s.total.loss_usd).abs() <= 1e-6);
}

#[test]
fn authority_shares_and_rates_on_the_52_cases() {
    let rows = cases_52();
    let stats = authority_stats(&rows);
    assert_eq!(stats.intervened, 52);
    let ss = stats.group(AuthorityMode::SignerSet);
    let db = stats.group(AuthorityMode::DelegatedBody);
    let gov = stats.group(AuthorityMode::Governance);
    assert_eq!((ss.count, db.count, gov.count), (37, 8, 6));
    assert_eq!(ss.share, 37.0 / 52.0);
    assert_eq!(ss.success_rate, Some(14.0 / 37.0));
    assert_eq!(db.success_rate, Some(4.0 / 8.0));
    assert_eq!(gov.success_rate, Some(4.0 / 6.0));
    let pct = |x: f64| (x * 1000.0).round() / 10.0;
    assert_eq!((pct(ss.share), pct(db.share), pct(gov.share)), (71.2, 15.4, 11.5));

    let cal = Calibration::default();
    let time = |a| cal.containment_time(Cell::new(breakglass::taxonomy::ScopeLevel::Protocol, a));
    assert_eq!(ss.median_time_to_contain_min, Some(time(AuthorityMode::SignerSet)));
    assert_eq!(db.median_time_to_contain_min, Some(time(AuthorityMode::DelegatedBody)));
    assert!(gov.median_time_to_contain_min.unwrap() >= time(AuthorityMode::Governance));

    assert_eq!(ss.loss_prevented_usd, 0.55e9);
    assert_eq!(db.loss_prevented_usd, 0.88e9);
    assert_eq!(gov.loss_prevented_usd, 0.17e9);

    let nonempty: f64 = stats.groups.iter().filter(|g| g.count > 0).map(|g| g.share).sum();
    assert!((nonempty - 1.0).abs() < 1e-12);
}

#[test]
fn matrix_columns_match_authority_counts() {
    let rows = cases_52();
    let stats = authority_stats(&rows);
    let matrix = scope_authority_matrix(&rows);
    assert_eq!(matrix.cells.len(), 15);
    for a in AuthorityMode::ALL {
        assert_eq!(matrix.column_total(a), stats.group(a).count);
    }
    assert!(matrix.cells.iter().filter(|c| c.count == 0).all(|c| c.success_rate.is_none()));
}

#[test]
fn reference_layers() {
    let rows = synthesize_reference(2026);
    let s = stratify(&rows);
    let layers = [s.systemic, s.non_addressable, s.eligible, s.intervened];
    for (got, want) in layers.iter().zip(REFERENCE_LAYERS) {
        assert_eq!(got.count, want.count);
        assert_eq!(got.loss_usd, want.loss_usd);
    }
    assert_eq!((s.systemic.count, s.non_addressable.count, s.eligible.count, s.intervened.count), (10, 94, 601, 130));
    assert_eq!(s.eligible.loss_usd, 9.60e9);
}

#[test]
fn synthesized_dataset_round_trips_through_csv() {
    let rows = synthesize_reference(5);
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let back = ingest_csv(buf.as_slice()).unwrap();
    assert!(back.is_clean());
    assert_eq!(back.records, rows);
}

fn record_strategy() -> impl Strategy<Value = IncidentRecord> {
    let cat = prop_oneof![Just(Category::Systemic), Just(Category::NonAddressable), Just(Category::Eligible)];
    let auth = prop::option::of(prop_oneof![
        Just(AuthorityMode::SignerSet),
        Just(AuthorityMode::DelegatedBody),
        Just(AuthorityMode::Governance)
    ]);
    (
        (0u32..100_000, 0u32..3650, any::<f64>().prop_map(|x| x.abs() % 1e12), 0.0f64..1e9),
        (cat, any::<bool>(), auth, 0usize..5, 0usize..8),
        (prop::option::of(0.0f64..1e5), prop::option::of(any::<bool>()), prop::option::of(-1.0f64..=1.0)),
    )
        .prop_map(|((id, day, loss, prevented), (category, intervened, authority, scope, vector), (time, success, sentiment))| {
            let intervened = intervened && category != Category::Systemic;
            IncidentRecord {
                id: format!("r{id}"),
                date: chrono::NaiveDate::from_ymd_opt(2016, 1, 1).unwrap() + chrono::Duration::days(day as i64),
                chain: "ethereum".into(),
                protocol: "p, with \"quotes\"".into(),
                loss_usd: loss,
                loss_prevented_usd: prevented,
                attack_vector: AttackVector::ALL[vector],
                category,
                intervened,
                authority,
                scope: intervened.then(|| breakglass::taxonomy::ScopeLevel::ALL[scope]),
                time_to_detect_min: time.map(|t| t / 7.0),
                time_to_contain_min: time,
                success,
                sentiment,
            }
        })
}

proptest! {
    #[test]
    fn csv_and_json_round_trip_exactly(records in prop::collection::vec(record_strategy(), 0..30)) {
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let back = ingest_csv(buf.as_slice()).unwrap();
        prop_assert!(back.is_clean(), "{:?}", back.errors);
        prop_assert_eq!(&back.records, &records);
        let json = ingest_json(&write_json(&records)).unwrap();
        prop_assert_eq!(&json.records, &records);
    }

    #[test]
    fn statistics_ignore_record_order(records in prop::collection::vec(record_strategy(), 0..60), seed in any::<u64>()) {
        let other = shuffled(&records, seed);
        prop_assert_eq!(stratify(&records), stratify(&other));
        prop_assert_eq!(authority_stats(&records), authority_stats(&other));
        prop_assert_eq!(scope_authority_matrix(&records), scope_authority_matrix(&other));
        prop_assert_eq!(attack_vector_stats(&records), attack_vector_stats(&other));
    }

    #[test]
    fn layers_reconcile(records in prop::collection::vec(record_strategy(), 0..60)) {
        let s = stratify(&records);
        prop_assert_eq!(s.systemic.count + s.non_addressable.count + s.eligible.count, s.total.count);
        prop_assert!(s.intervened.count <= s.eligible.count);
        let sum = s.systemic.loss_usd + s.non_addressable.loss_usd + s.eligible.loss_usd;
        prop_assert!((sum - s.total.loss_usd).abs() <= 1e-6 * s.total.loss_usd.max(1.0));
        let stats = authority_stats(&records);
        if stats.intervened > 0 {
            let shares: f64 = stats.groups.iter().filter(|g| g.count > 0).map(|g| g.share).sum();
            prop_assert!((shares - 1.0).abs() < 1e-12);
        }
    }
}
