//! Campaign runner, error statistics and file formats.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shapes::simharness::{
    aggregate_records, bootstrap_error, read_records_csv, read_report, rmse, write_json, write_records_csv,
    CampaignFile, CampaignReport,
};
use shapes::{run_campaign, BenchmarkId, CampaignSpec, EndKnots, KnotAdjust, Label, MapKind, ShapesConfig};

fn quick_spec(n: usize) -> CampaignSpec<f64> {
    let mut config = ShapesConfig::new(0.1, 15);
    config.model_set = vec![5, 6, 7];
    config.swarm.num_particles = 10;
    config.num_runs = 2;
    let mut spec = CampaignSpec::new(BenchmarkId::F4, 100.0, n, config);
    spec.bootstrap_resamples = 2000;
    spec
}

fn label_strategy() -> impl Strategy<Value = Label> {
    (
        prop_oneof![Just(MapKind::Plain), Just(MapKind::CenteredMonotonic)],
        prop_oneof![Just(10.0), Just(100.0), Just(747.0), 0.5f64..2000.0],
        prop_oneof![Just(0.0), Just(0.1), Just(5.0), 0.0f64..100.0],
        1usize..5000,
        prop_oneof![Just(EndKnots::Fixed), Just(EndKnots::Variable)],
        any::<bool>(),
        prop_oneof![Just(KnotAdjust::Merge), Just(KnotAdjust::Heal)],
    )
        .prop_map(|(map, snr, lambda, num_iterations, end_knots, drop_end_bsplines, adjust)| Label {
            map,
            snr,
            lambda,
            num_iterations,
            end_knots,
            drop_end_bsplines,
            adjust,
        })
}

proptest! {
    #[test]
    fn label_roundtrip(label in label_strategy()) {
        let text = label.to_string();
        let parsed = Label::parse(&text).unwrap();
        prop_assert_eq!(parsed, label);
        prop_assert_eq!(parsed.to_string(), text);
    }
}

#[test]
fn standard_labels_roundtrip() {
    for s in ["LP_100_0.1_50_FKM", "LP_10_5_50_FKM", "LC_10_5_50_VDH", "LP_100_0_100_FKM", "LC_1104_0.1_100_VKH"] {
        assert_eq!(Label::parse(s).unwrap().to_string(), s);
    }
}

#[test]
fn bootstrap_error_scales_with_sample_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random::<f64>() * 20.0).collect() };
    let small = bootstrap_error(&draw(100), 10_000, 1).unwrap();
    let large = bootstrap_error(&draw(400), 10_000, 1).unwrap();
    let ratio = small / large;
    assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn perfect_estimates_have_zero_rmse() {
    assert_eq!(rmse(&[0.0f64]).unwrap(), 0.0);
    assert_eq!(bootstrap_error(&[0.0f64; 5], 100, 1).unwrap(), 0.0);
}

#[test]
fn campaign_is_deterministic_and_complete() {
    let spec = quick_spec(3);
    let a = run_campaign(&spec).unwrap();
    let b = run_campaign(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 3);
    assert_eq!(a.records.iter().map(|r| r.index).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert!(a.mean_knots >= 5.0 && a.mean_knots <= 7.0);
    let se: Vec<f64> = a.records.iter().map(|r| r.squared_error).collect();
    let mean_se = se.iter().sum::<f64>() / 3.0;
    assert!((a.rmse * a.rmse - mean_se).abs() <= 1e-12 * mean_se);
    assert_eq!(a.truth.len(), 256);
    assert_eq!(a.mean_estimate.len(), 256);
}

#[test]
fn files_reproduce_the_summary() {
    let spec = quick_spec(2);
    let summary = run_campaign(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("records.csv");
    write_records_csv(&csv, &summary.records).unwrap();
    let records = read_records_csv(&csv).unwrap();
    assert_eq!(records, summary.records);
    let agg = aggregate_records(&records, spec.bootstrap_resamples, spec.bootstrap_seed).unwrap();
    assert_eq!(agg.rmse, summary.rmse);
    assert_eq!(agg.rmse_error, summary.rmse_error);
    assert_eq!(agg.mean_knots, summary.mean_knots);
    assert_eq!(agg.knots_std, summary.knots_std);

    let json = dir.path().join("summary.json");
    write_json(&json, &CampaignReport::new(spec.clone(), summary.clone())).unwrap();
    let report = read_report(&json).unwrap();
    assert_eq!(report.spec, spec);
    assert_eq!(report.summary, summary);
}

#[test]
fn campaign_files() {
    let dir = tempfile::tempdir().unwrap();
    let toml = dir.path().join("c.toml");
    std::fs::write(&toml, "benchmark = \"f3\"\nlabel = \"LP_10_5_50_FKM\"\nnum_realizations = 7\n").unwrap();
    let spec = CampaignFile::load(&toml).unwrap().into_spec().unwrap();
    assert_eq!(spec.benchmark, BenchmarkId::F3);
    assert_eq!(spec.snr, 10.0);
    assert_eq!(spec.config.lambda, 5.0);
    assert_eq!(spec.num_realizations, 7);

    let json = dir.path().join("c.json");
    let config = serde_json::to_string(&ShapesConfig::<f64>::new(0.3, 20)).unwrap();
    std::fs::write(&json, format!("{{\"benchmark\": \"f10\", \"snr\": 25.0, \"config\": {config}}}")).unwrap();
    let spec = CampaignFile::load(&json).unwrap().into_spec().unwrap();
    assert_eq!(spec.config.lambda, 0.3);
    assert_eq!(spec.num_realizations, 100);

    std::fs::write(&json, "{\"benchmark\": \"f10\"}").unwrap();
    assert!(CampaignFile::load(&json).unwrap().into_spec().is_err());
    std::fs::write(&toml, "benchmark = \"f11\"\nlabel = \"LP_10_5_50_FKM\"\n").unwrap();
    assert!(CampaignFile::load(&toml).is_err());
}
