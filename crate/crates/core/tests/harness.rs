use std::sync::Arc;

use online_fdr::harness::{
    analyze_stream, overlap_fraction, read_pvalue_csv, read_report_csv, run_experiment, two_sample_pvalues,
    write_report_csv, ExperimentConfig, Group, RuleSpec, TwoSampleDataset, REPORT_COLUMNS,
};
use online_fdr::schedule::BetaSchedule;
use online_fdr::seed::{Purpose, SeedKey};
use online_fdr::synth::{sample_statistics, sample_truth, write_stream_csv, DependenceSpec, Scenario};
use online_fdr::theory::special::t_cdf;
use rand_distr::{Distribution, StandardNormal};

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        rules: vec![RuleSpec::Lond, RuleSpec::Lord, RuleSpec::BhAdjusted],
        n: 200,
        trials: 30,
        pis: vec![0.0, 0.2],
        ..ExperimentConfig::default()
    }
}

fn report_bytes(cfg: &ExperimentConfig, workers: usize) -> Vec<u8> {
    let mut buf = Vec::new();
    write_report_csv(&mut buf, &cfg.hash(), &run_experiment(cfg, workers).unwrap()).unwrap();
    buf
}

#[test]
fn report_csv_roundtrips_with_fixed_columns() {
    let cfg = small_config();
    let bytes = report_bytes(&cfg, 2);
    let table = read_report_csv(&bytes[..]).unwrap();
    assert_eq!(table.config_hash, cfg.hash());
    assert_eq!(&table.columns[..REPORT_COLUMNS.len()], &REPORT_COLUMNS.map(String::from)[..]);
    assert_eq!(table.rows.len(), 6);
    let rules: Vec<&str> = table.column("rule").collect();
    assert_eq!(rules, ["LOND", "LOND", "LORD", "LORD", "BH_ADJ", "BH_ADJ"]);
    // pi = 0 has no true discoveries, so relative power is blank.
    assert_eq!(table.rows[0]["power_rel_bh"], "");
    assert_eq!(table.rows[0]["power_skipped"], "30");
    assert!(table.rows[1]["power_rel_bh"].parse::<f64>().is_ok());
}

#[test]
fn reports_are_identical_across_worker_counts() {
    let mut cfg = small_config();
    cfg.scenario = Scenario::II;
    cfg.dependence = DependenceSpec::EquicorrSigned { rho: 0.3 };
    assert_eq!(report_bytes(&cfg, 1), report_bytes(&cfg, 3));
}

#[test]
fn seed_changes_output() {
    let cfg = small_config();
    let other = ExperimentConfig { master_seed: cfg.master_seed + 1, ..cfg.clone() };
    assert_ne!(report_bytes(&cfg, 1), report_bytes(&other, 1));
}

#[test]
fn invalid_config_emits_nothing() {
    let cfg = ExperimentConfig { trials: 1, ..small_config() };
    assert!(run_experiment(&cfg, 1).is_err());
}

#[test]
fn analyze_edge_streams() {
    let s = Arc::new(BetaSchedule::log_power(0.05, 2.0, None).unwrap());
    for rule in [RuleSpec::Lond, RuleSpec::Lord] {
        let log = analyze_stream(rule, &[1.0; 50], 0.05, &s).unwrap();
        assert_eq!(log.discoveries(), 0);
        for r in &log.rows {
            assert_eq!(r.alpha, s.eval(r.index).unwrap());
        }
    }
    let log = analyze_stream(RuleSpec::Lond, &[0.0; 50], 0.05, &s).unwrap();
    assert_eq!(log.discoveries(), 50);

    let one = Arc::new(BetaSchedule::<f64>::power_law(0.005, 2.0, Some(1)).unwrap());
    assert!((one.eval(1).unwrap() - 0.005).abs() < 1e-15);
    assert_eq!(analyze_stream(RuleSpec::Lond, &[0.001], 0.005, &one).unwrap().discoveries(), 1);
}

#[test]
fn stream_csv_feeds_analysis() {
    let key = SeedKey::new(7, 0, 0, Purpose::Truth);
    let truth = sample_truth(300, 0.2, 2.0 * 300f64.ln(), &mut key.rng()).unwrap();
    let stream =
        sample_statistics(&truth, DependenceSpec::Independent, &mut key.with_purpose(Purpose::Statistics).rng())
            .unwrap();
    let mut buf = Vec::new();
    write_stream_csv(&mut buf, &stream, &truth).unwrap();
    let table = read_pvalue_csv(&buf[..]).unwrap();
    assert_eq!(table.pvalues, stream.pvalues);
    assert!(table.truth.is_none());

    let mut csv = String::from("p,truth\n");
    for (p, null) in stream.pvalues.iter().zip(&truth.is_null) {
        csv.push_str(&format!("{p},{}\n", u8::from(!null)));
    }
    let table = read_pvalue_csv(csv.as_bytes()).unwrap();
    let s = Arc::new(BetaSchedule::log_power(0.05, 2.0, None).unwrap());
    let log = analyze_stream(RuleSpec::Lord, &table.pvalues, 0.05, &s).unwrap();
    let o = log.outcome(table.truth.as_ref().unwrap()).unwrap();
    assert_eq!(o.discoveries as usize, log.discoveries());
    assert!(o.true_discoveries > 0);
}

fn synthetic_dataset(genes: usize, signals: usize, m1: usize, m2: usize, shift: f64, seed: u64) -> TwoSampleDataset {
    let mut rng = SeedKey::new(seed, 0, 0, Purpose::Other(1)).rng();
    let groups: Vec<Group> = (0..m1).map(|_| Group::Control).chain((0..m2).map(|_| Group::Case)).collect();
    let expression = (0..genes)
        .map(|g| {
            groups
                .iter()
                .map(|grp| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + if g < signals && *grp == Group::Case { shift } else { 0.0 }
                })
                .collect()
        })
        .collect();
    TwoSampleDataset::new((0..genes).map(|g| format!("gene{g}")).collect(), expression, groups).unwrap()
}

#[test]
fn separated_means_give_small_pvalues() {
    // Noise -1, 0, 1 in each group has unit sample variance.
    let groups = vec![Group::Control, Group::Control, Group::Control, Group::Case, Group::Case, Group::Case];
    let rows = vec![vec![-1.0, 0.0, 1.0, 9.0, 10.0, 11.0], vec![1.0, -1.0, 0.0, 10.0, 11.0, 9.0]];
    let d = TwoSampleDataset::new(vec!["a".into(), "b".into()], rows, groups).unwrap();
    for (row, r) in d.expression.iter().zip(two_sample_pvalues(&d).unwrap()) {
        let (a, b) = (&row[..3], &row[3..]);
        let mean = |x: &[f64]| x.iter().sum::<f64>() / 3.0;
        let ss = |x: &[f64]| x.iter().map(|v| (v - mean(x)).powi(2)).sum::<f64>();
        let t = (mean(b) - mean(a)) / ((ss(a) + ss(b)) / 4.0 * (2.0 / 3.0)).sqrt();
        assert!((r.t - t).abs() < 1e-12 * t.abs());
        let p = 2.0 * (1.0 - t_cdf(t.abs(), 4).unwrap());
        assert!((r.p - p).abs() < 1e-12, "{} vs {p}", r.p);
        assert!(r.p < 1e-3);
    }
}

#[test]
fn two_sample_pipeline_reports_overlap() {
    let d = synthetic_dataset(2000, 200, 25, 25, 1.5, 3);
    let p: Vec<f64> = two_sample_pvalues(&d).unwrap().iter().map(|r| r.p).collect();
    let s = Arc::new(BetaSchedule::log_power(0.05, 2.0, None).unwrap().with_prefix_cache(p.len() as u64));
    let lond = analyze_stream(RuleSpec::LondAdjusted, &p, 0.05, &s).unwrap();
    let bh = analyze_stream(RuleSpec::BhAdjusted, &p, 0.05, &s).unwrap();
    let frac = overlap_fraction(&lond.reject_mask(), &bh.reject_mask()).unwrap();
    println!("adjusted LOND {} / adjusted BH {} / overlap {frac}", lond.discoveries(), bh.discoveries());
    assert!(lond.discoveries() > 0 && bh.discoveries() > 0);
    assert!((0.0..=1.0).contains(&frac));
}
