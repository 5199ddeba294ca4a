mod common;

use std::sync::{Arc, OnceLock};

use online_fdr::baselines::{bh, bh_adjusted};
use online_fdr::metrics::{fdp, TrialOutcome};
use online_fdr::rules::{run_stream, RuleKind};
use online_fdr::schedule::{BetaSchedule, Family};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (1.2f64..3.0).prop_map(|a| Family::PowerLaw { a }),
        (1.3f64..3.0).prop_map(|nu| Family::LogPower { nu }),
        (0.2f64..0.9).prop_map(|kappa| Family::Example1 { kappa }),
        (1.3f64..3.0).prop_map(|a| Family::Example2 { a }),
    ]
}

/// Normalizers are costly for slowly decaying families, so draw from a fixed pool.
fn schedule() -> impl Strategy<Value = Arc<BetaSchedule<f64>>> {
    static POOL: OnceLock<Vec<Arc<BetaSchedule<f64>>>> = OnceLock::new();
    let pool = POOL.get_or_init(|| {
        [
            (Family::PowerLaw { a: 1.2 }, 0.05),
            (Family::PowerLaw { a: 2.0 }, 0.1),
            (Family::LogPower { nu: 2.0 }, 0.05),
            (Family::LogPower { nu: 1.5 }, 0.2),
            (Family::Example1 { kappa: 0.5 }, 0.05),
            (Family::Example1 { kappa: 0.8 }, 0.1),
            (Family::Example2 { a: 2.0 }, 0.05),
            (Family::Example2 { a: 1.3 }, 0.15),
        ]
        .into_iter()
        .map(|(f, alpha)| Arc::new(BetaSchedule::new(f, alpha, None).unwrap()))
        .collect()
    });
    prop::sample::select(pool.clone())
}

/// p-values mixing tiny signals and uniform nulls.
fn pvalues(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![3 => 0.0f64..=1.0, 1 => 0.0f64..1e-3, 1 => Just(0.0), 1 => Just(1.0)], 1..max_len)
}

fn all_rules(s: &Arc<BetaSchedule<f64>>) -> Vec<RuleKind<f64>> {
    vec![
        RuleKind::Lond(s.clone()),
        RuleKind::LondOr1(s.clone()),
        RuleKind::LondAdjusted(s.clone()),
        RuleKind::Lord(s.clone()),
        RuleKind::Bonferroni(s.clone()),
        RuleKind::alpha_investing(s.alpha()),
    ]
}

fn mask(rule: &RuleKind<f64>, p: &[f64]) -> Vec<bool> {
    run_stream(rule, p).unwrap().iter().map(|d| d.reject).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn decisions_depend_only_on_the_past(s in schedule(), p in pvalues(120), cut in 0usize..120) {
        let cut = cut.min(p.len());
        for rule in all_rules(&s) {
            let full = run_stream(&rule, &p).unwrap();
            let prefix = run_stream(&rule, &p[..cut.max(1)]).unwrap();
            prop_assert_eq!(&full[..prefix.len()], &prefix[..]);
        }
    }

    #[test]
    fn engine_matches_replay(s in schedule(), p in pvalues(120)) {
        for rule in all_rules(&s) {
            let log = run_stream(&rule, &p).unwrap();
            let levels = common::replay_levels(&rule, &log);
            for (d, a) in log.iter().zip(levels) {
                prop_assert_eq!(d.alpha_used, a, "{} at {}", rule.name(), d.index);
                prop_assert_eq!(d.reject, d.p_value <= a);
            }
        }
    }

    #[test]
    fn lond_is_monotone_in_pvalues(s in schedule(), p in pvalues(100), shrink in prop::collection::vec(0.0f64..=1.0, 100)) {
        let lower: Vec<f64> = p.iter().zip(&shrink).map(|(p, f)| p * f).collect();
        for rule in [RuleKind::Lond(s.clone()), RuleKind::LondAdjusted(s.clone())] {
            let (a, b) = (mask(&rule, &p), mask(&rule, &lower));
            prop_assert!(a.iter().zip(&b).all(|(x, y)| !x || *y));
        }
    }

    #[test]
    fn adjusted_lond_rejects_subset_of_lond(s in schedule(), p in pvalues(150)) {
        let adj = mask(&RuleKind::LondAdjusted(s.clone()), &p);
        let plain = mask(&RuleKind::Lond(s.clone()), &p);
        prop_assert!(adj.iter().zip(&plain).all(|(a, b)| !a || *b));
    }

    #[test]
    fn lord_restarts_after_each_discovery(s in schedule(), p in pvalues(150)) {
        let log = run_stream(&RuleKind::Lord(s.clone()), &p).unwrap();
        let mut since = 0u64;
        for d in &log {
            since += 1;
            prop_assert_eq!(d.alpha_used, s.eval(since).unwrap());
            if d.reject {
                since = 0;
            }
        }
    }

    #[test]
    fn bh_is_monotone_and_adjusted_is_nested(p in pvalues(60), shrink in prop::collection::vec(0.0f64..=1.0, 60), alpha in 0.01f64..0.5) {
        let lower: Vec<f64> = p.iter().zip(&shrink).map(|(p, f)| p * f).collect();
        let a = bh(&p, alpha).unwrap().reject_mask;
        let b = bh(&lower, alpha).unwrap().reject_mask;
        prop_assert!(a.iter().zip(&b).all(|(x, y)| !x || *y));
        let adj = bh_adjusted(&p, alpha).unwrap().reject_mask;
        prop_assert!(adj.iter().zip(&a).all(|(x, y)| !x || *y));
    }

    #[test]
    fn fdp_lies_in_unit_interval(reject in prop::collection::vec(any::<bool>(), 0..50), null_seed in any::<u64>()) {
        let is_null: Vec<bool> = (0..reject.len()).map(|i| null_seed >> (i % 64) & 1 == 1).collect();
        let o = TrialOutcome::from_mask(&reject, &is_null).unwrap();
        prop_assert!(o.false_discoveries <= o.discoveries);
        prop_assert_eq!(o.false_discoveries + o.true_discoveries, o.discoveries);
        let f = fdp(&o);
        prop_assert!((0.0..=1.0).contains(&f));
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn schedule_mass_and_shape(f in family(), alpha in 0.01f64..0.2, n in 1u64..3000) {
        let s = BetaSchedule::new(f, alpha, None).unwrap();
        let total: f64 = (1..=n).map(|l| s.eval(l).unwrap()).sum();
        prop_assert!(total <= alpha * (1.0 + 1e-12));
        let from = f.monotone_from();
        for l in from..from + 50 {
            prop_assert!(s.eval(l + 1).unwrap() < s.eval(l).unwrap());
        }
        let finite = BetaSchedule::new(f, alpha, Some(n)).unwrap();
        for l in 1..=n.min(200) {
            prop_assert!(finite.eval(l).unwrap() >= s.eval(l).unwrap());
        }
    }
}

#[test]
fn bh_matches_exhaustive_oracle_with_ties() {
    // Grid p-values land exactly on step-up thresholds.
    let alpha = 0.25;
    for n in 1..=8usize {
        let grid: Vec<f64> = (0..=n).map(|k| alpha * k as f64 / n as f64).chain([0.9]).collect();
        let mut idx = vec![0usize; n];
        loop {
            let p: Vec<f64> = idx.iter().map(|&k| grid[k]).collect();
            assert_eq!(bh(&p, alpha).unwrap().reject_mask, common::bh_exhaustive(&p, alpha), "{p:?}");
            let mut k = 0;
            while k < n && idx[k] + 1 == grid.len() {
                idx[k] = 0;
                k += 1;
            }
            if k == n || n > 4 && k >= 2 {
                break;
            }
            idx[k] += 1;
        }
    }
}
