//! Monte Carlo driver: trials in parallel, reductions in trial order.

use std::sync::Arc;

use rayon::prelude::*;

use super::config::{ExperimentConfig, PowerReference, RuleSpec};
use crate::baselines::{bh, bh_adjusted};
use crate::error::{Error, Result};
use crate::metrics::{estimate_fdr, estimate_mfdr, fwer, relative_power, ExperimentReport, TrialOutcome};
use crate::rules::run_stream;
use crate::schedule::BetaSchedule;
use crate::seed::{Purpose, SeedKey};
use crate::synth::{apply_scenario, sample_statistics, sample_truth};

/// Outcome of one procedure on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTrial {
    pub outcome: TrialOutcome,
    /// Discoveries among the first `k` hypotheses, per checkpoint.
    pub curve: Vec<u32>,
}

/// Stream positions where the discovery curve is sampled.
pub fn curve_checkpoints(n: usize, points: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (1..=points).map(|j| (n * j).div_ceil(points).max(1)).collect();
    ks.dedup();
    ks
}

/// Seed cell for a mixing proportion; keyed by value so grids can be extended.
pub fn pi_cell(pi: f64) -> u64 {
    pi.to_bits()
}

/// Configured rules plus the power reference; returns the reference's index.
fn evaluated(config: &ExperimentConfig) -> (Vec<RuleSpec>, usize) {
    let reference = match config.power_reference() {
        PowerReference::Bh => RuleSpec::Bh,
        PowerReference::BhAdjusted => RuleSpec::BhAdjusted,
    };
    let mut all = config.rules.clone();
    if !all.contains(&reference) {
        all.push(reference);
    }
    let at = all.iter().position(|s| *s == reference).expect("reference present");
    (all, at)
}

fn mask_trial(reject: &[bool], is_null: &[bool], ks: &[usize]) -> Result<RuleTrial> {
    let outcome = TrialOutcome::from_mask(reject, is_null)?;
    let mut curve = Vec::with_capacity(ks.len());
    let (mut count, mut at) = (0u32, 0usize);
    for &k in ks {
        count += reject[at..k].iter().filter(|&&r| r).count() as u32;
        at = k;
        curve.push(count);
    }
    Ok(RuleTrial { outcome, curve })
}

/// Runs one trial of one cell. Returns results in `specs` order.
pub fn run_trial(
    config: &ExperimentConfig,
    schedule: &Arc<BetaSchedule<f64>>,
    specs: &[RuleSpec],
    pi: f64,
    trial: u64,
) -> Result<Vec<RuleTrial>> {
    let key = SeedKey::new(config.master_seed, pi_cell(pi), trial, Purpose::Truth);
    let truth = sample_truth(config.n, pi, config.sigma2(), &mut key.rng())?;
    let stream = sample_statistics(&truth, config.dependence, &mut key.with_purpose(Purpose::Statistics).rng())?;
    let (stream, truth) = apply_scenario(stream, truth, config.scenario)?;
    let ks = curve_checkpoints(config.n, config.curve_points);
    specs
        .iter()
        .map(|spec| {
            let mask = match spec {
                RuleSpec::Bh => bh(&stream.pvalues, config.alpha)?.reject_mask,
                RuleSpec::BhAdjusted => bh_adjusted(&stream.pvalues, config.alpha)?.reject_mask,
                online => {
                    let rule = online.online_rule(schedule, config.alpha).expect("online rule");
                    run_stream(&rule, &stream.pvalues)?.iter().map(|d| d.reject).collect()
                }
            };
            mask_trial(&mask, &truth.is_null, &ks)
        })
        .collect()
}

/// Builds a thread pool of `workers` threads (0 means rayon's default).
pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|_| Error::InvalidParameter {
        name: "workers",
        value: workers.to_string(),
        reason: "thread pool construction failed",
    })
}

/// One report per `(rule, pi)`, rules outer, in config order.
/// Output does not depend on `workers`.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<Vec<ExperimentReport>> {
    config.validate()?;
    let pool = thread_pool(workers)?;
    pool.install(|| run_in_current_pool(config))
}

fn run_in_current_pool(config: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    let schedule = Arc::new(config.schedule.build(config.alpha)?.with_prefix_cache(config.n as u64));
    let (specs, reference) = evaluated(config);
    let ks = curve_checkpoints(config.n, config.curve_points);

    let mut by_pi = Vec::with_capacity(config.pis.len());
    for &pi in &config.pis {
        let trials: Vec<Vec<RuleTrial>> = (0..config.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(config, &schedule, &specs, pi, t))
            .collect::<Result<_>>()?;
        by_pi.push(trials);
    }

    let mut reports = Vec::with_capacity(config.rules.len() * config.pis.len());
    for (r, spec) in config.rules.iter().enumerate() {
        for (&pi, trials) in config.pis.iter().zip(&by_pi) {
            let outcomes: Vec<TrialOutcome> = trials.iter().map(|t| t[r].outcome).collect();
            let reference_outcomes: Vec<TrialOutcome> = trials.iter().map(|t| t[reference].outcome).collect();
            let power = match relative_power(&outcomes, &reference_outcomes) {
                Ok(p) => Some(p),
                Err(Error::AllTrialsSkipped { .. }) => None,
                Err(e) => return Err(e),
            };
            let trials_f = trials.len() as f64;
            let curve = ks
                .iter()
                .enumerate()
                .map(|(c, &k)| (k, trials.iter().map(|t| t[r].curve[c] as f64).sum::<f64>() / trials_f))
                .collect();
            reports.push(ExperimentReport {
                rule: spec.label().to_string(),
                scenario: config.scenario.label().to_string(),
                dependence: config.dependence.label(),
                n: config.n,
                pi,
                trials: trials.len(),
                fdr: estimate_fdr(&outcomes)?,
                mfdr: estimate_mfdr(&outcomes, config.eta)?,
                power_skipped: power.map_or(trials.len(), |p| p.skipped),
                power_rel_bh: power,
                mean_discoveries: outcomes.iter().map(|o| o.discoveries as f64).sum::<f64>() / trials_f,
                mean_false_discoveries: outcomes.iter().map(|o| o.false_discoveries as f64).sum::<f64>() / trials_f,
                fwer: fwer(&outcomes),
                discovery_curve: curve,
            });
        }
    }
    Ok(reports)
}
