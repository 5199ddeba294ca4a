//! Oracle error and power estimates over Monte Carlo trials.

use crate::error::{Error, Result};

/// Counts from one trial: `D = V + U`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Rejections `D`.
    pub discoveries: u64,
    /// False rejections `V` (true nulls rejected).
    pub false_discoveries: u64,
    /// True rejections `U`.
    pub true_discoveries: u64,
}

impl TrialOutcome {
    /// Tallies a rejection mask against the ground truth.
    pub fn from_mask(reject: &[bool], is_null: &[bool]) -> Result<Self> {
        if reject.len() != is_null.len() {
            return Err(Error::LengthMismatch {
                what: "reject mask vs truth",
                left: reject.len(),
                right: is_null.len(),
            });
        }
        let mut out = TrialOutcome::default();
        for (&r, &null) in reject.iter().zip(is_null) {
            if r {
                out.discoveries += 1;
                if null {
                    out.false_discoveries += 1;
                } else {
                    out.true_discoveries += 1;
                }
            }
        }
        Ok(out)
    }
}

/// `V / max(D, 1)`.
pub fn fdp(outcome: &TrialOutcome) -> f64 {
    outcome.false_discoveries as f64 / outcome.discoveries.max(1) as f64
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Mean and `sd / sqrt(n)` with the `n - 1` variance; summed in input order.
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InsufficientTrials { needed: 2, got: xs.len() });
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        Ok(Self { mean, se: (var / n).sqrt() })
    }
}

/// Mean FDP over trials.
pub fn estimate_fdr(outcomes: &[TrialOutcome]) -> Result<Estimate> {
    let fdps: Vec<f64> = outcomes.iter().map(fdp).collect();
    Estimate::from_samples(&fdps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfdrEstimate {
    pub value: f64,
    /// Delta-method standard error of the ratio.
    pub se: f64,
    pub eta: f64,
    /// Set when `eta = 0` and no trial made a discovery; `value` is then 0 by convention.
    pub degenerate: bool,
}

/// `mean(V) / (mean(D) + eta)`.
pub fn estimate_mfdr(outcomes: &[TrialOutcome], eta: f64) -> Result<MfdrEstimate> {
    if outcomes.is_empty() {
        return Err(Error::InsufficientTrials { needed: 1, got: 0 });
    }
    if !(eta >= 0.0) {
        return crate::error::invalid("eta", eta, "eta must be nonnegative");
    }
    let n = outcomes.len() as f64;
    let v: Vec<f64> = outcomes.iter().map(|o| o.false_discoveries as f64).collect();
    let d: Vec<f64> = outcomes.iter().map(|o| o.discoveries as f64).collect();
    let mean_v = v.iter().sum::<f64>() / n;
    let mean_d = d.iter().sum::<f64>() / n;
    let denom = mean_d + eta;
    if denom == 0.0 {
        return Ok(MfdrEstimate { value: 0.0, se: 0.0, eta, degenerate: true });
    }
    let ratio = mean_v / denom;
    let se = if outcomes.len() > 1 {
        let (mut var_v, mut var_d, mut cov) = (0.0, 0.0, 0.0);
        for (x, y) in v.iter().zip(&d) {
            var_v += (x - mean_v) * (x - mean_v);
            var_d += (y - mean_d) * (y - mean_d);
            cov += (x - mean_v) * (y - mean_d);
        }
        let k = n - 1.0;
        let var = (var_v / k - 2.0 * ratio * cov / k + ratio * ratio * var_d / k) / (denom * denom * n);
        var.max(0.0).sqrt()
    } else {
        0.0
    };
    Ok(MfdrEstimate { value: ratio, se, eta, degenerate: false })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePower {
    pub mean: f64,
    pub se: f64,
    /// Trials that entered the average.
    pub used: usize,
    /// Trials skipped because BH had no true discoveries.
    pub skipped: usize,
}

/// Mean of `U / U_BH` over paired trials with `U_BH > 0`.
pub fn relative_power(outcomes: &[TrialOutcome], bh_outcomes: &[TrialOutcome]) -> Result<RelativePower> {
    if outcomes.len() != bh_outcomes.len() {
        return Err(Error::LengthMismatch { what: "paired trials", left: outcomes.len(), right: bh_outcomes.len() });
    }
    let ratios: Vec<f64> = outcomes
        .iter()
        .zip(bh_outcomes)
        .filter(|(_, b)| b.true_discoveries > 0)
        .map(|(o, b)| o.true_discoveries as f64 / b.true_discoveries as f64)
        .collect();
    let skipped = outcomes.len() - ratios.len();
    match ratios.len() {
        0 => Err(Error::AllTrialsSkipped { trials: outcomes.len() }),
        1 => Ok(RelativePower { mean: ratios[0], se: 0.0, used: 1, skipped }),
        used => {
            let est = Estimate::from_samples(&ratios)?;
            Ok(RelativePower { mean: est.mean, se: est.se, used, skipped })
        }
    }
}

/// Fraction of trials with at least one false rejection.
pub fn fwer(outcomes: &[TrialOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.false_discoveries > 0).count() as f64 / outcomes.len() as f64
}

/// Aggregated metrics for one (rule, pi, scenario, n) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rule: String,
    pub scenario: String,
    pub dependence: String,
    pub n: usize,
    pub pi: f64,
    pub trials: usize,
    pub fdr: Estimate,
    pub mfdr: MfdrEstimate,
    /// `None` when BH made no true discoveries in any trial.
    pub power_rel_bh: Option<RelativePower>,
    pub power_skipped: usize,
    pub mean_discoveries: f64,
    pub mean_false_discoveries: f64,
    pub fwer: f64,
    /// `(k, mean D(k))` at checkpoints along the stream.
    pub discovery_curve: Vec<(usize, f64)>,
}
