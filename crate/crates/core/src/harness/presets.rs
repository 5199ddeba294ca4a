//! Named replication presets. Each preset yields one report CSV.

use std::io::Write;

use super::config::{config_hash, ExperimentConfig, RuleSpec};
use super::experiment::run_experiment;
use super::report::write_report_csv;
use crate::error::{Error, Result};
use crate::metrics::ExperimentReport;
use crate::synth::{DependenceSpec, Scenario};

pub const PRESETS: [&str; 5] =
    ["scenario1-indep", "scenario2-indep", "scenario1-dep", "scenario2-dep", "discovery-curves"];

/// Stream lengths swept by `discovery-curves`.
pub const CURVE_NS: [usize; 4] = [500, 1000, 2000, 4000];

/// Configs for a preset, all with `trials` trials.
pub fn preset_configs(name: &str, trials: usize) -> Result<Vec<ExperimentConfig>> {
    let base = ExperimentConfig { trials, ..ExperimentConfig::default() };
    let independent =
        vec![RuleSpec::Lond, RuleSpec::Lord, RuleSpec::Bonferroni, RuleSpec::AlphaInvesting, RuleSpec::Bh];
    let dependent = ExperimentConfig {
        rules: vec![RuleSpec::LondAdjusted, RuleSpec::BhAdjusted],
        dependence: DependenceSpec::EquicorrSigned { rho: 0.5 },
        ..base.clone()
    };
    Ok(match name {
        "scenario1-indep" => vec![ExperimentConfig { rules: independent, ..base }],
        "scenario2-indep" => vec![ExperimentConfig { rules: independent, scenario: Scenario::II, ..base }],
        "scenario1-dep" => vec![dependent],
        "scenario2-dep" => vec![ExperimentConfig { scenario: Scenario::II, ..dependent }],
        "discovery-curves" => [Scenario::I, Scenario::II]
            .into_iter()
            .flat_map(|scenario| {
                let base = &base;
                CURVE_NS.into_iter().map(move |n| ExperimentConfig {
                    rules: vec![RuleSpec::Lond, RuleSpec::Lord],
                    n,
                    scenario,
                    ..base.clone()
                })
            })
            .collect(),
        other => return Err(Error::Parse(format!("unknown preset `{other}`; expected one of {}", PRESETS.join(", ")))),
    })
}

/// Runs every config of a preset and writes a single report CSV.
pub fn run_preset<W: Write>(name: &str, trials: usize, workers: usize, out: W) -> Result<Vec<ExperimentReport>> {
    let configs = preset_configs(name, trials)?;
    let mut reports = Vec::new();
    for c in &configs {
        reports.extend(run_experiment(c, workers)?);
    }
    let hash = config_hash(&configs.iter().collect::<Vec<_>>());
    write_report_csv(out, &hash, &reports)?;
    Ok(reports)
}
