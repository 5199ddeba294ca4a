//! Experiment configuration and its flat `key=value` text form.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::rules::RuleKind;
use crate::schedule::{BetaSchedule, ScheduleDescriptor};
use crate::synth::{default_sigma2, DependenceSpec, Scenario};

/// Default mixing-proportion grid.
pub const DEFAULT_PIS: [f64; 8] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const DEFAULT_TRIALS: usize = 2_000;
pub const FULL_TRIALS: usize = 10_000;

/// A procedure evaluated by the harness: an online rule or an offline baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleSpec {
    Lond,
    LondOr1,
    LondAdjusted,
    Lord,
    Bonferroni,
    AlphaInvesting,
    Bh,
    BhAdjusted,
}

impl RuleSpec {
    pub const ALL: [RuleSpec; 8] = [
        RuleSpec::Lond,
        RuleSpec::LondOr1,
        RuleSpec::LondAdjusted,
        RuleSpec::Lord,
        RuleSpec::Bonferroni,
        RuleSpec::AlphaInvesting,
        RuleSpec::Bh,
        RuleSpec::BhAdjusted,
    ];

    /// Identifier used in configs and on the command line.
    pub fn key(&self) -> &'static str {
        match self {
            RuleSpec::Lond => "lond",
            RuleSpec::LondOr1 => "lond_or1",
            RuleSpec::LondAdjusted => "lond_adj",
            RuleSpec::Lord => "lord",
            RuleSpec::Bonferroni => "bonferroni",
            RuleSpec::AlphaInvesting => "alpha_investing",
            RuleSpec::Bh => "bh",
            RuleSpec::BhAdjusted => "bh_adj",
        }
    }

    /// Name written in report rows.
    pub fn label(&self) -> &'static str {
        match self {
            RuleSpec::Bh => "BH",
            RuleSpec::BhAdjusted => "BH_ADJ",
            RuleSpec::Lond => "LOND",
            RuleSpec::LondOr1 => "LOND_OR1",
            RuleSpec::LondAdjusted => "LOND_ADJ",
            RuleSpec::Lord => "LORD",
            RuleSpec::Bonferroni => "BONFERRONI",
            RuleSpec::AlphaInvesting => "ALPHA_INVESTING",
        }
    }

    pub fn is_offline(&self) -> bool {
        matches!(self, RuleSpec::Bh | RuleSpec::BhAdjusted)
    }

    /// The online rule, or `None` for the BH baselines.
    pub fn online_rule(&self, schedule: &Arc<BetaSchedule<f64>>, alpha: f64) -> Option<RuleKind<f64>> {
        let s = Arc::clone(schedule);
        Some(match self {
            RuleSpec::Lond => RuleKind::Lond(s),
            RuleSpec::LondOr1 => RuleKind::LondOr1(s),
            RuleSpec::LondAdjusted => RuleKind::LondAdjusted(s),
            RuleSpec::Lord => RuleKind::Lord(s),
            RuleSpec::Bonferroni => RuleKind::Bonferroni(s),
            RuleSpec::AlphaInvesting => RuleKind::alpha_investing(alpha),
            RuleSpec::Bh | RuleSpec::BhAdjusted => return None,
        })
    }
}

impl FromStr for RuleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        RuleSpec::ALL
            .into_iter()
            .find(|r| r.key() == s || r.label().eq_ignore_ascii_case(&s))
            .ok_or_else(|| Error::Parse(format!("unknown rule `{s}`")))
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(Scenario::I),
            "II" | "ii" | "2" => Ok(Scenario::II),
            other => Err(Error::Parse(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Baseline that relative power is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerReference {
    Bh,
    BhAdjusted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rules: Vec<RuleSpec>,
    pub n: usize,
    pub pis: Vec<f64>,
    pub trials: usize,
    pub alpha: f64,
    pub scenario: Scenario,
    pub dependence: DependenceSpec,
    pub schedule: ScheduleDescriptor,
    pub master_seed: u64,
    pub eta: f64,
    /// Signal variance; `None` means `2 log n`.
    pub sigma2: Option<f64>,
    /// Number of discovery-curve checkpoints along the stream.
    pub curve_points: usize,
    /// `None` picks BH for independent noise and adjusted BH otherwise.
    pub power_reference: Option<PowerReference>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rules: vec![RuleSpec::Lond, RuleSpec::Lord, RuleSpec::Bonferroni, RuleSpec::AlphaInvesting, RuleSpec::Bh],
            n: 1000,
            pis: DEFAULT_PIS.to_vec(),
            trials: DEFAULT_TRIALS,
            alpha: 0.05,
            scenario: Scenario::I,
            dependence: DependenceSpec::Independent,
            schedule: ScheduleDescriptor::default(),
            master_seed: 0x5eed,
            eta: 1.0,
            sigma2: None,
            curve_points: 10,
            power_reference: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return invalid("rules", "[]", "need at least one rule");
        }
        if self.n == 0 {
            return invalid("n", self.n, "need at least one hypothesis");
        }
        if self.trials < 2 {
            return Err(Error::InsufficientTrials { needed: 2, got: self.trials });
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return invalid("alpha", self.alpha, "alpha must lie in (0, 1)");
        }
        if self.pis.is_empty() {
            return invalid("pis", "[]", "need at least one mixing proportion");
        }
        if let Some(pi) = self.pis.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return invalid("pis", pi, "mixing proportions must lie in [0, 1]");
        }
        if !(self.eta >= 0.0) {
            return invalid("eta", self.eta, "eta must be nonnegative");
        }
        if let Some(s2) = self.sigma2 {
            if !(s2 > 0.0) {
                return invalid("sigma2", s2, "signal variance must be positive");
            }
        }
        if self.curve_points == 0 {
            return invalid("curve_points", 0, "need at least one checkpoint");
        }
        self.dependence.validate()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2.unwrap_or_else(|| default_sigma2(self.n))
    }

    pub fn power_reference(&self) -> PowerReference {
        self.power_reference.unwrap_or(match self.dependence {
            DependenceSpec::Independent => PowerReference::Bh,
            DependenceSpec::EquicorrSigned { .. } => PowerReference::BhAdjusted,
        })
    }

    /// Canonical `key=value` text, one key per line in fixed order.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let join = |v: Vec<String>| v.join(",");
        let _ = writeln!(out, "rules={}", join(self.rules.iter().map(|r| r.key().to_string()).collect()));
        let _ = writeln!(out, "n={}", self.n);
        let _ = writeln!(out, "pis={}", join(self.pis.iter().map(f64::to_string).collect()));
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "alpha={}", self.alpha);
        let _ = writeln!(out, "scenario={}", self.scenario.label());
        match self.dependence {
            DependenceSpec::Independent => {
                let _ = writeln!(out, "dependence=independent");
            }
            DependenceSpec::EquicorrSigned { rho } => {
                let _ = writeln!(out, "dependence=equicorr");
                let _ = writeln!(out, "rho={rho}");
            }
        }
        let _ = writeln!(out, "schedule={}", self.schedule);
        let _ = writeln!(out, "seed={}", self.master_seed);
        let _ = writeln!(out, "eta={}", self.eta);
        if let Some(s2) = self.sigma2 {
            let _ = writeln!(out, "sigma2={s2}");
        }
        let _ = writeln!(out, "curve_points={}", self.curve_points);
        if let Some(r) = self.power_reference {
            let _ = writeln!(out, "power_reference={}", if r == PowerReference::Bh { "bh" } else { "bh_adj" });
        }
        out
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments are ignored.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        let mut rho = None;
        let mut equicorr = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim(), &mut rho, &mut equicorr)?;
        }
        if let Some(is_eq) = equicorr {
            self.dependence = if is_eq {
                DependenceSpec::EquicorrSigned { rho: rho.unwrap_or(0.5) }
            } else {
                DependenceSpec::Independent
            };
        } else if let (Some(r), DependenceSpec::EquicorrSigned { .. }) = (rho, self.dependence) {
            self.dependence = DependenceSpec::EquicorrSigned { rho: r };
        }
        Ok(())
    }

    /// Sets one key; the same names serve as CLI flags.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        self.apply_kv(&format!("{key}={value}"))
    }

    fn set(&mut self, key: &str, value: &str, rho: &mut Option<f64>, equicorr: &mut Option<bool>) -> Result<()> {
        let num = |v: &str| v.parse::<f64>().map_err(|_| Error::Parse(format!("`{key}`: not a number: `{v}`")));
        let int = |v: &str| v.parse::<u64>().map_err(|_| Error::Parse(format!("`{key}`: not an integer: `{v}`")));
        match key {
            "rules" => self.rules = value.split(',').map(str::parse).collect::<Result<_>>()?,
            "n" => self.n = int(value)? as usize,
            "pis" => self.pis = value.split(',').map(|v| num(v.trim())).collect::<Result<_>>()?,
            "trials" => self.trials = int(value)? as usize,
            "alpha" => self.alpha = num(value)?,
            "scenario" => self.scenario = value.parse()?,
            "dependence" => {
                *equicorr = Some(match value {
                    "independent" | "indep" => false,
                    "equicorr" | "equicorr_signed" | "dependent" | "dep" => true,
                    other => return Err(Error::Parse(format!("unknown dependence `{other}`"))),
                })
            }
            "rho" => *rho = Some(num(value)?),
            "schedule" => self.schedule = value.parse()?,
            "seed" => self.master_seed = int(value)?,
            "eta" => self.eta = num(value)?,
            "sigma2" => self.sigma2 = if value == "auto" { None } else { Some(num(value)?) },
            "curve_points" => self.curve_points = int(value)? as usize,
            "power_reference" => {
                self.power_reference = match value {
                    "auto" => None,
                    other => match other.parse::<RuleSpec>()? {
                        RuleSpec::Bh => Some(PowerReference::Bh),
                        RuleSpec::BhAdjusted => Some(PowerReference::BhAdjusted),
                        _ => return Err(Error::Parse(format!("power reference must be bh or bh_adj, got `{other}`"))),
                    },
                }
            }
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// First 16 hex digits of SHA-256 over [`to_kv`](Self::to_kv).
    pub fn hash(&self) -> String {
        config_hash(&[self])
    }
}

/// Hash over several configs' canonical text, in order.
pub fn config_hash(configs: &[&ExperimentConfig]) -> String {
    let mut h = Sha256::new();
    for c in configs {
        h.update(c.to_kv().as_bytes());
        h.update(b"\x1e");
    }
    hex::encode(h.finalize())[..16].to_string()
}
