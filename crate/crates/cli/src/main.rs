//! Command-line front end for the online FDR harness.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use online_fdr::harness::{
    self, analyze_stream, overlap_fraction, read_pvalue_csv, run_experiment, write_curves_csv, write_decisions_csv,
    write_report_csv, ExperimentConfig, RuleSpec, FULL_TRIALS, PRESETS,
};
use online_fdr::schedule::ScheduleDescriptor;
use online_fdr::theory::{self, special};
use online_fdr::{AlternativeModel, RateBoundParams};

#[derive(Parser)]
#[command(name = "online-fdr", version, about = "Online false discovery rate control: simulation, analysis and bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run a Monte Carlo sweep from a config file and/or flags.
    Simulate(SimulateArgs),
    /// Apply a rule to a p-value CSV and write the decision log.
    Analyze(AnalyzeArgs),
    /// Compute two-sample t p-values from expression and label CSVs.
    Ingest(IngestArgs),
    /// Evaluate special functions and rate bounds.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Run a named replication preset.
    Replicate(ReplicateArgs),
}

/// Flags named after config keys (hyphens for underscores).
#[derive(Args, Default)]
struct ConfigFlags {
    /// Comma-separated rules: lond, lond_or1, lond_adj, lord, bonferroni, alpha_investing, bh, bh_adj.
    #[arg(long)]
    rules: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated mixing proportions.
    #[arg(long)]
    pis: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// I or II.
    #[arg(long)]
    scenario: Option<String>,
    /// independent or equicorr.
    #[arg(long)]
    dependence: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    /// e.g. `log_power(nu=2)` or `power_law(a=1.5,horizon=1000)`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    /// Signal variance, or `auto` for 2 log n.
    #[arg(long)]
    sigma2: Option<String>,
    #[arg(long)]
    curve_points: Option<String>,
    /// bh, bh_adj or auto.
    #[arg(long)]
    power_reference: Option<String>,
}

impl ConfigFlags {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let pairs = [
            ("rules", &self.rules),
            ("n", &self.n),
            ("pis", &self.pis),
            ("trials", &self.trials),
            ("alpha", &self.alpha),
            ("scenario", &self.scenario),
            ("dependence", &self.dependence),
            ("rho", &self.rho),
            ("schedule", &self.schedule),
            ("seed", &self.seed),
            ("eta", &self.eta),
            ("sigma2", &self.sigma2),
            ("curve_points", &self.curve_points),
            ("power_reference", &self.power_reference),
        ];
        let text: String = pairs.iter().filter_map(|(k, v)| v.as_ref().map(|v| format!("{k}={v}\n"))).collect();
        cfg.apply_kv(&text)?;
        Ok(())
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: ConfigFlags,
    /// Worker threads; 0 uses all cores. Does not affect output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Report CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional discovery-curve CSV path.
    #[arg(long)]
    curves: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// CSV with a `p` column and optional `truth` (1 = non-null) and `id` columns.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "lond")]
    rule: RuleSpec,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "log_power(nu=2)")]
    schedule: ScheduleDescriptor,
    /// Report the fraction of this rule's rejections also made by another rule.
    #[arg(long)]
    compare: Option<RuleSpec>,
    /// Decision CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    /// Genes in rows; first column gene id, other headers subject ids.
    #[arg(long)]
    expression: PathBuf,
    /// Columns `subject,group` with group control or case.
    #[arg(long)]
    labels: PathBuf,
    /// p-value CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Standard normal CDF.
    NormalCdf {
        #[arg(allow_negative_numbers = true)]
        x: f64,
    },
    /// Standard normal quantile.
    NormalQuantile { q: f64 },
    /// Student t CDF.
    TCdf {
        #[arg(allow_negative_numbers = true)]
        t: f64,
        df: u64,
    },
    /// CDF of alternative p-values under a point alternative at `mu`.
    AltCdf {
        x: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Asymptotic LORD discovery rate for a schedule and two-point mixture.
    LordRate {
        #[arg(long, default_value = "example2(a=2)")]
        schedule: ScheduleDescriptor,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        mu: f64,
    },
    /// Lower bound on expected LOND discoveries.
    LondRate {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        c_tilde: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Args)]
struct ReplicateArgs {
    /// One of the preset names, or `all` (requires --out-dir).
    preset: String,
    #[arg(long, default_value_t = harness::DEFAULT_TRIALS)]
    trials: usize,
    /// Run 10,000 trials instead of `--trials`.
    #[arg(long, conflicts_with = "trials")]
    full_trials: bool,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Report CSV path for a single preset (stdout if omitted).
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Directory receiving `<preset>.csv` files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_kv(&text).with_context(|| format!("parsing {}", path.display()))?;
    }
    args.flags.apply(&mut cfg)?;
    cfg.validate()?;
    if args.print_config {
        print!("{}", cfg.to_kv());
        return Ok(());
    }
    let reports = run_experiment(&cfg, args.workers)?;
    let hash = cfg.hash();
    let mut out = output(args.out.as_deref())?;
    write_report_csv(&mut out, &hash, &reports)?;
    out.flush()?;
    if let Some(path) = &args.curves {
        let mut w = output(Some(path))?;
        write_curves_csv(&mut w, &hash, &reports)?;
        w.flush()?;
    }
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let table = read_pvalue_csv(open(&args.input)?)?;
    let schedule = Arc::new(args.schedule.build(args.alpha)?.with_prefix_cache(table.pvalues.len() as u64));
    let log = analyze_stream(args.rule, &table.pvalues, args.alpha, &schedule)?;
    let mut out = output(args.out.as_deref())?;
    write_decisions_csv(&mut out, &log, table.ids.as_deref())?;
    out.flush()?;
    eprintln!("rule={} n={} discoveries={}", args.rule.label(), table.pvalues.len(), log.discoveries());
    if let Some(truth) = &table.truth {
        let o = log.outcome(truth)?;
        eprintln!(
            "false_discoveries={} true_discoveries={} fdp={}",
            o.false_discoveries,
            o.true_discoveries,
            online_fdr::metrics::fdp(&o)
        );
    }
    if let Some(other) = args.compare {
        let other_log = analyze_stream(other, &table.pvalues, args.alpha, &schedule)?;
        let frac = overlap_fraction(&log.reject_mask(), &other_log.reject_mask())?;
        eprintln!("compare={} discoveries={} overlap_fraction={frac}", other.label(), other_log.discoveries());
    }
    Ok(())
}

fn ingest(args: IngestArgs) -> Result<()> {
    let labels = harness::read_labels_csv(open(&args.labels)?)?;
    let data = harness::read_expression_csv(open(&args.expression)?, &labels)?;
    let results = harness::two_sample_pvalues(&data)?;
    let mut out = output(args.out.as_deref())?;
    harness::write_two_sample_csv(&mut out, &data.genes, &results)?;
    out.flush()?;
    let (m1, m2) = data.group_sizes();
    eprintln!("genes={} m1={m1} m2={m2} df={}", data.genes.len(), m1 + m2 - 2);
    Ok(())
}

fn bound(cmd: BoundCommand) -> Result<()> {
    match cmd {
        BoundCommand::NormalCdf { x } => println!("{}", special::normal_cdf(x)),
        BoundCommand::NormalQuantile { q } => println!("{}", special::normal_quantile(q)?),
        BoundCommand::TCdf { t, df } => println!("{}", special::t_cdf(t, df)?),
        BoundCommand::AltCdf { x, mu } => println!("{}", theory::alt_cdf(x, &AlternativeModel::new(mu, 1.0)?)?),
        BoundCommand::LordRate { schedule, alpha, epsilon, mu } => {
            let s = schedule.build(alpha)?;
            let r = theory::lord_rate(&s, &AlternativeModel::new(mu, epsilon)?)?;
            println!(
                "rate={} series={} tail_bound={} terms={} converged={}",
                r.rate, r.series, r.tail_bound, r.terms, r.converged
            );
        }
        BoundCommand::LondRate { lambda, kappa, nu, c_tilde, delta, n } => {
            let p = RateBoundParams { lambda, kappa, nu, c_tilde, delta };
            println!("{}", theory::lond_rate_bound(&p, n)?);
        }
    }
    Ok(())
}

fn replicate(args: ReplicateArgs) -> Result<()> {
    let trials = if args.full_trials { FULL_TRIALS } else { args.trials };
    if args.preset == "all" {
        let Some(dir) = &args.out_dir else { bail!("`all` needs --out-dir") };
        std::fs::create_dir_all(dir)?;
        for p in PRESETS {
            let path = dir.join(format!("{p}.csv"));
            let mut w = output(Some(&path))?;
            harness::run_preset(p, trials, args.workers, &mut w)?;
            w.flush()?;
            eprintln!("wrote {}", path.display());
        }
        return Ok(());
    }
    let path = match (&args.out, &args.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            Some(dir.join(format!("{}.csv", args.preset)))
        }
        (None, None) => None,
    };
    let mut w = output(path.as_deref())?;
    harness::run_preset(&args.preset, trials, args.workers, &mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Ingest(a) => ingest(a),
        Command::Bound(c) => bound(c),
        Command::Replicate(a) => replicate(a),
    }
}
