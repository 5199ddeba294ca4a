//! Report CSV: a versioned comment line, a header, one row per `(rule, pi)`.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};
use crate::metrics::ExperimentReport;

pub const REPORT_VERSION: &str = "v1";

/// Fixed leading columns, followed by [`EXTRA_COLUMNS`].
pub const REPORT_COLUMNS: [&str; 14] = [
    "rule",
    "scenario",
    "dependence",
    "n",
    "pi",
    "trials",
    "fdr",
    "fdr_se",
    "mfdr",
    "eta",
    "power_rel_bh",
    "power_se",
    "mean_D",
    "mean_V",
];
pub const EXTRA_COLUMNS: [&str; 3] = ["mfdr_se", "power_skipped", "fwer"];

pub fn report_header_comment(config_hash: &str) -> String {
    format!("# online-fdr report {REPORT_VERSION} config={config_hash}")
}

pub fn write_report_csv<W: Write>(mut out: W, config_hash: &str, reports: &[ExperimentReport]) -> Result<()> {
    writeln!(out, "{}", report_header_comment(config_hash))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS.iter().chain(EXTRA_COLUMNS.iter()))?;
    for r in reports {
        let (power, power_se) = match r.power_rel_bh {
            Some(p) => (p.mean.to_string(), p.se.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.rule.clone(),
            r.scenario.clone(),
            r.dependence.clone(),
            r.n.to_string(),
            r.pi.to_string(),
            r.trials.to_string(),
            r.fdr.mean.to_string(),
            r.fdr.se.to_string(),
            r.mfdr.value.to_string(),
            r.mfdr.eta.to_string(),
            power,
            power_se,
            r.mean_discoveries.to_string(),
            r.mean_false_discoveries.to_string(),
            r.mfdr.se.to_string(),
            r.power_skipped.to_string(),
            r.fwer.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format discovery curves: `rule,scenario,dependence,n,pi,k,mean_D_k`.
pub fn write_curves_csv<W: Write>(mut out: W, config_hash: &str, reports: &[ExperimentReport]) -> Result<()> {
    writeln!(out, "# online-fdr curves {REPORT_VERSION} config={config_hash}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rule", "scenario", "dependence", "n", "pi", "k", "mean_D_k"])?;
    for r in reports {
        for (k, d) in &r.discovery_curve {
            w.write_record([
                r.rule.clone(),
                r.scenario.clone(),
                r.dependence.clone(),
                r.n.to_string(),
                r.pi.to_string(),
                k.to_string(),
                d.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A parsed report file: the config hash and each row keyed by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub config_hash: String,
    pub columns: Vec<String>,
    pub rows: Vec<HashMap<String, String>>,
}

impl ReportTable {
    pub fn column<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.rows.iter().map(move |r| r.get(name).map(String::as_str).unwrap_or(""))
    }
}

/// Reads a report, checking the version line and the fixed columns.
pub fn read_report_csv<R: Read>(input: R) -> Result<ReportTable> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let prefix = format!("# online-fdr report {REPORT_VERSION} config=");
    let config_hash = first
        .trim_end()
        .strip_prefix(&prefix)
        .ok_or_else(|| Error::Parse(format!("missing report header, got `{}`", first.trim_end())))?
        .to_string();
    let mut r = csv::Reader::from_reader(reader);
    let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if columns.len() < REPORT_COLUMNS.len() || columns.iter().zip(REPORT_COLUMNS).any(|(a, b)| a != b) {
        return Err(Error::Parse(format!("unexpected report columns {columns:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(columns.iter().cloned().zip(rec.iter().map(str::to_string)).collect());
    }
    Ok(ReportTable { config_hash, columns, rows })
}
