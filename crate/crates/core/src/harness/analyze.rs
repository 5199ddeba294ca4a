//! Running a rule over a supplied p-value stream.

use std::io::{Read, Write};
use std::sync::Arc;

use super::config::RuleSpec;
use crate::baselines::{bh, bh_adjusted};
use crate::error::{Error, Result};
use crate::metrics::TrialOutcome;
use crate::rules::run_stream;
use crate::scalar::CompensatedSum;
use crate::schedule::BetaSchedule;

/// p-values in stream order, with optional ids and ground truth.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PvalueTable {
    pub ids: Option<Vec<String>>,
    pub pvalues: Vec<f64>,
    /// `true` marks a non-null (signal) hypothesis.
    pub truth: Option<Vec<bool>>,
}

fn parse_truth(s: &str, row: usize) -> Result<bool> {
    match s.trim() {
        "1" | "true" | "TRUE" | "True" => Ok(true),
        "0" | "false" | "FALSE" | "False" => Ok(false),
        other => Err(Error::Parse(format!("row {row}: truth must be 0 or 1, got `{other}`"))),
    }
}

/// Reads a CSV with a `p` column, an optional `truth` column (1 = non-null)
/// and an optional `id` or `gene` column.
pub fn read_pvalue_csv<R: Read>(input: R) -> Result<PvalueTable> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let p_col = find("p").ok_or_else(|| Error::Parse("p-value CSV needs a `p` column".into()))?;
    let truth_col = find("truth");
    let id_col = find("id").or_else(|| find("gene"));
    let mut table =
        PvalueTable { ids: id_col.map(|_| Vec::new()), truth: truth_col.map(|_| Vec::new()), ..Default::default() };
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let p: f64 = field(p_col)
            .parse()
            .map_err(|_| Error::Parse(format!("row {}: bad p-value `{}`", row + 1, field(p_col))))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidPValue { index: row, value: p });
        }
        table.pvalues.push(p);
        if let (Some(c), Some(t)) = (truth_col, table.truth.as_mut()) {
            t.push(parse_truth(field(c), row + 1)?);
        }
        if let (Some(c), Some(ids)) = (id_col, table.ids.as_mut()) {
            ids.push(field(c).to_string());
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRow {
    /// 1-based stream position.
    pub index: u64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    /// `beta_i / H_i`, only for adjusted LOND.
    pub beta_tilde: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionLog {
    pub rule: RuleSpec,
    pub rows: Vec<DecisionRow>,
}

impl DecisionLog {
    pub fn reject_mask(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.reject).collect()
    }

    pub fn discoveries(&self) -> usize {
        self.rows.iter().filter(|r| r.reject).count()
    }

    /// Scores the log against ground truth (`true` = non-null).
    pub fn outcome(&self, truth: &[bool]) -> Result<TrialOutcome> {
        let is_null: Vec<bool> = truth.iter().map(|t| !t).collect();
        TrialOutcome::from_mask(&self.reject_mask(), &is_null)
    }
}

/// Applies `rule` to the stream. Offline baselines report their common
/// threshold as each row's level.
pub fn analyze_stream(
    rule: RuleSpec,
    pvalues: &[f64],
    alpha: f64,
    schedule: &Arc<BetaSchedule<f64>>,
) -> Result<DecisionLog> {
    let rows = match rule {
        RuleSpec::Bh | RuleSpec::BhAdjusted => {
            let res = if rule == RuleSpec::Bh { bh(pvalues, alpha)? } else { bh_adjusted(pvalues, alpha)? };
            pvalues
                .iter()
                .zip(&res.reject_mask)
                .enumerate()
                .map(|(i, (&p, &reject))| DecisionRow {
                    index: i as u64 + 1,
                    p_value: p,
                    alpha: res.threshold,
                    reject,
                    beta_tilde: None,
                })
                .collect()
        }
        online => {
            let kind = online.online_rule(schedule, alpha).expect("online rule");
            let decisions = run_stream(&kind, pvalues)?;
            let mut h = CompensatedSum::new();
            decisions
                .into_iter()
                .map(|d| {
                    let beta_tilde = if rule == RuleSpec::LondAdjusted {
                        h.add(1.0 / d.index as f64);
                        Some(schedule.eval(d.index)? / h.value())
                    } else {
                        None
                    };
                    Ok(DecisionRow {
                        index: d.index,
                        p_value: d.p_value,
                        alpha: d.alpha_used,
                        reject: d.reject,
                        beta_tilde,
                    })
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(DecisionLog { rule, rows })
}

/// Writes `index,[id,]p,alpha,reject[,beta_tilde]`.
pub fn write_decisions_csv<W: Write>(out: W, log: &DecisionLog, ids: Option<&[String]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let adjusted = log.rows.iter().any(|r| r.beta_tilde.is_some());
    let mut header = vec!["index"];
    if ids.is_some() {
        header.push("id");
    }
    header.extend(["p", "alpha", "reject"]);
    if adjusted {
        header.push("beta_tilde");
    }
    w.write_record(&header)?;
    for (k, r) in log.rows.iter().enumerate() {
        let mut rec = vec![r.index.to_string()];
        if let Some(ids) = ids {
            rec.push(ids.get(k).cloned().unwrap_or_default());
        }
        rec.extend([r.p_value.to_string(), r.alpha.to_string(), u8::from(r.reject).to_string()]);
        if adjusted {
            rec.push(r.beta_tilde.map(|b| b.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `|A ∩ B| / |A|`, or 1 when `A` is empty.
pub fn overlap_fraction(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { what: "rejection masks", left: a.len(), right: b.len() });
    }
    let na = a.iter().filter(|&&x| x).count();
    if na == 0 {
        return Ok(1.0);
    }
    let both = a.iter().zip(b).filter(|(&x, &y)| x && y).count();
    Ok(both as f64 / na as f64)
}
