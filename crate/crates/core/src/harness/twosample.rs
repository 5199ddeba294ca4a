//! Two-sample t-test ingest for expression data.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::theory::special::t_sf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Control,
    Case,
}

impl std::str::FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "control" | "normal" | "0" => Ok(Group::Control),
            "case" | "tumor" | "tumour" | "1" => Ok(Group::Case),
            other => Err(Error::Parse(format!("unknown group label `{other}`"))),
        }
    }
}

/// Genes × subjects expression matrix with one group label per subject.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleDataset {
    pub genes: Vec<String>,
    /// Row `i` holds gene `i` across subjects.
    pub expression: Vec<Vec<f64>>,
    pub groups: Vec<Group>,
}

impl TwoSampleDataset {
    pub fn new(genes: Vec<String>, expression: Vec<Vec<f64>>, groups: Vec<Group>) -> Result<Self> {
        let ds = Self { genes, expression, groups };
        ds.validate()?;
        Ok(ds)
    }

    /// `(m1, m2)`: control and case counts.
    pub fn group_sizes(&self) -> (usize, usize) {
        let m1 = self.groups.iter().filter(|g| **g == Group::Control).count();
        (m1, self.groups.len() - m1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.genes.len() != self.expression.len() {
            return Err(Error::LengthMismatch {
                what: "gene names vs rows",
                left: self.genes.len(),
                right: self.expression.len(),
            });
        }
        for row in &self.expression {
            if row.len() != self.groups.len() {
                return Err(Error::LengthMismatch { what: "row vs labels", left: row.len(), right: self.groups.len() });
            }
        }
        let (m1, m2) = self.group_sizes();
        if m1 < 2 || m2 < 2 {
            return invalid("groups", format!("m1={m1}, m2={m2}"), "each group needs at least two subjects");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleResult {
    pub t: f64,
    pub p: f64,
}

/// Pooled-variance t (case minus control) with `m - 2` degrees of freedom; two-sided p.
pub fn two_sample_pvalues(data: &TwoSampleDataset) -> Result<Vec<TwoSampleResult>> {
    data.validate()?;
    let (m1, m2) = data.group_sizes();
    let m = m1 + m2;
    let df = (m - 2) as u64;
    let scale = (1.0 / m1 as f64 + 1.0 / m2 as f64) / (m - 2) as f64;
    data.expression
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut sums = [0.0f64; 2];
            for (x, g) in row.iter().zip(&data.groups) {
                sums[*g as usize] += x;
            }
            let means = [sums[0] / m1 as f64, sums[1] / m2 as f64];
            let ss: f64 = row.iter().zip(&data.groups).map(|(x, g)| (x - means[*g as usize]).powi(2)).sum();
            if !(ss > 0.0) {
                return Err(Error::ZeroVariance { index: i, gene: data.genes[i].clone() });
            }
            let t = (means[1] - means[0]) / (scale * ss).sqrt();
            let p = (2.0 * t_sf(t.abs(), df)?).min(1.0);
            Ok(TwoSampleResult { t, p })
        })
        .collect()
}

/// Labels CSV: columns `subject,group`.
pub fn read_labels_csv<R: Read>(input: R) -> Result<HashMap<String, Group>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse(format!("labels CSV needs a `{name}` column")))
    };
    let (s_col, g_col) = (col("subject")?, col("group")?);
    let mut out = HashMap::new();
    for rec in r.records() {
        let rec = rec?;
        let subject = rec.get(s_col).unwrap_or("").to_string();
        let group = rec.get(g_col).unwrap_or("").parse()?;
        if out.insert(subject.clone(), group).is_some() {
            return Err(Error::Parse(format!("subject `{subject}` labelled twice")));
        }
    }
    Ok(out)
}

/// Expression CSV: first column is the gene id, remaining headers are subject ids.
pub fn read_expression_csv<R: Read>(input: R, labels: &HashMap<String, Group>) -> Result<TwoSampleDataset> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    let subjects: Vec<&str> = headers.iter().skip(1).collect();
    let groups = subjects
        .iter()
        .map(|s| labels.get(*s).copied().ok_or_else(|| Error::Parse(format!("subject `{s}` has no group label"))))
        .collect::<Result<Vec<_>>>()?;
    let (mut genes, mut expression) = (Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        genes.push(rec.get(0).unwrap_or("").to_string());
        let values = rec
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("row {}: bad expression value `{v}`", row + 1))))
            .collect::<Result<Vec<_>>>()?;
        expression.push(values);
    }
    TwoSampleDataset::new(genes, expression, groups)
}

/// Writes `gene,t,p`.
pub fn write_two_sample_csv<W: Write>(out: W, genes: &[String], results: &[TwoSampleResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gene", "t", "p"])?;
    for (g, r) in genes.iter().zip(results) {
        w.write_record([g.clone(), r.t.to_string(), r.p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Group::{Case, Control};

    fn ds(rows: Vec<Vec<f64>>, groups: Vec<Group>) -> TwoSampleDataset {
        let genes = (0..rows.len()).map(|i| format!("g{i}")).collect();
        TwoSampleDataset::new(genes, rows, groups).unwrap()
    }

    #[test]
    fn equal_means_give_unit_p() {
        let d = ds(vec![vec![1.0, 3.0, 2.0, 2.0]], vec![Control, Control, Case, Case]);
        let r = two_sample_pvalues(&d).unwrap()[0];
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn swapping_labels_negates_t() {
        let rows = vec![vec![0.1, -0.4, 0.3, 1.9, 2.2, 1.4]];
        let a = ds(rows.clone(), vec![Control, Control, Control, Case, Case, Case]);
        let b = ds(rows, vec![Case, Case, Case, Control, Control, Control]);
        let (ra, rb) = (two_sample_pvalues(&a).unwrap()[0], two_sample_pvalues(&b).unwrap()[0]);
        assert_eq!(ra.t, -rb.t);
        assert_eq!(ra.p, rb.p);
    }

    #[test]
    fn matches_hand_computation() {
        // Controls 1,2,3 (mean 2, SS 2); cases 4,6,8 (mean 6, SS 8); s^2 = (1/4)(2/3)(10).
        let d = ds(vec![vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0]], vec![Control, Control, Control, Case, Case, Case]);
        let r = two_sample_pvalues(&d).unwrap()[0];
        let t = 4.0 / (10.0f64 / 6.0).sqrt();
        assert!((r.t - t).abs() < 1e-14);
        assert!((r.p - 2.0 * t_sf(t, 4).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn constant_gene_is_reported() {
        let d = ds(vec![vec![1.0, 2.0, 3.0, 4.0], vec![5.0; 4]], vec![Control, Control, Case, Case]);
        match two_sample_pvalues(&d) {
            Err(Error::ZeroVariance { index, gene }) => assert_eq!((index, gene.as_str()), (1, "g1")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_groups_rejected() {
        let g = vec!["g".to_string()];
        assert!(TwoSampleDataset::new(g, vec![vec![1.0, 2.0, 3.0]], vec![Control, Case, Case]).is_err());
    }

    #[test]
    fn csv_ingest_aligns_subjects() {
        let labels = read_labels_csv("subject,group\ns1,case\ns2,control\ns3,control\ns4,case\n".as_bytes()).unwrap();
        let d = read_expression_csv("gene,s1,s2,s3,s4\nA,5,1,2,6\n".as_bytes(), &labels).unwrap();
        assert_eq!(d.groups, vec![Case, Control, Control, Case]);
        assert_eq!(d.group_sizes(), (2, 2));
        assert!(read_expression_csv("gene,s1,s9\nA,1,2\n".as_bytes(), &labels).is_err());
    }
}
