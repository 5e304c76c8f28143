use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::metrics::{epoch_error_stats, mad_rr, EpochErrorStats};
use crate::csi_data::Posture;
use crate::error::{Error, Result};
use crate::selection::Method;

pub const REPORT_VERSION: &str = "report v1";

/// Evaluation of one record against its reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: String,
    pub record: String,
    pub subject: Option<String>,
    pub posture: Posture,
    pub method: Method,
    /// Seconds added to the reference clock to line it up with the CSI.
    pub lag_applied: f64,
    pub mean_correlation: Option<f64>,
    pub window_correlations: Vec<Option<f64>>,
    pub counts_ref: Vec<i64>,
    pub counts_sig: Vec<i64>,
    /// Breaths per epoch.
    pub mad: f64,
    pub pct_ge1: f64,
    pub pct_ge2: f64,
    pub histogram: BTreeMap<i64, usize>,
}

impl EvaluationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn from_counts(
        record: impl Into<String>,
        subject: Option<String>,
        posture: Posture,
        method: Method,
        lag_applied: f64,
        mean_correlation: Option<f64>,
        window_correlations: Vec<Option<f64>>,
        counts_ref: Vec<i64>,
        counts_sig: Vec<i64>,
    ) -> Result<Self> {
        let mad = mad_rr(&counts_ref, &counts_sig)?;
        let EpochErrorStats {
            pct_ge1,
            pct_ge2,
            histogram,
        } = epoch_error_stats(&counts_ref, &counts_sig)?;
        Ok(EvaluationReport {
            version: REPORT_VERSION.into(),
            record: record.into(),
            subject,
            posture,
            method,
            lag_applied,
            mean_correlation,
            window_correlations,
            counts_ref,
            counts_sig,
            mad,
            pct_ge1,
            pct_ge2,
            histogram,
        })
    }

    pub fn epochs(&self) -> usize {
        self.counts_ref.len()
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "record     {}", self.record);
        let _ = writeln!(s, "subject    {}", self.subject.as_deref().unwrap_or("-"));
        let _ = writeln!(s, "posture    {}", self.posture);
        let _ = writeln!(s, "method     {}", self.method);
        let _ = writeln!(s, "lag        {:.3} s", self.lag_applied);
        match self.mean_correlation {
            Some(r) => {
                let _ = writeln!(s, "mean r     {r:.3}");
            }
            None => {
                let _ = writeln!(s, "mean r     -");
            }
        }
        let _ = writeln!(s, "epochs     {}", self.epochs());
        let _ = writeln!(s, "MAD        {:.2} breaths/epoch", self.mad);
        let _ = writeln!(s, ">=1 error  {:.0} %", self.pct_ge1);
        let _ = writeln!(s, ">=2 errors {:.0} %", self.pct_ge2);
        let _ = writeln!(s, "epoch  ref  csi");
        for (i, (r, c)) in self.counts_ref.iter().zip(&self.counts_sig).enumerate() {
            let _ = writeln!(s, "{i:>5} {r:>4} {c:>4}");
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableMetric {
    Mad,
    PctGe1,
    PctGe2,
    Correlation,
}

impl TableMetric {
    fn title(self) -> &'static str {
        match self {
            TableMetric::PctGe1 => "Percent of Epochs with One or More Wrong Detected/Missed Respiratory Cycles",
            TableMetric::PctGe2 => "Percent of Epochs with Two or More Wrong Detected/Missed Respiratory Cycles",
            TableMetric::Mad => "Mean Absolute Difference Between Number of Detected Respiratory Cycles on CSI and Reference Signals during Epoch",
            TableMetric::Correlation => "Mean Windowed Correlation Between CSI-Based and Reference Respiratory Signals",
        }
    }

    fn decimals(self) -> usize {
        match self {
            TableMetric::PctGe1 | TableMetric::PctGe2 => 0,
            TableMetric::Mad | TableMetric::Correlation => 2,
        }
    }

    fn unit(self) -> &'static str {
        match self {
            TableMetric::PctGe1 | TableMetric::PctGe2 => ", %",
            _ => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    /// One cell per posture column; `None` where no record exists.
    pub cells: Vec<Option<f64>>,
    pub all: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub metric: TableMetric,
    pub postures: Vec<Posture>,
    pub rows: Vec<TableRow>,
    /// Column-wise arithmetic mean of the rows.
    pub mean: TableRow,
}

impl Table {
    pub fn render(&self) -> String {
        let unit = self.metric.unit();
        let mut header = vec!["Subject".to_string()];
        header.extend(self.postures.iter().map(|p| format!("{}{unit}", capitalize(p.as_str()))));
        header.push(format!("All Postures{unit}"));
        let fmt = |v: Option<f64>| match v {
            Some(x) => format!("{:.*}", self.metric.decimals(), x),
            None => "-".to_string(),
        };
        let mut lines: Vec<Vec<String>> = vec![header];
        for row in self.rows.iter().chain(std::iter::once(&self.mean)) {
            let mut l = vec![row.label.clone()];
            l.extend(row.cells.iter().map(|c| fmt(*c)));
            l.push(fmt(row.all));
            lines.push(l);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let rule = "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1));
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.metric.title());
        let _ = writeln!(out, "{rule}");
        for (i, l) in lines.iter().enumerate() {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if i == 0 || i == lines.len() - 2 {
                let _ = writeln!(out, "{rule}");
            }
        }
        let _ = writeln!(out, "{rule}");
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Dataset-wide figures, taken from the "All Postures" column of each
/// table's mean row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Overall {
    pub mad: f64,
    pub pct_ge1: f64,
    pub pct_ge2: f64,
    pub mean_correlation: Option<f64>,
    pub epochs: usize,
    pub histogram: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSet {
    pub version: String,
    pub records: Vec<EvaluationReport>,
    pub tables: Vec<Table>,
    pub overall: Overall,
}

impl ReportSet {
    pub fn table(&self, metric: TableMetric) -> Option<&Table> {
        self.tables.iter().find(|t| t.metric == metric)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tables {
            out.push_str(&t.render());
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "Overall: MAD {:.2} breaths/epoch, >=1 error {:.0} %, >=2 errors {:.0} %, {} epochs",
            self.overall.mad, self.overall.pct_ge1, self.overall.pct_ge2, self.overall.epochs
        );
        if let Some(r) = self.overall.mean_correlation {
            let _ = writeln!(out, "Overall mean correlation {r:.2}");
        }
        out
    }

    /// Signed count difference histogram as `delta,epochs` rows.
    pub fn write_histogram_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "delta,epochs")?;
        for (d, n) in &self.overall.histogram {
            writeln!(w, "{d},{n}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: ReportSet = serde_json::from_str(s)?;
        if set.version != REPORT_VERSION {
            return Err(Error::InvalidInput(format!("unsupported report version `{}`", set.version)));
        }
        Ok(set)
    }
}

/// Pooled figures over a group of records' epochs.
fn pooled(records: &[&EvaluationReport], metric: TableMetric) -> Option<f64> {
    if metric == TableMetric::Correlation {
        let rs: Vec<f64> = records
            .iter()
            .flat_map(|r| r.window_correlations.iter().flatten().copied())
            .collect();
        return (!rs.is_empty()).then(|| rs.iter().sum::<f64>() / rs.len() as f64);
    }
    let diffs: Vec<i64> = records
        .iter()
        .flat_map(|r| r.counts_ref.iter().zip(&r.counts_sig).map(|(a, b)| (b - a).abs()))
        .collect();
    if diffs.is_empty() {
        return None;
    }
    let n = diffs.len() as f64;
    Some(match metric {
        TableMetric::Mad => diffs.iter().sum::<i64>() as f64 / n,
        TableMetric::PctGe1 => 100.0 * diffs.iter().filter(|d| **d >= 1).count() as f64 / n,
        TableMetric::PctGe2 => 100.0 * diffs.iter().filter(|d| **d >= 2).count() as f64 / n,
        TableMetric::Correlation => unreachable!(),
    })
}

fn column_mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn build_table(records: &[EvaluationReport], metric: TableMetric) -> Table {
    let mut postures: Vec<Posture> = records.iter().map(|r| r.posture).collect();
    postures.sort();
    postures.dedup();
    let mut by_subject: BTreeMap<String, Vec<&EvaluationReport>> = BTreeMap::new();
    for r in records {
        by_subject
            .entry(r.subject.clone().unwrap_or_else(|| "-".into()))
            .or_default()
            .push(r);
    }
    let rows: Vec<TableRow> = by_subject
        .into_iter()
        .map(|(label, recs)| {
            let cells = postures
                .iter()
                .map(|p| {
                    let group: Vec<&EvaluationReport> = recs.iter().copied().filter(|r| r.posture == *p).collect();
                    pooled(&group, metric)
                })
                .collect();
            TableRow {
                label,
                cells,
                all: pooled(&recs, metric),
            }
        })
        .collect();
    let mean = TableRow {
        label: "Mean".into(),
        cells: (0..postures.len())
            .map(|c| column_mean(rows.iter().map(|r| r.cells[c])))
            .collect(),
        all: column_mean(rows.iter().map(|r| r.all)),
    };
    Table {
        metric,
        postures,
        rows,
        mean,
    }
}

/// Aggregates per-record evaluations into per-subject x per-posture tables
/// with an "All Postures" column (pooled over the subject's epochs) and a
/// "Mean" row (column-wise mean over subjects).
pub fn build_report(records: Vec<EvaluationReport>) -> Result<ReportSet> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no record results to report".into()));
    }
    let mut tables: Vec<Table> = [TableMetric::PctGe1, TableMetric::PctGe2, TableMetric::Mad]
        .into_iter()
        .map(|m| build_table(&records, m))
        .collect();
    if records.iter().any(|r| r.mean_correlation.is_some()) {
        tables.push(build_table(&records, TableMetric::Correlation));
    }
    let all = |m: TableMetric| {
        tables
            .iter()
            .find(|t| t.metric == m)
            .and_then(|t| t.mean.all)
    };
    let mut histogram = BTreeMap::new();
    for r in &records {
        for (d, n) in &r.histogram {
            *histogram.entry(*d).or_insert(0) += n;
        }
    }
    let overall = Overall {
        mad: all(TableMetric::Mad).unwrap_or(0.0),
        pct_ge1: all(TableMetric::PctGe1).unwrap_or(0.0),
        pct_ge2: all(TableMetric::PctGe2).unwrap_or(0.0),
        mean_correlation: all(TableMetric::Correlation),
        epochs: records.iter().map(|r| r.epochs()).sum(),
        histogram,
    };
    Ok(ReportSet {
        version: REPORT_VERSION.into(),
        records,
        tables,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(subject: &str, posture: Posture, refc: Vec<i64>, sig: Vec<i64>) -> EvaluationReport {
        EvaluationReport::from_counts(
            format!("{subject}_{posture}"),
            Some(subject.into()),
            posture,
            Method::Pca,
            0.0,
            Some(0.9),
            vec![Some(0.9)],
            refc,
            sig,
        )
        .unwrap()
    }

    #[test]
    fn single_record_mean_equals_row() {
        let set = build_report(vec![report("1", Posture::Supine, vec![7, 8, 7], vec![7, 9, 7])]).unwrap();
        let t = set.table(TableMetric::Mad).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.mean.cells, t.rows[0].cells);
        assert_eq!(t.mean.all, t.rows[0].all);
        assert!((set.overall.mad - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empty_is_error() {
        assert!(build_report(vec![]).is_err());
    }

    #[test]
    fn rendering_has_table_shape() {
        let set = build_report(vec![
            report("1", Posture::Supine, vec![7; 10], vec![7; 10]),
            report("1", Posture::Prone, vec![7; 10], vec![8; 10]),
        ])
        .unwrap();
        let text = set.table(TableMetric::Mad).unwrap().render();
        assert!(text.contains("Subject  Supine  Prone  All Postures"));
        assert!(text.contains("Mean"));
        assert!(text.contains("0.50"));
    }
}
