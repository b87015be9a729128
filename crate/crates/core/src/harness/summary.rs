//! Grouped mean / standard-error tables over result CSVs.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::run::{write_results, EpisodeResult, CSV_HEADER};
use super::{HarnessError, HarnessResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    /// Values of the group-by columns, in the requested order.
    pub group: Vec<String>,
    pub metric: String,
    pub mean: f64,
    /// `std / √n` with the sample std; `None` when `n = 1`.
    pub stderr: Option<f64>,
    pub count: usize,
}

pub const DEFAULT_METRICS: [&str; 2] = ["total_reward", "distance_to_opt"];

fn column(header: &[String], name: &str) -> HarnessResult<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| HarnessError::Schema(format!("no column `{name}`")))
}

/// Groups appear in first-seen order; empty metric cells are skipped and a
/// group with no values for a metric gets no row for it.
pub fn summarize_records(
    header: &[String],
    records: &[Vec<String>],
    group_by: &[&str],
    metrics: &[&str],
) -> HarnessResult<Vec<SummaryRow>> {
    let group_cols = group_by.iter().map(|g| column(header, g)).collect::<HarnessResult<Vec<_>>>()?;
    let metric_cols = metrics.iter().map(|m| column(header, m)).collect::<HarnessResult<Vec<_>>>()?;
    let mut groups: Vec<(Vec<String>, Vec<Vec<f64>>)> = Vec::new();
    for (line, rec) in records.iter().enumerate() {
        if rec.len() != header.len() {
            return Err(HarnessError::Schema(format!(
                "row {} has {} fields, expected {}",
                line + 1,
                rec.len(),
                header.len()
            )));
        }
        let key: Vec<String> = group_cols.iter().map(|&c| rec[c].clone()).collect();
        let idx = match groups.iter().position(|(k, _)| *k == key) {
            Some(i) => i,
            None => {
                groups.push((key, vec![Vec::new(); metrics.len()]));
                groups.len() - 1
            }
        };
        for (m, &c) in metric_cols.iter().enumerate() {
            let cell = rec[c].trim();
            if cell.is_empty() {
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| HarnessError::Schema(format!("`{cell}` in `{}` is not a number", metrics[m])))?;
            groups[idx].1[m].push(v);
        }
    }
    let mut out = Vec::new();
    for (key, values) in groups {
        for (m, xs) in values.iter().enumerate() {
            if xs.is_empty() {
                continue;
            }
            let n = xs.len();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let stderr = (n > 1).then(|| {
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            });
            out.push(SummaryRow {
                group: key.clone(),
                metric: metrics[m].to_string(),
                mean,
                stderr,
                count: n,
            });
        }
    }
    Ok(out)
}

/// Reads a results CSV; the header must be exactly the result schema.
pub fn summarize_csv(path: &Path, group_by: &[&str], metrics: &[&str]) -> HarnessResult<Vec<SummaryRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Schema(format!(
            "expected header `{}`, found `{}`",
            CSV_HEADER.join(","),
            header.join(",")
        )));
    }
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec?.iter().map(str::to_string).collect());
    }
    summarize_records(&header, &records, group_by, metrics)
}

pub fn summarize_results(rows: &[EpisodeResult], group_by: &[&str]) -> HarnessResult<Vec<SummaryRow>> {
    let mut buf = Vec::new();
    write_results(rows, &mut buf)?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut records = Vec::new();
    for rec in reader.records() {
        records.push(rec?.iter().map(str::to_string).collect());
    }
    summarize_records(&header, &records, group_by, &DEFAULT_METRICS)
}

pub fn write_summary<W: Write>(rows: &[SummaryRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["group", "metric", "mean", "stderr", "count"])?;
    for r in rows {
        w.write_record([
            r.group.join("/"),
            r.metric.clone(),
            r.mean.to_string(),
            r.stderr.map(|s| s.to_string()).unwrap_or_default(),
            r.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned plain-text table.
pub fn format_summary(rows: &[SummaryRow], group_by: &[&str]) -> String {
    let mut table: Vec<Vec<String>> = Vec::new();
    let mut head: Vec<String> = group_by.iter().map(|s| s.to_string()).collect();
    head.extend(["metric", "mean", "stderr", "n"].map(String::from));
    table.push(head);
    for r in rows {
        let mut line = r.group.clone();
        line.push(r.metric.clone());
        line.push(format!("{:.4}", r.mean));
        line.push(r.stderr.map(|s| format!("{s:.4}")).unwrap_or_default());
        line.push(r.count.to_string());
        table.push(line);
    }
    let cols = table[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| table.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in &table {
        let cells: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}
