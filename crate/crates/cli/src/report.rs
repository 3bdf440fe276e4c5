//! Result rows and their csv, json and text-table renderings.
//!
//! Every float is rounded to six significant digits when a row is built, so
//! the three formats carry the same values and csv output parses back to
//! the rows that produced it.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockError {
    pub block: String,
    /// `‖x_i − x_i*‖ / ‖x_i*‖` against the reference (plain distance when
    /// the reference block is zero).
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub variant: String,
    pub status: String,
    pub iterations: usize,
    pub time_s: f64,
    pub rel_errors: Vec<BlockError>,
    /// Relative nonnegative feasibility; completion experiments only.
    pub fa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub variant: String,
    pub feasibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub reference: ReferenceInfo,
    pub rows: Vec<ResultRow>,
}

/// `x` rounded to six significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format_sig(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

fn format_sig(x: f64) -> String {
    format!("{x:.5e}")
}

const FIXED_COLUMNS: [&str; 4] = ["variant", "status", "iterations", "time_s"];

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// One header row, then one line per result. Relative errors appear as
/// `err_<block>` columns; `fa` is empty when not applicable.
pub fn to_csv(rows: &[ResultRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(first) = rows.first() {
        header.extend(first.rel_errors.iter().map(|e| format!("err_{}", e.block)));
    }
    header.push("fa".into());
    w.write_record(&header).map_err(csv_error)?;
    for row in rows {
        let mut record = vec![
            row.variant.clone(),
            row.status.clone(),
            row.iterations.to_string(),
            format_sig(row.time_s),
        ];
        record.extend(row.rel_errors.iter().map(|e| format_sig(e.value)));
        record.push(row.fa.map(format_sig).unwrap_or_default());
        w.write_record(&record).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    let blocks: Vec<String> = header
        .iter()
        .filter_map(|h| h.strip_prefix("err_").map(str::to_string))
        .collect();
    let bad = |what: &str| CliError::Io(format!("malformed csv field {what}"));
    let number = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(what));
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        if record.len() != FIXED_COLUMNS.len() + blocks.len() + 1 {
            return Err(bad("count"));
        }
        let rel_errors = blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                Ok(BlockError {
                    block: b.clone(),
                    value: number(&record[4 + k], b)?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let fa = &record[record.len() - 1];
        rows.push(ResultRow {
            variant: record[0].to_string(),
            status: record[1].to_string(),
            iterations: record[2].parse().map_err(|_| bad("iterations"))?,
            time_s: number(&record[3], "time_s")?,
            rel_errors,
            fa: if fa.is_empty() {
                None
            } else {
                Some(number(fa, "fa")?)
            },
        });
    }
    Ok(rows)
}

/// Method, iterations, time and one column per block error, in the layout
/// of a results table.
pub fn to_table(report: &Report) -> String {
    let mut header = vec!["Method".to_string(), "#Iter".into(), "Time(s)".into()];
    if let Some(first) = report.rows.first() {
        header.extend(
            first
                .rel_errors
                .iter()
                .map(|e| format!("RelErr({})", e.block)),
        );
    }
    let with_fa = report.rows.iter().any(|r| r.fa.is_some());
    if with_fa {
        header.push("FA".into());
    }
    header.push("Status".into());

    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.variant.clone(),
                r.iterations.to_string(),
                format_sig(r.time_s),
            ];
            cells.extend(r.rel_errors.iter().map(|e| format_sig(e.value)));
            if with_fa {
                cells.push(r.fa.map(format_sig).unwrap_or_else(|| "-".into()));
            }
            cells.push(r.status.clone());
            cells
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            body.iter()
                .map(|row| row[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "experiment {} (seed {}), reference {} with feasibility {}",
        report.experiment,
        report.seed,
        report.reference.variant,
        format_sig(report.reference.feasibility)
    );
    let _ = writeln!(out, "{}", line(&header));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    let _ = writeln!(out, "{}", rule.join("-+-"));
    for row in &body {
        let _ = writeln!(out, "{}", line(row));
    }
    out
}

pub fn to_json(report: &Report) -> Result<String, CliError> {
    serde_json::to_string_pretty(report)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(e.to_string()))
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    if report.rows.is_empty() {
        return Err(CliError::Config("no result rows to report".into()));
    }
    match format {
        Format::Csv => to_csv(&report.rows),
        Format::Json => to_json(report),
        Format::Table => Ok(to_table(report)),
    }
}

/// Writes `report` to `path`, or to stdout when `path` is `None`.
pub fn emit_report(
    report: &Report,
    format: Format,
    path: Option<&std::path::Path>,
) -> Result<(), CliError> {
    let text = render(report, format)?;
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
