//! Artifact writers.
//!
//! Every number goes through the standard shortest-round-trip decimal
//! formatter (both `format!("{}")` and the JSON serializer use it), so a
//! repeated invocation with the same config reproduces each file byte for
//! byte. All writing is single-threaded and happens after compute ends.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use shift_audit::audit::AuditReport;
use shift_audit::sweeps::{SweepOutcome, SweepRow};
use shift_audit::theory::TheoryCurveRow;

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn report_json(report: &AuditReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// The `setting,run,score` long table over both phases of one audit.
pub fn scores_csv(report: &AuditReport) -> String {
    let mut out = String::from("setting,run,score\n");
    for (i, s) in report.control_scores.iter().enumerate() {
        let _ = writeln!(out, "control,{i},{s}");
    }
    for (i, s) in report.shifted_scores.iter().enumerate() {
        let _ = writeln!(out, "shifted,{i},{s}");
    }
    out
}

pub fn summary_txt(report: &AuditReport) -> String {
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mut out = String::new();
    let _ = writeln!(out, "statistic: {:?}", report.statistic);
    let _ = writeln!(
        out,
        "control runs: {} (mean score {})",
        report.control_scores.len(),
        mean(&report.control_scores)
    );
    let _ = writeln!(
        out,
        "shifted runs: {} (mean score {})",
        report.shifted_scores.len(),
        mean(&report.shifted_scores)
    );
    let _ = writeln!(
        out,
        "threshold: {} (control percentile {})",
        report.threshold, report.percentile
    );
    let _ = writeln!(out, "tpr at percentile: {}", report.tpr_at_percentile);
    let _ = writeln!(out, "auc-roc: {}", report.auc_roc);
    let _ = writeln!(
        out,
        "verdicts above threshold: {}/{}",
        report.verdicts.iter().filter(|&&v| v).count(),
        report.verdicts.len()
    );
    out
}

/// Quote a CSV field that may contain commas or quotes (error messages).
fn csv_quote(raw: &str) -> String {
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

pub fn sweep_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::from(
        "label,value,control_mean,control_sd,shifted_mean,shifted_sd,auc_roc,tpr_at_percentile,error\n",
    );
    for cell in &outcome.cells {
        let value = cell.value.map(|v| v.to_string()).unwrap_or_default();
        match (&cell.summary, &cell.error) {
            (Some(row), _) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},",
                    csv_quote(&cell.label),
                    value,
                    row.control_mean,
                    row.control_sd,
                    row.shifted_mean,
                    row.shifted_sd,
                    row.auc_roc,
                    row.tpr_at_percentile
                );
            }
            (None, Some(msg)) => {
                let _ = writeln!(
                    out,
                    "{},{},,,,,,,{}",
                    csv_quote(&cell.label),
                    value,
                    csv_quote(&format!("error: {msg}"))
                );
            }
            (None, None) => unreachable!("cell carries a summary or an error"),
        }
    }
    out
}

/// The summary table as JSON: cells without their full per-run reports.
#[derive(Serialize)]
struct SweepSummaryFile<'a> {
    schema_version: u32,
    axis: &'a shift_audit::sweeps::SweepAxis,
    cells: Vec<SweepSummaryCell<'a>>,
}

#[derive(Serialize)]
struct SweepSummaryCell<'a> {
    label: &'a str,
    value: Option<f64>,
    summary: Option<&'a SweepRow>,
    error: Option<&'a str>,
}

pub fn sweep_json(outcome: &SweepOutcome) -> String {
    let file = SweepSummaryFile {
        schema_version: shift_audit::audit::REPORT_SCHEMA_VERSION,
        axis: &outcome.axis,
        cells: outcome
            .cells
            .iter()
            .map(|c| SweepSummaryCell {
                label: &c.label,
                value: c.value,
                summary: c.summary.as_ref(),
                error: c.error.as_deref(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("sweep summary serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct RunLine<'a> {
    cell: &'a str,
    setting: &'a str,
    run: usize,
    score: f64,
}

/// Raw per-run scores, one JSON object per line, in cell-then-run order.
pub fn sweep_runs_jsonl(outcome: &SweepOutcome) -> String {
    let mut out = String::new();
    for cell in &outcome.cells {
        let Some(report) = &cell.report else { continue };
        for (setting, scores) in [
            ("control", &report.control_scores),
            ("shifted", &report.shifted_scores),
        ] {
            for (run, &score) in scores.iter().enumerate() {
                let line = RunLine {
                    cell: &cell.label,
                    setting,
                    run,
                    score,
                };
                out.push_str(&serde_json::to_string(&line).expect("run line serializes"));
                out.push('\n');
            }
        }
    }
    out
}

pub fn theory_csv(rows: &[TheoryCurveRow]) -> String {
    let mut out = String::from("tau,ft_d0,ft_d1,fs_d,mc_stderr\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.tau, r.ft_d0, r.ft_d1, r.fs_d, r.mc_stderr
        );
    }
    out
}
