//! Human-readable run summaries and series round-tripping for the CLI.

use std::path::Path;

use crate::bounds::{fit_decay_rate, BoundReport};
use crate::error::{LabError, Result};

use super::experiment::{MetricRow, MetricSeries, SERIES_HEADER};

/// Fixed-format text summary: per-iteration metrics, the fitted decay
/// slope of the total-variation column, and bound pass/fail counts.
/// The boolean is true iff every non-skipped bound check holds.
pub fn report(series: &MetricSeries, bounds: &[BoundReport]) -> (String, bool) {
    let mut out = String::new();
    out.push_str("== metric series ==\n");
    out.push_str(
        "     k   total_iters        gamma       lambda           tv           w2     mean|x|^2  frac_out      ms\n",
    );
    for row in &series.rows {
        out.push_str(&format!(
            "{:>6}  {:>12}  {:>11.4e}  {:>11}  {:>11}  {:>11}  {:>12.5e}  {:>8}  {:>6.0}\n",
            row.outer_k,
            row.total_iters,
            row.gamma,
            opt_cell(row.lambda),
            opt_cell(row.tv),
            opt_cell(row.w2),
            row.mean_norm_sq,
            opt_cell(row.frac_outside),
            row.wallclock_ms,
        ));
    }

    let tv_series: Vec<(u32, f64)> = series
        .rows
        .iter()
        .filter_map(|r| r.tv.filter(|tv| *tv > 0.0).map(|tv| (r.outer_k as u32, tv)))
        .collect();
    match fit_decay_rate(&tv_series) {
        Ok(slope) => out.push_str(&format!("tv decay slope (ln tv ~ k): {slope:.4}\n")),
        Err(_) => out.push_str("tv decay slope: not enough positive tv points\n"),
    }

    out.push_str("\n== bound checks ==\n");
    if bounds.is_empty() {
        out.push_str("no checks requested\n");
        return (out, true);
    }
    let mut held = 0usize;
    let mut failed = Vec::new();
    let mut skipped = 0usize;
    for b in bounds {
        let skip = b.context.get("skipped") == Some(&1.0) || b.inconclusive();
        let status = if skip {
            skipped += 1;
            "SKIP"
        } else if b.holds {
            held += 1;
            "PASS"
        } else {
            failed.push(b.name.clone());
            "FAIL"
        };
        out.push_str(&format!(
            "{status}  {:<24} lhs {:>13.6e}  rhs {:>13.6e}  slack {:>13.6e}\n",
            b.name, b.lhs, b.rhs, b.slack
        ));
    }
    out.push_str(&format!(
        "\n{held} passed, {} failed, {skipped} skipped of {} checks\n",
        failed.len(),
        bounds.len()
    ));
    if !failed.is_empty() {
        out.push_str(&format!("failing: {}\n", failed.join(", ")));
    }
    (out, failed.is_empty())
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into())
}

/// Reads a series back from the fixed CSV schema.
pub fn read_series_csv(path: &Path) -> Result<MetricSeries> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| LabError::InvalidParameter("empty series file".into()))?;
    if header != SERIES_HEADER {
        return Err(LabError::InvalidParameter(format!(
            "unexpected series header: {header}"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(LabError::InvalidParameter(format!(
                "series line {} has {} fields",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| LabError::InvalidParameter(format!("bad float {s:?}: {e}")))
        };
        let parse_opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse(s).map(Some)
            }
        };
        rows.push(MetricRow {
            outer_k: fields[0]
                .parse()
                .map_err(|e| LabError::InvalidParameter(format!("bad outer_k: {e}")))?,
            total_iters: fields[1]
                .parse()
                .map_err(|e| LabError::InvalidParameter(format!("bad total_iters: {e}")))?,
            gamma: parse(fields[2])?,
            lambda: parse_opt(fields[3])?,
            tv: parse_opt(fields[4])?,
            w2: parse_opt(fields[5])?,
            mean_norm_sq: parse(fields[6])?,
            frac_outside: parse_opt(fields[7])?,
            wallclock_ms: 0.0,
        });
    }
    Ok(MetricSeries { rows })
}
