//! Per-split training records and their CSV forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snapshot of the tree after `t` committed splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Number of committed splits; 0 is the root-only tree.
    pub t: usize,
    /// Node split at this step (the root for `t = 0`).
    pub node: usize,
    /// Objective of the committed split.
    pub j_value: Option<f64>,
    /// Empirical advantage `min(J/2, β, 1 − β)` of the committed split.
    pub gamma_hat: Option<f64>,
    pub entropy: f64,
    pub gini: f64,
    pub modified_gini: f64,
    pub test_error: Option<f64>,
}

impl TraceRecord {
    pub(crate) fn root(criteria: [f64; 3], test_error: Option<f64>) -> Self {
        Self {
            t: 0,
            node: 0,
            j_value: None,
            gamma_hat: None,
            entropy: criteria[0],
            gini: criteria[1],
            modified_gini: criteria[2],
            test_error,
        }
    }
}

/// Divides each criterion series and the error series by its first value.
/// A series starting at 0 is reported as all zeros.
pub fn normalize_trace(records: &[TraceRecord]) -> Result<Vec<TraceRecord>> {
    let first = records.first().ok_or(Error::NoExamples)?;
    let scale = |v: f64, base: f64| if base == 0.0 { 0.0 } else { v / base };
    Ok(records
        .iter()
        .map(|r| TraceRecord {
            entropy: scale(r.entropy, first.entropy),
            gini: scale(r.gini, first.gini),
            modified_gini: scale(r.modified_gini, first.modified_gini),
            test_error: match (r.test_error, first.test_error) {
                (Some(e), Some(base)) => Some(scale(e, base)),
                _ => None,
            },
            ..r.clone()
        })
        .collect())
}

pub const TRACE_HEADER: &str = "t,node,j_value,gamma_hat,entropy,gini,modified_gini,test_error";
pub const CURVES_HEADER: &str = "t,entropy,gini,modified_gini,test_error";

/// Decimal rendering with 9 significant digits; `0` for zero.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new digit (9.9999999996 -> 10.00000000)
    let digits = s
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count();
    if digits > 9 && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_sig9).unwrap_or_default()
}

/// Full trace with header [`TRACE_HEADER`]; missing values are empty fields.
pub fn trace_to_csv(records: &[TraceRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.node,
            opt(r.j_value),
            opt(r.gamma_hat),
            format_sig9(r.entropy),
            format_sig9(r.gini),
            format_sig9(r.modified_gini),
            opt(r.test_error)
        )
        .unwrap();
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRACE_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {TRACE_HEADER:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: n + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(format!("expected 8 fields, got {}", fields.len())));
        }
        let int = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad integer {s:?}")))
        };
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("bad number {s:?}")))
        };
        let maybe = |s: &str| {
            if s.is_empty() {
                Ok(None)
            } else {
                real(s).map(Some)
            }
        };
        records.push(TraceRecord {
            t: int(fields[0])?,
            node: int(fields[1])?,
            j_value: maybe(fields[2])?,
            gamma_hat: maybe(fields[3])?,
            entropy: real(fields[4])?,
            gini: real(fields[5])?,
            modified_gini: real(fields[6])?,
            test_error: maybe(fields[7])?,
        });
    }
    if records.is_empty() {
        return Err(Error::NoExamples);
    }
    Ok(records)
}

/// Normalized curves with header [`CURVES_HEADER`].
pub fn curves_to_csv(records: &[TraceRecord]) -> Result<String> {
    let normalized = normalize_trace(records)?;
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for r in &normalized {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            format_sig9(r.entropy),
            format_sig9(r.gini),
            format_sig9(r.modified_gini),
            opt(r.test_error)
        )
        .unwrap();
    }
    Ok(out)
}
