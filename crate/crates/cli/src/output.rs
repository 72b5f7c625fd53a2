//! JSON and CSV writers.
//!
//! CSV column orders are fixed:
//!
//! | table  | columns |
//! |--------|---------|
//! | checks | `name,status,passed,lhs,rhs,slack,truncation_error,tolerance,exact,reason,params` |
//! | dist   | `metric,value,reason,error` |
//! | rank   | `theta,n,tv_exact,bound_3theta,moment_theta_q,moment_identity_residual,weighted_sup,stein_tv,score_matches,sampler_tv,passed` |
//! | solve  | `x,l,f` |

use std::io::Write;

use serde_json::Value;
use stein_gauge::{BoundCheck, RankExperimentResult};

use crate::args::Output;
use crate::error::CliError;

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let row: Vec<String> = cells.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip rendering, with `inf`/`-inf`/`nan` for non-finite values.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::to_string(&v).expect("finite floats serialize")
    }
}

pub fn text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn check_rows(checks: &[BoundCheck]) -> Table {
    let mut t = Table::new(&[
        "name", "status", "passed", "lhs", "rhs", "slack", "truncation_error", "tolerance", "exact", "reason", "params",
    ]);
    for c in checks {
        t.row([
            c.name.clone(),
            text(&serde_json::to_value(c.status).expect("status serializes")),
            c.passed.to_string(),
            number(c.lhs),
            number(c.rhs),
            number(c.slack),
            number(c.truncation_error),
            number(c.tolerance),
            c.exact.to_string(),
            c.reason.clone().unwrap_or_default(),
            c.params.to_string(),
        ]);
    }
    t
}

pub fn rank_rows(results: &[RankExperimentResult]) -> Table {
    let mut t = Table::new(&[
        "theta", "n", "tv_exact", "bound_3theta", "moment_theta_q", "moment_identity_residual", "weighted_sup",
        "stein_tv", "score_matches", "sampler_tv", "passed",
    ]);
    for r in results {
        t.row([
            r.theta.to_string(),
            r.n.to_string(),
            number(r.tv_exact),
            number(r.bound_3theta),
            number(r.moment_theta_q),
            number(r.moment_identity_residual),
            number(r.weighted_sup),
            number(r.stein_tv),
            r.score_matches.to_string(),
            r.sampler_tv.map(number).unwrap_or_default(),
            r.passed.to_string(),
        ]);
    }
    t
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

/// Writes the report to `--out` (or stdout) and the table to `--csv`.
pub fn emit(report: &Value, output: &Output, table: Option<&Table>) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
    json.push('\n');
    match &output.out {
        Some(path) => write_file(path, json.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(json.as_bytes())
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source })?;
        }
    }
    if let (Some(path), Some(table)) = (&output.csv, table) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Write { path: path.clone(), source: e.into_error() })?;
        write_file(path, &bytes)?;
    }
    Ok(())
}
