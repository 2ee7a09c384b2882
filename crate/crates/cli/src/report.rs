//! Serialisation of verification records: NDJSON, CSV and a text table.

use std::io::Write;

use selberg_core::VerificationRecord;
use serde::Serialize;

use crate::config::Format;

/// One CSV row; the parameter set is flattened into its fields.
#[derive(Serialize)]
struct CsvRow<'a> {
    identity_id: &'a str,
    k1: usize,
    k2: usize,
    alpha: f64,
    beta1: f64,
    beta2: f64,
    gamma: f64,
    z1: f64,
    z2: f64,
    lhs: f64,
    lhs_err: f64,
    rhs: f64,
    rel_dev: f64,
    tolerance: f64,
    passed: bool,
    reason: &'a str,
    seed: u64,
    runtime_ms: u64,
}

pub fn write_records<W: Write>(mut w: W, format: Format, records: &[VerificationRecord]) -> std::io::Result<()> {
    match format {
        Format::Json => {
            for r in records {
                serde_json::to_writer(&mut w, r)?;
                writeln!(w)?;
            }
        }
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(&mut w);
            for r in records {
                let p = &r.params;
                csv.serialize(CsvRow {
                    identity_id: r.identity_id.as_str(),
                    k1: p.k1,
                    k2: p.k2,
                    alpha: p.alpha,
                    beta1: p.beta1,
                    beta2: p.beta2,
                    gamma: p.gamma,
                    z1: p.z1,
                    z2: p.z2,
                    lhs: r.lhs,
                    lhs_err: r.lhs_err,
                    rhs: r.rhs,
                    rel_dev: r.rel_dev,
                    tolerance: r.tolerance,
                    passed: r.passed,
                    reason: r.reason.as_deref().unwrap_or(""),
                    seed: r.seed,
                    runtime_ms: r.runtime_ms,
                })?;
            }
            csv.flush()?;
        }
        Format::Pretty => {
            writeln!(
                w,
                "{:<15} {:>7} {:>22} {:>10} {:>22} {:>10} {:>8} {:>6} {:>8}",
                "identity", "k1,k2", "lhs", "lhs_err", "rhs", "rel_dev", "tol", "status", "ms"
            )?;
            for r in records {
                writeln!(
                    w,
                    "{:<15} {:>7} {:>22.15e} {:>10.2e} {:>22.15e} {:>10.2e} {:>8.1e} {:>6} {:>8}",
                    r.identity_id.as_str(),
                    format!("{},{}", r.params.k1, r.params.k2),
                    r.lhs,
                    r.lhs_err,
                    r.rhs,
                    r.rel_dev,
                    r.tolerance,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.runtime_ms
                )?;
                let p = &r.params;
                writeln!(
                    w,
                    "{:<15} alpha={} beta1={} beta2={} gamma={} z1={} z2={} seed={}",
                    "", p.alpha, p.beta1, p.beta2, p.gamma, p.z1, p.z2, r.seed
                )?;
                if let Some(reason) = &r.reason {
                    writeln!(w, "{:<15} {reason}", "")?;
                }
            }
            let passed = records.iter().filter(|r| r.passed).count();
            writeln!(w, "{passed}/{} passed", records.len())?;
        }
    }
    Ok(())
}
