//! `compare`: run several backends over one trace and report per-step
//! estimates side by side, plus per-model tracking error against the
//! simulator's ground truth from the trace header.

#[cfg(test)]
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use trust_models::sim::BehaviorProfile;
use trust_models::Trace;

use crate::config::Config;
use crate::error::{run_err, Result};
use crate::models::{fmt_real, run_model, ModelKind, ModelParams};

/// Ground-truth success probability for a trustee at a step, read from the
/// header's `truth.<agent>` spec. Whitewasher generation suffixes (`id~k`)
/// resolve to the base agent.
fn ground_truth(trace: &Trace, trustee: &str, step: u64) -> Result<f64> {
    let base = trustee.split('~').next().unwrap_or(trustee);
    let spec = trace
        .header
        .meta
        .get(&format!("truth.{base}"))
        .ok_or_else(|| run_err(format!("trace header has no ground truth for {trustee:?}")))?;
    let profile = BehaviorProfile::parse_spec(spec)
        .map_err(|e| run_err(format!("truth.{base}: {e}")))?;
    profile.success_prob(step).ok_or_else(|| {
        run_err(format!(
            "agent {trustee:?} has no scalar ground-truth probability"
        ))
    })
}

pub fn run(cfg: &Config, kinds: &[ModelKind], seed: u64, trace: &Trace) -> Result<String> {
    // Validate every member config before running anything.
    let params: Vec<ModelParams> = kinds
        .iter()
        .map(|&k| ModelParams::from_config(cfg, k, seed))
        .collect::<Result<_>>()?;

    let mut estimates: Vec<Vec<f64>> = Vec::with_capacity(params.len());
    let mut summaries = String::new();
    for p in &params {
        let started = Instant::now();
        let rows = run_model(p, trace)?;
        let runtime = started.elapsed().as_secs_f64();
        if rows.len() != trace.records.len() {
            return Err(run_err(format!(
                "model {} produced {} rows for {} records",
                p.kind.name(),
                rows.len(),
                trace.records.len()
            )));
        }
        let mut abs_err = 0.0;
        for row in &rows {
            abs_err += (row.mean - ground_truth(trace, &row.trustee, row.step)?).abs();
        }
        let mae = if rows.is_empty() {
            0.0
        } else {
            abs_err / rows.len() as f64
        };
        let final_mean = rows.last().map_or(f64::NAN, |r| r.mean);
        let _ = writeln!(
            summaries,
            "#summary model={} mae={} final={} runtime_s={runtime:.3}",
            p.kind.name(),
            fmt_real(mae),
            fmt_real(final_mean)
        );
        estimates.push(rows.into_iter().map(|r| r.mean).collect());
    }

    // run_model returns rows in (step, trustor, trustee) order; rebuild that
    // ordering of the records for the aligned table.
    let mut order: Vec<usize> = (0..trace.records.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &trace.records[a];
        let rb = &trace.records[b];
        (ra.step, &ra.trustor, &ra.trustee).cmp(&(rb.step, &rb.trustor, &rb.trustee))
    });

    let mut out = String::new();
    out.push_str("step,trustor,trustee,truth");
    for k in kinds {
        let _ = write!(out, ",{}", k.name());
    }
    out.push('\n');
    for (pos, &idx) in order.iter().enumerate() {
        let r = &trace.records[idx];
        let truth = ground_truth(trace, &r.trustee, r.step)?;
        let _ = write!(
            out,
            "{},{},{},{}",
            r.step,
            r.trustor,
            r.trustee,
            fmt_real(truth)
        );
        for est in &estimates {
            let _ = write!(out, ",{}", fmt_real(est[pos]));
        }
        out.push('\n');
    }
    out.push_str(&summaries);
    Ok(out)
}

/// Per-model summary values parsed back out of a report, keyed by model name.
#[cfg(test)]
pub fn parse_summaries(report: &str) -> BTreeMap<String, (f64, f64)> {
    let mut out = BTreeMap::new();
    for line in report.lines() {
        let Some(rest) = line.strip_prefix("#summary ") else {
            continue;
        };
        let mut model = None;
        let mut mae = None;
        let mut final_mean = None;
        for field in rest.split_whitespace() {
            if let Some((k, v)) = field.split_once('=') {
                match k {
                    "model" => model = Some(v.to_string()),
                    "mae" => mae = v.parse().ok(),
                    "final" => final_mean = v.parse().ok(),
                    _ => {}
                }
            }
        }
        if let (Some(m), Some(e), Some(f)) = (model, mae, final_mean) {
            out.insert(m, (e, f));
        }
    }
    out
}
