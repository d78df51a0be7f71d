//! `infer`: drive one inference backend over a trace, emitting one CSV row
//! per (step, trustor, trustee) record.

use trust_models::Trace;

use crate::config::Config;
use crate::error::Result;
use crate::models::{run_model, ModelKind, ModelParams};

pub fn run(cfg: &Config, kind: ModelKind, seed: u64, trace: &Trace) -> Result<String> {
    let params = ModelParams::from_config(cfg, kind, seed)?;
    let rows = run_model(&params, trace)?;
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(kind.header());
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    Ok(out)
}
