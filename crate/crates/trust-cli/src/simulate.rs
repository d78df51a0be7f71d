//! `simulate`: build a trace from a scenario config.
//!
//! Scenario keys:
//! - `agent.<name> = <profile>` — behavior spec (`static:p`, `step:pb:pa:cs`,
//!   `sensor:base:drift:sd:offset:start|never`, `cat:p1:...:pb`,
//!   `whitewash:lifetime:p`, `unfair:bias`)
//! - `advisor.<name> = <trust>` or `<trust>:<bias>` — third-party reporters
//!   about every binary-outcome trustee
//! - `horizon`, `trials_per_step`, `trustor`, `seed`
//! - `emit = binary | opinion` — report binary batches as-is or as
//!   subjective-logic opinions

use std::collections::BTreeMap;

use trust_models::sim::{
    generate_advisor_reports, generate_trace, opinion_from_trials, AdvisorSpec, BehaviorProfile,
    Schedule,
};
use trust_models::trust::Observation;
use trust_models::{Trace, TraceRecord};

use crate::config::Config;
use crate::error::{config_err, Result};

pub fn build_trace(cfg: &Config, seed: u64) -> Result<Trace> {
    let horizon = cfg.get_u64("horizon", 100)?;
    if horizon == 0 {
        return Err(config_err("key horizon: must be >= 1"));
    }
    let trials = cfg.get_u64("trials_per_step", 10)?;
    let trustor = cfg.get_str("trustor", "observer").to_string();
    let emit = cfg.get_str("emit", "binary");
    if emit != "binary" && emit != "opinion" {
        return Err(config_err(format!(
            "key emit: unknown mode {emit:?} (expected binary or opinion)"
        )));
    }

    let mut profiles: BTreeMap<String, BehaviorProfile> = BTreeMap::new();
    for (name, spec) in cfg.with_prefix("agent.") {
        let profile = BehaviorProfile::parse_spec(spec)
            .map_err(|e| config_err(format!("key agent.{name}: {e}")))?;
        profiles.insert(name.to_string(), profile);
    }
    if profiles.is_empty() {
        return Err(config_err("no agents configured (expected agent.<name> keys)"));
    }

    let mut advisors = Vec::new();
    for (name, spec) in cfg.with_prefix("advisor.") {
        let bad = || config_err(format!("key advisor.{name}: bad advisor spec {spec:?}"));
        let (trust_str, bias) = match spec.split_once(':') {
            None => (spec, None),
            Some((t, b)) => (t, Some(b.parse::<f64>().map_err(|_| bad())?)),
        };
        let trust: f64 = trust_str.parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&trust) {
            return Err(config_err(format!(
                "key advisor.{name}: trust {trust} outside [0,1]"
            )));
        }
        advisors.push(AdvisorSpec {
            name: name.to_string(),
            trust,
            bias,
        });
    }

    // Raters only ever appear as advisors, never as trustees.
    let trustees: Vec<String> = profiles
        .iter()
        .filter(|(_, p)| !matches!(p, BehaviorProfile::UnfairRater { .. }))
        .map(|(n, _)| n.clone())
        .collect();
    if trustees.is_empty() {
        return Err(config_err("no trustee agents configured (all are raters)"));
    }
    let schedule = Schedule::pairwise(&trustor, &trustees, horizon);
    let mut trace = generate_trace(&profiles, &schedule, trials, seed)
        .map_err(|e| config_err(e.to_string()))?;

    if !advisors.is_empty() {
        let mut extra = Vec::new();
        for (name, profile) in &profiles {
            if profile.success_prob(1).is_none() {
                continue;
            }
            for step in 1..=horizon {
                let reports = generate_advisor_reports(profile, &advisors, trials, step, seed)
                    .map_err(|e| config_err(e.to_string()))?;
                for (_advisor_name, observation) in reports {
                    extra.push(TraceRecord {
                        step,
                        trustor: trustor.clone(),
                        trustee: name.clone(),
                        observation,
                    });
                }
            }
        }
        for a in &advisors {
            let bias = a.bias.map_or("honest".to_string(), |b| b.to_string());
            trace
                .header
                .meta
                .insert(format!("advisor.{}", a.name), format!("{}:{bias}", a.trust));
        }
        trace.records.extend(extra);
        // stable: direct observations sort ahead of same-step advisor reports
        trace
            .records
            .sort_by(|a, b| (a.step, &a.trustor, &a.trustee).cmp(&(b.step, &b.trustor, &b.trustee)));
    }

    if emit == "opinion" {
        for r in &mut trace.records {
            if let Observation::BinaryBatch { n, m } = r.observation {
                r.observation = Observation::OpinionReport {
                    opinion: opinion_from_trials(n, m),
                };
            }
        }
    }

    trace.header.meta.insert("horizon".into(), horizon.to_string());
    trace.header.meta.insert("trustor".into(), trustor);
    trace.header.meta.insert("emit".into(), emit.to_string());
    Ok(trace)
}
