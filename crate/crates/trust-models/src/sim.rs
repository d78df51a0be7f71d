//! Agent-network interaction simulator.
//!
//! Generates reproducible traces exercising every inference backend: binary
//! and categorical interaction batches, advisor reports of varying honesty,
//! committee sensor readings, and adversarial behaviors (step-changing
//! trustees, unfair raters, whitewashers).
//!
//! Every random draw comes from a substream keyed by
//! (master seed, agent id hash, step), so adding or removing an agent never
//! perturbs any other agent's outcomes, and disjoint interactions can be
//! generated in parallel without changing the result.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::opinion::Opinion;
use crate::rng::{id_hash, substream};
use crate::trace::{validate_agent_id, Trace, TraceHeader, TraceRecord};
use crate::trust::{Observation, TrustScalar};

/// How an agent behaves when acting as a trustee (or sensor).
#[derive(Debug, Clone, PartialEq)]
pub enum BehaviorProfile {
    /// Succeeds each trial with fixed probability p.
    StaticBernoulli { p: f64 },
    /// Switches success probability at `change_step`.
    StepChange {
        p_before: f64,
        p_after: f64,
        change_step: u64,
    },
    /// Emits a reading `base + drift*step + N(0, noise_sd^2)`, plus a fixed
    /// offset from `fault_start` on.
    SensorReader {
        base_value: f64,
        drift: f64,
        noise_sd: f64,
        fault_offset: f64,
        fault_start: Option<u64>,
    },
    /// Multinomial outcomes with fixed category probabilities.
    Categorical { probs: Vec<f64> },
    /// Advisor honesty: reported successes are shifted by round(bias * n)
    /// and clamped to [0, n].
    UnfairRater { bias: f64 },
    /// Behaves like StaticBernoulli but re-enters under a fresh identity
    /// every `lifetime_steps`.
    Whitewasher { lifetime_steps: u64, p: f64 },
}

impl BehaviorProfile {
    pub fn validate(&self) -> Result<()> {
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        match self {
            BehaviorProfile::StaticBernoulli { p } | BehaviorProfile::Whitewasher { p, .. } => {
                if !prob_ok(*p) {
                    return Err(Error::InvalidParameter(format!(
                        "success probability {p} outside [0,1]"
                    )));
                }
            }
            BehaviorProfile::StepChange {
                p_before, p_after, ..
            } => {
                if !prob_ok(*p_before) || !prob_ok(*p_after) {
                    return Err(Error::InvalidParameter(
                        "step-change probabilities outside [0,1]".into(),
                    ));
                }
            }
            BehaviorProfile::SensorReader { noise_sd, .. } => {
                if *noise_sd < 0.0 || !noise_sd.is_finite() {
                    return Err(Error::InvalidParameter(
                        "noise_sd must be non-negative".into(),
                    ));
                }
            }
            BehaviorProfile::Categorical { probs } => {
                if probs.len() < 2 || probs.iter().any(|p| !prob_ok(*p)) {
                    return Err(Error::InvalidParameter(
                        "categorical profile needs >= 2 probabilities in [0,1]".into(),
                    ));
                }
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "categorical probabilities sum to {sum}, expected 1"
                    )));
                }
            }
            BehaviorProfile::UnfairRater { bias } => {
                if !(-1.0..=1.0).contains(bias) {
                    return Err(Error::InvalidParameter(format!(
                        "rater bias {bias} outside [-1,1]"
                    )));
                }
            }
        }
        if let BehaviorProfile::Whitewasher { lifetime_steps, .. } = self {
            if *lifetime_steps == 0 {
                return Err(Error::InvalidParameter(
                    "whitewasher lifetime must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }

    /// Ground-truth success probability at the given step, if this profile
    /// produces binary outcomes.
    pub fn success_prob(&self, step: u64) -> Option<f64> {
        match self {
            BehaviorProfile::StaticBernoulli { p } | BehaviorProfile::Whitewasher { p, .. } => {
                Some(*p)
            }
            BehaviorProfile::StepChange {
                p_before,
                p_after,
                change_step,
            } => Some(if step < *change_step {
                *p_before
            } else {
                *p_after
            }),
            _ => None,
        }
    }

    /// Compact spec string used in trace headers as ground truth.
    pub fn spec_string(&self) -> String {
        match self {
            BehaviorProfile::StaticBernoulli { p } => format!("static:{p}"),
            BehaviorProfile::StepChange {
                p_before,
                p_after,
                change_step,
            } => format!("step:{p_before}:{p_after}:{change_step}"),
            BehaviorProfile::SensorReader {
                base_value,
                drift,
                noise_sd,
                fault_offset,
                fault_start,
            } => {
                let start = fault_start.map_or("never".to_string(), |s| s.to_string());
                format!("sensor:{base_value}:{drift}:{noise_sd}:{fault_offset}:{start}")
            }
            BehaviorProfile::Categorical { probs } => {
                let body = probs
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(":");
                format!("cat:{body}")
            }
            BehaviorProfile::UnfairRater { bias } => format!("unfair:{bias}"),
            BehaviorProfile::Whitewasher { lifetime_steps, p } => {
                format!("whitewash:{lifetime_steps}:{p}")
            }
        }
    }

    /// Inverse of [`BehaviorProfile::spec_string`].
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad behavior spec {spec:?}"));
        let mut parts = spec.split(':');
        let kind = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let f = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let u = |s: &str| s.parse::<u64>().map_err(|_| bad());
        let profile = match (kind, rest.as_slice()) {
            ("static", [p]) => BehaviorProfile::StaticBernoulli { p: f(p)? },
            ("step", [pb, pa, cs]) => BehaviorProfile::StepChange {
                p_before: f(pb)?,
                p_after: f(pa)?,
                change_step: u(cs)?,
            },
            ("sensor", [base, drift, sd, off, start]) => BehaviorProfile::SensorReader {
                base_value: f(base)?,
                drift: f(drift)?,
                noise_sd: f(sd)?,
                fault_offset: f(off)?,
                fault_start: if *start == "never" {
                    None
                } else {
                    Some(u(start)?)
                },
            },
            ("cat", probs) if probs.len() >= 2 => BehaviorProfile::Categorical {
                probs: probs.iter().map(|p| f(p)).collect::<Result<_>>()?,
            },
            ("unfair", [b]) => BehaviorProfile::UnfairRater { bias: f(b)? },
            ("whitewash", [life, p]) => BehaviorProfile::Whitewasher {
                lifetime_steps: u(life)?,
                p: f(p)?,
            },
            _ => return Err(bad()),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// One sensor reading at the given step; `None` for non-sensor profiles.
    pub fn reading(&self, step: u64, rng: &mut rand_chacha::ChaCha8Rng) -> Option<f64> {
        match self {
            BehaviorProfile::SensorReader {
                base_value,
                drift,
                noise_sd,
                fault_offset,
                fault_start,
            } => {
                let noise: f64 = <StandardNormal as Distribution<f64>>::sample(
                    &StandardNormal,
                    rng,
                );
                let fault = match fault_start {
                    Some(start) if step >= *start => *fault_offset,
                    _ => 0.0,
                };
                Some(base_value + drift * step as f64 + noise_sd * noise + fault)
            }
            _ => None,
        }
    }
}

/// One scheduled interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub step: u64,
    pub trustor: String,
    pub trustee: String,
}

/// Explicit interaction schedule, kept sorted by (step, trustor, trustee).
#[derive(Debug, Clone, Default)]
pub struct Schedule {
    interactions: Vec<Interaction>,
}

impl Schedule {
    pub fn new(mut interactions: Vec<Interaction>) -> Self {
        interactions.sort_by(|a, b| {
            (a.step, &a.trustor, &a.trustee).cmp(&(b.step, &b.trustor, &b.trustee))
        });
        Self { interactions }
    }

    /// One interaction between the trustor and every trustee at every step
    /// 1..=horizon.
    pub fn pairwise(trustor: &str, trustees: &[String], horizon: u64) -> Self {
        let mut out = Vec::with_capacity(trustees.len() * horizon as usize);
        for step in 1..=horizon {
            for trustee in trustees {
                out.push(Interaction {
                    step,
                    trustor: trustor.to_string(),
                    trustee: trustee.clone(),
                });
            }
        }
        Self::new(out)
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }
}

fn draw_successes(n: u64, p: f64, rng: &mut rand_chacha::ChaCha8Rng) -> u64 {
    (0..n).filter(|_| rng.random::<f64>() < p).count() as u64
}

/// Deterministic trace generation from behavior profiles and a schedule.
///
/// Binary-outcome trustees produce `BinaryBatch` records with
/// `trials_per_step` trials; categorical trustees produce
/// `CategoricalBatch` records; sensor trustees produce `VotingVector`
/// records whose neighbors are all other sensor agents.
pub fn generate_trace(
    profiles: &BTreeMap<String, BehaviorProfile>,
    schedule: &Schedule,
    trials_per_step: u64,
    master_seed: u64,
) -> Result<Trace> {
    for (name, profile) in profiles {
        validate_agent_id(name)?;
        profile.validate()?;
    }
    let mut meta = BTreeMap::new();
    for (name, profile) in profiles {
        meta.insert(format!("truth.{name}"), profile.spec_string());
    }
    meta.insert("trials_per_step".into(), trials_per_step.to_string());

    let sensor_agents: Vec<&String> = profiles
        .iter()
        .filter(|(_, p)| matches!(p, BehaviorProfile::SensorReader { .. }))
        .map(|(n, _)| n)
        .collect();

    let mut records = Vec::with_capacity(schedule.interactions().len());
    for it in schedule.interactions() {
        let profile = profiles.get(&it.trustee).ok_or_else(|| {
            Error::InvalidInput(format!(
                "schedule references unknown agent {:?}",
                it.trustee
            ))
        })?;
        let mut rng = substream(master_seed, id_hash(&it.trustee), it.step);
        let (trustee_id, observation) = match profile {
            BehaviorProfile::StaticBernoulli { p } => (
                it.trustee.clone(),
                Observation::BinaryBatch {
                    n: trials_per_step,
                    m: draw_successes(trials_per_step, *p, &mut rng),
                },
            ),
            BehaviorProfile::StepChange { .. } => {
                let p = profile.success_prob(it.step).expect("binary profile");
                (
                    it.trustee.clone(),
                    Observation::BinaryBatch {
                        n: trials_per_step,
                        m: draw_successes(trials_per_step, p, &mut rng),
                    },
                )
            }
            BehaviorProfile::Whitewasher { lifetime_steps, p } => {
                let generation = (it.step.saturating_sub(1)) / lifetime_steps;
                (
                    format!("{}~{}", it.trustee, generation),
                    Observation::BinaryBatch {
                        n: trials_per_step,
                        m: draw_successes(trials_per_step, *p, &mut rng),
                    },
                )
            }
            BehaviorProfile::Categorical { probs } => {
                let mut counts = vec![0u64; probs.len()];
                for _ in 0..trials_per_step {
                    let u: f64 = rng.random::<f64>();
                    let mut acc = 0.0;
                    let mut idx = probs.len() - 1;
                    for (i, p) in probs.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            idx = i;
                            break;
                        }
                    }
                    counts[idx] += 1;
                }
                (it.trustee.clone(), Observation::CategoricalBatch { counts })
            }
            BehaviorProfile::SensorReader { .. } => {
                let own = profile
                    .reading(it.step, &mut rng)
                    .expect("sensor profile emits readings");
                let mut neighbors = Vec::new();
                for name in &sensor_agents {
                    if *name == &it.trustee {
                        continue;
                    }
                    let mut nrng = substream(master_seed, id_hash(name), it.step);
                    neighbors.push(
                        profiles[*name]
                            .reading(it.step, &mut nrng)
                            .expect("sensor profile emits readings"),
                    );
                }
                if neighbors.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "sensor trustee {:?} has no neighbor sensors",
                        it.trustee
                    )));
                }
                (
                    it.trustee.clone(),
                    Observation::VotingVector { own, neighbors },
                )
            }
            BehaviorProfile::UnfairRater { .. } => {
                return Err(Error::InvalidInput(format!(
                    "agent {:?} is a rater profile and cannot act as trustee",
                    it.trustee
                )))
            }
        };
        records.push(TraceRecord {
            step: it.step,
            trustor: it.trustor.clone(),
            trustee: trustee_id,
            observation,
        });
    }
    records.sort_by(|a, b| {
        (a.step, &a.trustor, &a.trustee).cmp(&(b.step, &b.trustor, &b.trustee))
    });
    Ok(Trace {
        header: TraceHeader {
            seed: master_seed,
            meta,
        },
        records,
    })
}

/// Readings of a sensor committee at one step, in member order.
pub fn generate_committee_readings(
    members: &[(String, BehaviorProfile)],
    step: u64,
    master_seed: u64,
) -> Result<Vec<f64>> {
    if members.len() < 2 {
        return Err(Error::InvalidInput(
            "committee needs at least 2 members".into(),
        ));
    }
    members
        .iter()
        .map(|(name, profile)| {
            let mut rng = substream(master_seed, id_hash(name), step);
            profile.reading(step, &mut rng).ok_or_else(|| {
                Error::InvalidInput(format!("committee member {name:?} is not a sensor"))
            })
        })
        .collect()
}

/// A third-party peer that reports about trustees.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvisorSpec {
    pub name: String,
    /// The trustor's trust in this advisor (theta_a in its reports).
    pub trust: f64,
    /// `None` reports honestly; `Some(bias)` shifts reported successes by
    /// round(bias * n), clamped to [0, n].
    pub bias: Option<f64>,
}

/// Advisor reports about one trustee at one step. Each advisor observes an
/// independent n-trial interaction with the trustee (keyed by its own
/// substream), then reports it subject to its honesty.
pub fn generate_advisor_reports(
    trustee_profile: &BehaviorProfile,
    advisors: &[AdvisorSpec],
    n_per_report: u64,
    step: u64,
    master_seed: u64,
) -> Result<Vec<(String, Observation)>> {
    if n_per_report == 0 {
        return Err(Error::InvalidInput("n_per_report must be >= 1".into()));
    }
    let p = trustee_profile.success_prob(step).ok_or_else(|| {
        Error::InvalidInput("advisor reports need a binary-outcome trustee".into())
    })?;
    advisors
        .iter()
        .map(|advisor| {
            let mut rng = substream(master_seed, id_hash(&advisor.name), step);
            let true_m = draw_successes(n_per_report, p, &mut rng);
            let m = match advisor.bias {
                None => true_m,
                Some(bias) => {
                    let shift = (bias * n_per_report as f64).round() as i64;
                    (true_m as i64 + shift).clamp(0, n_per_report as i64) as u64
                }
            };
            Ok((
                advisor.name.clone(),
                Observation::AdvisorReport {
                    advisor_trust: TrustScalar::new(advisor.trust)?,
                    n: n_per_report,
                    m,
                },
            ))
        })
        .collect()
}

/// An opinion report summarizing n observed trials: successes as belief,
/// failures as disbelief, one unit of ignorance for the unobserved future.
pub fn opinion_from_trials(n: u64, m: u64) -> Opinion {
    let w = (n + 1) as f64;
    Opinion::new(m as f64 / w, (n - m) as f64 / w, 1.0 / w, w)
        .expect("triplet sums to 1 by construction")
}
