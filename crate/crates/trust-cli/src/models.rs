//! Inference backends driven over a trace, one independent chain per
//! (trustor, trustee) pair.

use trust_models::pf::{
    predict, resample, weight, ParticleSet, ResampleScheme, StaticTransition, TransitionModel,
};
use trust_models::rng::{derive, id_hash};
use trust_models::sstm::{ipf_estimate, voting_value, SstmConfig, VotingLikelihood};
use trust_models::trust::{BetaParams, DirichletParams, Observation};
use trust_models::{BinomialLikelihood, Opinion, Trace, TraceRecord};

use crate::config::Config;
use crate::error::{config_err, run_err, Result};

/// Reals are printed with 17 significant digits so equal values render to
/// equal bytes and determinism is byte-testable.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Bdtm,
    Ddtm,
    GbtPf,
    Sstm,
    SstmIpf,
    Sltm,
}

impl ModelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "bdtm" => Ok(ModelKind::Bdtm),
            "ddtm" => Ok(ModelKind::Ddtm),
            "gbt-pf" => Ok(ModelKind::GbtPf),
            "sstm" => Ok(ModelKind::Sstm),
            "sstm-ipf" => Ok(ModelKind::SstmIpf),
            "sltm" => Ok(ModelKind::Sltm),
            other => Err(config_err(format!(
                "key model: unknown model {other:?} (expected bdtm, ddtm, gbt-pf, sstm, sstm-ipf or sltm)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bdtm => "bdtm",
            ModelKind::Ddtm => "ddtm",
            ModelKind::GbtPf => "gbt-pf",
            ModelKind::Sstm => "sstm",
            ModelKind::SstmIpf => "sstm-ipf",
            ModelKind::Sltm => "sltm",
        }
    }

    /// CSV header of this model's per-record output row.
    pub fn header(self) -> &'static str {
        match self {
            ModelKind::Bdtm => "step,trustor,trustee,mean,variance,alpha,beta",
            ModelKind::Ddtm => "step,trustor,trustee,mean,variance,alphas",
            ModelKind::GbtPf | ModelKind::Sstm => "step,trustor,trustee,mean,variance,ess",
            ModelKind::SstmIpf => "step,trustor,trustee,mean,committee",
            ModelKind::Sltm => {
                "step,trustor,trustee,mean,variance,belief,disbelief,ignorance,weight"
            }
        }
    }
}

/// Everything a backend needs besides the trace itself.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub seed: u64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    /// Explicit Dirichlet prior; `None` derives a unit prior from the first
    /// categorical record's arity.
    pub prior_alphas: Option<Vec<f64>>,
    /// Per-step evidence forgetting for the conjugate models; 1 = keep all.
    pub lambda: f64,
    pub particle_count: usize,
    /// `gbt-pf` transition: static, or the truncated-normal dynamics.
    pub dynamic_transition: bool,
    pub scheme: ResampleScheme,
    pub ess_threshold: Option<f64>,
    pub sstm: SstmConfig,
}

impl ModelParams {
    pub fn from_config(cfg: &Config, kind: ModelKind, seed: u64) -> Result<Self> {
        let prior_alphas = match cfg.get("prior_alphas") {
            None => None,
            Some(v) => {
                let alphas: Vec<f64> = v
                    .split(',')
                    .map(|a| {
                        a.trim().parse::<f64>().map_err(|_| {
                            config_err(format!("key prior_alphas: {a:?} is not a number"))
                        })
                    })
                    .collect::<Result<_>>()?;
                Some(alphas)
            }
        };
        let scheme = match cfg.get_str("resample", "systematic") {
            "systematic" => ResampleScheme::Systematic,
            "multinomial" => ResampleScheme::Multinomial,
            other => {
                return Err(config_err(format!(
                    "key resample: unknown scheme {other:?}"
                )))
            }
        };
        let dynamic_transition = match cfg.get_str("transition", "static") {
            "static" => false,
            "dynamic" => true,
            other => {
                return Err(config_err(format!(
                    "key transition: unknown transition {other:?} (expected static or dynamic)"
                )))
            }
        };
        let defaults = SstmConfig::default();
        let sstm = SstmConfig {
            forgetting: cfg.get_f64("forgetting", defaults.forgetting)?,
            process_variance: cfg.get_f64("process_variance", defaults.process_variance)?,
            sensitivity: cfg.get_f64("sensitivity", defaults.sensitivity)?,
            tolerance_r: cfg.get_f64("tolerance_r", defaults.tolerance_r)?,
            particle_count: cfg.get_usize("particle_count", defaults.particle_count)?,
            ipf_max_iter: cfg.get_usize("ipf_max_iter", defaults.ipf_max_iter)?,
            ipf_epsilon: cfg.get_f64("ipf_epsilon", defaults.ipf_epsilon)?,
        };
        let params = Self {
            kind,
            seed,
            prior_alpha: cfg.get_f64("prior_alpha", 1.0)?,
            prior_beta: cfg.get_f64("prior_beta", 1.0)?,
            prior_alphas,
            lambda: cfg.get_f64("lambda", 1.0)?,
            particle_count: cfg.get_usize("particle_count", 1000)?,
            dynamic_transition,
            scheme,
            ess_threshold: cfg.get_opt_f64("ess_threshold")?,
            sstm,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !(self.prior_alpha > 0.0 && self.prior_beta > 0.0) {
            return Err(config_err(
                "keys prior_alpha/prior_beta: Beta prior parameters must be positive",
            ));
        }
        if let Some(alphas) = &self.prior_alphas {
            if alphas.len() < 2 || alphas.iter().any(|a| *a <= 0.0) {
                return Err(config_err(
                    "key prior_alphas: need >= 2 positive parameters",
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(config_err(format!(
                "key lambda: forgetting factor {} outside [0,1]",
                self.lambda
            )));
        }
        if self.particle_count == 0 {
            return Err(config_err("key particle_count: must be >= 1"));
        }
        if let Some(t) = self.ess_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(config_err(format!(
                    "key ess_threshold: fraction {t} outside [0,1]"
                )));
            }
        }
        if matches!(self.kind, ModelKind::Sstm | ModelKind::SstmIpf | ModelKind::GbtPf) {
            self.sstm
                .validate()
                .map_err(|e| config_err(format!("state-space parameters: {e}")))?;
        }
        Ok(())
    }
}

/// One output row: the shared (step, trustor, trustee, mean) prefix every
/// model emits, plus the model-specific remainder already formatted.
#[derive(Debug, Clone)]
pub struct Row {
    pub step: u64,
    pub trustor: String,
    pub trustee: String,
    pub mean: f64,
    pub rest: String,
}

impl Row {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{}{}{}",
            self.step,
            self.trustor,
            self.trustee,
            fmt_real(self.mean),
            if self.rest.is_empty() { "" } else { "," },
            self.rest
        )
    }
}

fn incompatible(record: &TraceRecord, model: ModelKind) -> crate::error::CliError {
    run_err(format!(
        "step {}: {} observation not supported by model {}",
        record.step,
        record.observation.kind(),
        model.name()
    ))
}

fn model_err(record: &TraceRecord, e: trust_models::Error) -> crate::error::CliError {
    run_err(format!("step {}: {e}", record.step))
}

/// TAG values keying per-chain substreams of the run seed.
const TAG_PREDICT: u64 = 1;
const TAG_RESAMPLE: u64 = 2;
const TAG_INIT: u64 = 3;

struct PfChain {
    particles: ParticleSet,
}

impl PfChain {
    fn init(params: &ModelParams, chain_key: u64) -> Result<Self> {
        let prior = BetaParams::new(params.prior_alpha, params.prior_beta)
            .map_err(|e| config_err(format!("keys prior_alpha/prior_beta: {e}")))?;
        let particles = ParticleSet::from_prior(
            params.particle_count,
            derive(params.seed, TAG_INIT, chain_key),
            |rng| prior.sample(rng),
        )
        .map_err(|e| run_err(e.to_string()))?;
        Ok(Self { particles })
    }

    /// Predict, weight, optionally resample; returns the pre-resample ESS as
    /// the degeneracy diagnostic.
    fn step(
        &mut self,
        trans: &dyn TransitionModel,
        lik: &dyn trust_models::LikelihoodModel,
        record: &TraceRecord,
        params: &ModelParams,
        chain_key: u64,
    ) -> Result<f64> {
        let predicted = predict(
            &self.particles,
            trans,
            derive(params.seed, TAG_PREDICT, chain_key ^ record.step),
        )
        .map_err(|e| model_err(record, e))?;
        let weighted =
            weight(&predicted, lik, &record.observation).map_err(|e| model_err(record, e))?;
        let ess = weighted.effective_sample_size();
        let do_resample = match params.ess_threshold {
            None => true,
            Some(frac) => ess < frac * weighted.len() as f64,
        };
        self.particles = if do_resample {
            resample(
                &weighted,
                params.scheme,
                derive(params.seed, TAG_RESAMPLE, chain_key ^ record.step),
            )
        } else {
            weighted
        };
        Ok(ess)
    }
}

/// Run one model over the records of a single (trustor, trustee) chain,
/// in step order, producing one row per record.
pub fn run_chain(params: &ModelParams, records: &[&TraceRecord]) -> Result<Vec<Row>> {
    let chain_key = records
        .first()
        .map(|r| id_hash(&format!("{}\u{1f}{}", r.trustor, r.trustee)))
        .unwrap_or(0);
    let mut rows = Vec::with_capacity(records.len());
    match params.kind {
        ModelKind::Bdtm => {
            let mut state = BetaParams::new(params.prior_alpha, params.prior_beta)
                .map_err(|e| config_err(format!("keys prior_alpha/prior_beta: {e}")))?;
            for r in records {
                if params.lambda < 1.0 {
                    state = state.discount(params.lambda).map_err(|e| model_err(r, e))?;
                }
                state = match r.observation {
                    Observation::BinaryBatch { n, m } => {
                        state.observe_batch(n, m).map_err(|e| model_err(r, e))?
                    }
                    Observation::AdvisorReport {
                        advisor_trust,
                        n,
                        m,
                    } => state
                        .observe_advisor(advisor_trust, n, m)
                        .map_err(|e| model_err(r, e))?,
                    _ => return Err(incompatible(r, params.kind)),
                };
                rows.push(Row {
                    step: r.step,
                    trustor: r.trustor.clone(),
                    trustee: r.trustee.clone(),
                    mean: state.mean().value(),
                    rest: format!(
                        "{},{},{}",
                        fmt_real(state.variance()),
                        fmt_real(state.alpha),
                        fmt_real(state.beta)
                    ),
                });
            }
        }
        ModelKind::Ddtm => {
            let mut state: Option<DirichletParams> = match &params.prior_alphas {
                Some(alphas) => Some(
                    DirichletParams::new(alphas.clone())
                        .map_err(|e| config_err(format!("key prior_alphas: {e}")))?,
                ),
                None => None,
            };
            for r in records {
                let counts = match &r.observation {
                    Observation::CategoricalBatch { counts } => counts,
                    _ => return Err(incompatible(r, params.kind)),
                };
                let mut d = match state.take() {
                    Some(d) => d,
                    None => DirichletParams::new(vec![1.0; counts.len()])
                        .map_err(|e| model_err(r, e))?,
                };
                if params.lambda < 1.0 {
                    d = d.discount(params.lambda).map_err(|e| model_err(r, e))?;
                }
                let d = d.observe_counts(counts).map_err(|e| model_err(r, e))?;
                let alphas = d
                    .alphas
                    .iter()
                    .map(|a| fmt_real(*a))
                    .collect::<Vec<_>>()
                    .join(";");
                rows.push(Row {
                    step: r.step,
                    trustor: r.trustor.clone(),
                    trustee: r.trustee.clone(),
                    mean: d.mean().values()[0],
                    rest: format!("{},{}", fmt_real(d.component_variance(0)), alphas),
                });
                state = Some(d);
            }
        }
        ModelKind::GbtPf => {
            let mut chain = PfChain::init(params, chain_key)?;
            let static_trans = StaticTransition;
            let dyn_trans = params
                .sstm
                .transition()
                .map_err(|e| config_err(format!("state-space parameters: {e}")))?;
            let trans: &dyn TransitionModel = if params.dynamic_transition {
                &dyn_trans
            } else {
                &static_trans
            };
            for r in records {
                let ess = chain.step(trans, &BinomialLikelihood, r, params, chain_key)?;
                rows.push(pf_row(r, &chain.particles, ess));
            }
        }
        ModelKind::Sstm => {
            let mut chain = PfChain::init(params, chain_key)?;
            let trans = params
                .sstm
                .transition()
                .map_err(|e| config_err(format!("state-space parameters: {e}")))?;
            for r in records {
                let ess = match &r.observation {
                    Observation::VotingVector { own, neighbors } => {
                        let voting = voting_value(*own, neighbors, params.sstm.tolerance_r)
                            .map_err(|e| model_err(r, e))?;
                        let lik = VotingLikelihood {
                            voting,
                            sensitivity: params.sstm.sensitivity,
                        };
                        chain.step(&trans, &lik, r, params, chain_key)?
                    }
                    Observation::BinaryBatch { .. } | Observation::AdvisorReport { .. } => {
                        chain.step(&trans, &BinomialLikelihood, r, params, chain_key)?
                    }
                    _ => return Err(incompatible(r, params.kind)),
                };
                rows.push(pf_row(r, &chain.particles, ess));
            }
        }
        ModelKind::SstmIpf => {
            for r in records {
                let (own, neighbors) = match &r.observation {
                    Observation::VotingVector { own, neighbors } => (own, neighbors),
                    _ => return Err(incompatible(r, params.kind)),
                };
                let mut committee = Vec::with_capacity(neighbors.len() + 1);
                committee.push(*own);
                committee.extend_from_slice(neighbors);
                let state = ipf_estimate(
                    &committee,
                    &params.sstm,
                    derive(params.seed, chain_key, r.step),
                )
                .map_err(|e| model_err(r, e))?;
                let trusts = state
                    .trusts
                    .iter()
                    .map(|t| fmt_real(t.value()))
                    .collect::<Vec<_>>()
                    .join(";");
                rows.push(Row {
                    step: r.step,
                    trustor: r.trustor.clone(),
                    trustee: r.trustee.clone(),
                    mean: state.trusts[0].value(),
                    rest: trusts,
                });
            }
        }
        ModelKind::Sltm => {
            let mut state = Opinion::vacuous();
            for r in records {
                state = match &r.observation {
                    Observation::OpinionReport { opinion } => state.fuse(opinion),
                    Observation::BinaryBatch { n, m } => {
                        state.observe_outcomes(&[*m, 0, *n - *m])
                    }
                    _ => return Err(incompatible(r, params.kind)),
                };
                rows.push(Row {
                    step: r.step,
                    trustor: r.trustor.clone(),
                    trustee: r.trustee.clone(),
                    mean: state.projected_trust().value(),
                    rest: format!(
                        "{},{},{},{},{}",
                        fmt_real(state.projected_variance()),
                        fmt_real(state.belief),
                        fmt_real(state.disbelief),
                        fmt_real(state.ignorance),
                        fmt_real(state.evidence_weight)
                    ),
                });
            }
        }
    }
    Ok(rows)
}

fn pf_row(r: &TraceRecord, particles: &ParticleSet, ess: f64) -> Row {
    Row {
        step: r.step,
        trustor: r.trustor.clone(),
        trustee: r.trustee.clone(),
        mean: particles.mean(),
        rest: format!("{},{}", fmt_real(particles.variance()), fmt_real(ess)),
    }
}

/// Run a model over a whole trace. Chains are independent, so they are
/// dispatched through the library's execution layer (parallel by default);
/// rows come back in deterministic (step, trustor, trustee) order.
pub fn run_model(params: &ModelParams, trace: &Trace) -> Result<Vec<Row>> {
    let mut chain_ids: Vec<(String, String)> = Vec::new();
    for r in &trace.records {
        let key = (r.trustor.clone(), r.trustee.clone());
        if !chain_ids.contains(&key) {
            chain_ids.push(key);
        }
    }
    let chains: Vec<Vec<&TraceRecord>> = chain_ids
        .iter()
        .map(|(trustor, trustee)| {
            trace
                .records
                .iter()
                .filter(|r| &r.trustor == trustor && &r.trustee == trustee)
                .collect()
        })
        .collect();
    let results = trust_models::exec::map_indexed(&chains, |_, records| {
        run_chain(params, records)
    });
    let mut rows = Vec::with_capacity(trace.records.len());
    for chain_rows in results {
        rows.extend(chain_rows?);
    }
    rows.sort_by(|a, b| {
        (a.step, &a.trustor, &a.trustee).cmp(&(b.step, &b.trustor, &b.trustee))
    });
    Ok(rows)
}
