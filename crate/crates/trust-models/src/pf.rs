//! Bootstrap particle filter over a latent trust variable.
//!
//! One filtering step is predict (draw each particle through the transition),
//! weight (multiply weights by the observation likelihood and renormalize),
//! and resample (systematic by default). The proposal is the transition
//! prior, so the incremental weight reduces to the likelihood alone.
//! Likelihoods are handled in log space and only ever up to a
//! theta-independent constant; weight normalization subsumes the evidence
//! term.
//!
//! Per-particle randomness comes from counter-based substreams of the step
//! seed, so the parallel and sequential execution paths are bit-identical.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::rng::{derive, substream};
use crate::trust::Observation;

use statrs::distribution::{ContinuousCDF, Normal};

const TAG_PREDICT: u64 = 0x7072_6564; // "pred"
const TAG_RESAMPLE: u64 = 0x7273_6d70; // "rsmp"

/// Weighted sample approximation of a trust posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<f64>,
    weights: Vec<f64>,
}

impl ParticleSet {
    pub fn new(particles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() || particles.len() != weights.len() {
            return Err(Error::InvalidInput(
                "particle and weight vectors must be non-empty and equal length".into(),
            ));
        }
        if particles.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput("particle outside [0,1]".into()));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidInput("negative or non-finite weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self { particles, weights })
    }

    /// Equal-weight set over the given particle values.
    pub fn uniform(particles: Vec<f64>) -> Result<Self> {
        let n = particles.len();
        let w = 1.0 / n as f64;
        Self::new(particles, vec![w; n])
    }

    /// Draw n equal-weight particles from a sampler of the prior.
    pub fn from_prior<F>(n: usize, seed: u64, sample: F) -> Result<Self>
    where
        F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
    {
        if n == 0 {
            return Err(Error::InvalidInput("particle count must be >= 1".into()));
        }
        let idx: Vec<usize> = (0..n).collect();
        let particles = map_indexed(&idx, |_, &i| {
            let mut rng = substream(seed, TAG_PREDICT, i as u64);
            sample(&mut rng)
        });
        Self::uniform(particles)
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[f64] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weighted posterior-mean estimate.
    pub fn mean(&self) -> f64 {
        self.particles
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| p * w)
            .sum()
    }

    /// Weighted posterior-variance estimate.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.particles
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * (p - m) * (p - m))
            .sum()
    }

    /// Effective sample size 1 / sum(w^2), in [1, N].
    pub fn effective_sample_size(&self) -> f64 {
        let s: f64 = self.weights.iter().map(|w| w * w).sum();
        1.0 / s
    }
}

/// Time-evolution law of the trust variable.
pub trait TransitionModel: Sync {
    /// Draw theta_k given theta_{k-1}. Outputs must stay in [0,1].
    fn sample(&self, theta_prev: f64, rng: &mut ChaCha8Rng) -> f64;

    /// Transition density up to a constant. Unused by the bootstrap filter
    /// (the proposal cancels it) but part of the model definition.
    fn density(&self, theta_prev: f64, theta: f64) -> f64;
}

/// Observation model, evaluated in log space up to an additive constant.
pub trait LikelihoodModel: Sync {
    /// Check the observation is of a kind this model understands.
    fn validate(&self, obs: &Observation) -> Result<()>;

    /// log p(y | theta) up to a theta-independent constant; may be -inf.
    fn log_likelihood(&self, theta: f64, obs: &Observation) -> f64;
}

/// Static trust: theta_k = theta_{k-1}.
pub struct StaticTransition;

impl TransitionModel for StaticTransition {
    fn sample(&self, theta_prev: f64, _rng: &mut ChaCha8Rng) -> f64 {
        theta_prev
    }

    fn density(&self, theta_prev: f64, theta: f64) -> f64 {
        if theta == theta_prev {
            1.0
        } else {
            0.0
        }
    }
}

/// Truncated-normal trust dynamics: theta_k ~ N(forgetting * theta_{k-1}, Q)
/// restricted to [0,1], sampled exactly by inverse-CDF transform (no
/// clipping, which would put probability atoms on the boundary).
pub struct TruncatedNormalTransition {
    pub forgetting: f64,
    pub variance: f64,
}

impl TruncatedNormalTransition {
    pub fn new(forgetting: f64, variance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&forgetting) {
            return Err(Error::InvalidParameter(format!(
                "forgetting factor {forgetting} outside [0,1]"
            )));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter(
                "process variance must be positive".into(),
            ));
        }
        Ok(Self {
            forgetting,
            variance,
        })
    }

    /// Exact draw from the truncated normal.
    pub fn draw(&self, theta_prev: f64, rng: &mut ChaCha8Rng) -> f64 {
        let mu = self.forgetting * theta_prev;
        let sigma = self.variance.sqrt();
        let std = Normal::standard();
        let lo = std.cdf((0.0 - mu) / sigma);
        let hi = std.cdf((1.0 - mu) / sigma);
        if hi <= lo {
            // CDF saturated at both ends; the distribution is numerically a
            // point mass at the nearest boundary of [0,1].
            return mu.clamp(0.0, 1.0);
        }
        let u: f64 = rng.random::<f64>();
        let p = lo + u * (hi - lo);
        (mu + sigma * std.inverse_cdf(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)))
            .clamp(0.0, 1.0)
    }
}

impl TransitionModel for TruncatedNormalTransition {
    fn sample(&self, theta_prev: f64, rng: &mut ChaCha8Rng) -> f64 {
        self.draw(theta_prev, rng)
    }

    fn density(&self, theta_prev: f64, theta: f64) -> f64 {
        if !(0.0..=1.0).contains(&theta) {
            return 0.0;
        }
        let mu = self.forgetting * theta_prev;
        // Up to the truncation constant.
        (-(theta - mu) * (theta - mu) / (2.0 * self.variance)).exp()
    }
}

/// Binomial likelihood theta^m (1-theta)^(n-m) for direct batches, with the
/// advisor-discounted exponents theta^(theta_a m) (1-theta)^(theta_a (n-m))
/// for third-party reports.
pub struct BinomialLikelihood;

impl LikelihoodModel for BinomialLikelihood {
    fn validate(&self, obs: &Observation) -> Result<()> {
        obs.validate()?;
        match obs {
            Observation::BinaryBatch { .. } | Observation::AdvisorReport { .. } => Ok(()),
            other => Err(Error::InvalidObservation(format!(
                "binomial likelihood cannot process a {} observation",
                other.kind()
            ))),
        }
    }

    fn log_likelihood(&self, theta: f64, obs: &Observation) -> f64 {
        let (succ, fail) = match obs {
            Observation::BinaryBatch { n, m } => (*m as f64, (*n - *m) as f64),
            Observation::AdvisorReport {
                advisor_trust,
                n,
                m,
            } => {
                let t = advisor_trust.value();
                (t * *m as f64, t * (*n - *m) as f64)
            }
            _ => return f64::NEG_INFINITY,
        };
        // 0 * ln(0) = 0 here: zero counts carry no information.
        let mut ll = 0.0;
        if succ > 0.0 {
            ll += succ * theta.ln();
        }
        if fail > 0.0 {
            ll += fail * (1.0 - theta).ln();
        }
        ll
    }
}

/// Resampling scheme for the resample step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResampleScheme {
    /// Single uniform offset, stratified cumulative traversal. Lower
    /// variance; guarantees floor(N * w) copies of each particle.
    #[default]
    Systematic,
    /// Plain multinomial draw, for literal fidelity to the textbook scheme.
    Multinomial,
}

/// Per-step filter configuration.
#[derive(Debug, Clone, Copy)]
pub struct StepConfig {
    pub scheme: ResampleScheme,
    /// Resample only when ESS/N falls below this fraction; `None` resamples
    /// every step.
    pub ess_threshold: Option<f64>,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            scheme: ResampleScheme::Systematic,
            ess_threshold: None,
        }
    }
}

/// Advance every particle by one transition draw; weights are unchanged.
pub fn predict(
    prior: &ParticleSet,
    trans: &dyn TransitionModel,
    seed: u64,
) -> Result<ParticleSet> {
    let particles = map_indexed(prior.particles(), |i, &p| {
        let mut rng = substream(seed, TAG_PREDICT, i as u64);
        trans.sample(p, &mut rng)
    });
    if let Some(bad) = particles.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::ContractViolation(format!(
            "transition produced out-of-bounds sample {bad}"
        )));
    }
    Ok(ParticleSet {
        particles,
        weights: prior.weights.clone(),
    })
}

/// Multiply weights by the observation likelihood and renormalize.
pub fn weight(
    pred: &ParticleSet,
    lik: &dyn LikelihoodModel,
    obs: &Observation,
) -> Result<ParticleSet> {
    lik.validate(obs)?;
    let log_liks = map_indexed(pred.particles(), |_, &p| lik.log_likelihood(p, obs));
    let max_ll = log_liks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_ll == f64::NEG_INFINITY {
        return Err(Error::DegenerateUpdate);
    }
    let mut weights: Vec<f64> = pred
        .weights
        .iter()
        .zip(&log_liks)
        .map(|(w, ll)| w * (ll - max_ll).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(Error::DegenerateUpdate);
    }
    for w in &mut weights {
        *w /= sum;
    }
    Ok(ParticleSet {
        particles: pred.particles.clone(),
        weights,
    })
}

/// Draw N particles with replacement proportional to weight; all weights
/// reset to 1/N.
pub fn resample(weighted: &ParticleSet, scheme: ResampleScheme, seed: u64) -> ParticleSet {
    let n = weighted.len();
    let mut rng = substream(seed, TAG_RESAMPLE, 0);
    let particles = match scheme {
        ResampleScheme::Systematic => {
            let offset: f64 = rng.random::<f64>() / n as f64;
            let mut out = Vec::with_capacity(n);
            let mut cum = 0.0;
            let mut i = 0usize;
            for j in 0..n {
                let target = offset + j as f64 / n as f64;
                while cum + weighted.weights[i] < target && i + 1 < n {
                    cum += weighted.weights[i];
                    i += 1;
                }
                out.push(weighted.particles[i]);
            }
            out
        }
        ResampleScheme::Multinomial => {
            let cumulative: Vec<f64> = weighted
                .weights
                .iter()
                .scan(0.0, |acc, w| {
                    *acc += w;
                    Some(*acc)
                })
                .collect();
            (0..n)
                .map(|_| {
                    let u: f64 = rng.random::<f64>();
                    let i = cumulative.partition_point(|c| *c < u).min(n - 1);
                    weighted.particles[i]
                })
                .collect()
        }
    };
    ParticleSet {
        particles,
        weights: vec![1.0 / n as f64; n],
    }
}

/// One full filtering step: predict, weight, resample.
pub fn step(
    prior: &ParticleSet,
    trans: &dyn TransitionModel,
    lik: &dyn LikelihoodModel,
    obs: &Observation,
    cfg: &StepConfig,
    seed: u64,
) -> Result<ParticleSet> {
    let predicted = predict(prior, trans, derive(seed, TAG_PREDICT, 0))?;
    let weighted = weight(&predicted, lik, obs)?;
    let do_resample = match cfg.ess_threshold {
        None => true,
        Some(frac) => weighted.effective_sample_size() < frac * weighted.len() as f64,
    };
    Ok(if do_resample {
        resample(&weighted, cfg.scheme, derive(seed, TAG_RESAMPLE, 0))
    } else {
        weighted
    })
}
