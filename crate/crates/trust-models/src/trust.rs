//! Core trust domain types and exact conjugate inference.
//!
//! Trust is a probability: a scalar in [0,1] for binary-outcome models, or a
//! point on the simplex for multi-outcome models. Evidence accumulates in
//! conjugate Beta / Dirichlet parameters, which keep their base prior
//! alongside the counts so that forgetting and reset stay well defined.

use rand::Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::opinion::Opinion;

pub const SIMPLEX_TOL: f64 = 1e-9;

/// A scalar trust value in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TrustScalar(f64);

impl TrustScalar {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "trust value {value} outside [0,1]"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<TrustScalar> for f64 {
    fn from(t: TrustScalar) -> f64 {
        t.0
    }
}

/// A probability vector over b >= 2 outcome types.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustSimplex(Vec<f64>);

impl TrustSimplex {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(
                "trust simplex needs at least 2 components".into(),
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter(
                "trust simplex components must lie in [0,1]".into(),
            ));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter(format!(
                "trust simplex components sum to {sum}, expected 1"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One unit of interaction evidence.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    /// n binary trials with m successes.
    BinaryBatch { n: u64, m: u64 },
    /// Per-outcome-type counts of a multinomial batch.
    CategoricalBatch { counts: Vec<u64> },
    /// A third-party report of (n, m), discounted by the advisor's own trust.
    AdvisorReport {
        advisor_trust: TrustScalar,
        n: u64,
        m: u64,
    },
    /// The trustor's own reading plus the readings of the trustee's
    /// neighbor peers.
    VotingVector { own: f64, neighbors: Vec<f64> },
    /// A subjective-logic opinion supplied as evidence.
    OpinionReport { opinion: Opinion },
}

impl Observation {
    pub fn validate(&self) -> Result<()> {
        match self {
            Observation::BinaryBatch { n, m } | Observation::AdvisorReport { n, m, .. } => {
                if m > n {
                    Err(Error::InvalidObservation(format!(
                        "success count {m} exceeds trial count {n}"
                    )))
                } else {
                    Ok(())
                }
            }
            Observation::VotingVector { own, neighbors } => {
                if !own.is_finite() || neighbors.iter().any(|y| !y.is_finite()) {
                    Err(Error::InvalidObservation("non-finite reading".into()))
                } else {
                    Ok(())
                }
            }
            Observation::CategoricalBatch { .. } | Observation::OpinionReport { .. } => Ok(()),
        }
    }

    /// Short stable name of the observation kind, used in trace files and
    /// error messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Observation::BinaryBatch { .. } => "binary",
            Observation::CategoricalBatch { .. } => "categorical",
            Observation::AdvisorReport { .. } => "advisor",
            Observation::VotingVector { .. } => "voting",
            Observation::OpinionReport { .. } => "opinion",
        }
    }
}

/// Beta evidence state: accumulated pseudo-counts plus the base prior they
/// started from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
}

impl BetaParams {
    /// Fresh state at the given base prior.
    pub fn new(prior_alpha: f64, prior_beta: f64) -> Result<Self> {
        if prior_alpha > 0.0 && prior_beta > 0.0 {
            Ok(Self {
                alpha: prior_alpha,
                beta: prior_beta,
                prior_alpha,
                prior_beta,
            })
        } else {
            Err(Error::InvalidParameter(
                "Beta prior parameters must be positive".into(),
            ))
        }
    }

    /// Conjugate update for a batch of n binary trials with m successes:
    /// alpha += m, beta += n - m.
    pub fn observe_batch(&self, n: u64, m: u64) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidObservation(format!(
                "success count {m} exceeds trial count {n}"
            )));
        }
        Ok(Self {
            alpha: self.alpha + m as f64,
            beta: self.beta + (n - m) as f64,
            ..*self
        })
    }

    /// Advisor-discounted update: the report's counts enter scaled by the
    /// trustor's trust in the advisor, alpha += theta_a * m,
    /// beta += theta_a * (n - m).
    pub fn observe_advisor(&self, advisor_trust: TrustScalar, n: u64, m: u64) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidObservation(format!(
                "success count {m} exceeds trial count {n}"
            )));
        }
        let t = advisor_trust.value();
        Ok(Self {
            alpha: self.alpha + t * m as f64,
            beta: self.beta + t * (n - m) as f64,
            ..*self
        })
    }

    /// Shrink accumulated evidence toward the base prior by factor `lambda`.
    /// lambda = 1 keeps everything, lambda = 0 resets to the prior.
    pub fn discount(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "forgetting factor {lambda} outside [0,1]"
            )));
        }
        Ok(Self {
            alpha: self.prior_alpha + lambda * (self.alpha - self.prior_alpha),
            beta: self.prior_beta + lambda * (self.beta - self.prior_beta),
            ..*self
        })
    }

    pub fn mean(&self) -> TrustScalar {
        TrustScalar(self.alpha / (self.alpha + self.beta))
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    /// Draw one trust value from this Beta distribution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rand_distr::Beta::new(self.alpha, self.beta)
            .expect("positive Beta parameters")
            .sample(rng)
    }
}

/// Dirichlet evidence state over b >= 2 outcome types.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    pub alphas: Vec<f64>,
    pub prior_alphas: Vec<f64>,
}

impl DirichletParams {
    pub fn new(prior_alphas: Vec<f64>) -> Result<Self> {
        if prior_alphas.len() < 2 {
            return Err(Error::InvalidParameter(
                "Dirichlet needs at least 2 categories".into(),
            ));
        }
        if prior_alphas.iter().any(|a| *a <= 0.0 || !a.is_finite()) {
            return Err(Error::InvalidParameter(
                "Dirichlet prior parameters must be positive".into(),
            ));
        }
        Ok(Self {
            alphas: prior_alphas.clone(),
            prior_alphas,
        })
    }

    pub fn categories(&self) -> usize {
        self.alphas.len()
    }

    /// Conjugate update: alphas[i] += counts[i].
    pub fn observe_counts(&self, counts: &[u64]) -> Result<Self> {
        if counts.len() != self.alphas.len() {
            return Err(Error::InvalidObservation(format!(
                "got {} outcome counts for {} categories",
                counts.len(),
                self.alphas.len()
            )));
        }
        let alphas = self
            .alphas
            .iter()
            .zip(counts)
            .map(|(a, c)| a + *c as f64)
            .collect();
        Ok(Self {
            alphas,
            prior_alphas: self.prior_alphas.clone(),
        })
    }

    /// Shrink accumulated evidence toward the base prior by factor `lambda`.
    pub fn discount(&self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "forgetting factor {lambda} outside [0,1]"
            )));
        }
        let alphas = self
            .alphas
            .iter()
            .zip(&self.prior_alphas)
            .map(|(a, p)| p + lambda * (a - p))
            .collect();
        Ok(Self {
            alphas,
            prior_alphas: self.prior_alphas.clone(),
        })
    }

    pub fn mean(&self) -> TrustSimplex {
        let total: f64 = self.alphas.iter().sum();
        TrustSimplex(self.alphas.iter().map(|a| a / total).collect())
    }

    /// Variance of the i-th component.
    pub fn component_variance(&self, i: usize) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        let p = self.alphas[i] / total;
        p * (1.0 - p) / (total + 1.0)
    }

    /// Variance of a linear functional `sum_i coeff[i] * theta_i`.
    pub fn linear_variance(&self, coeff: &[f64]) -> f64 {
        let total: f64 = self.alphas.iter().sum();
        let mut var = 0.0;
        for (i, ci) in coeff.iter().enumerate() {
            let pi = self.alphas[i] / total;
            for (j, cj) in coeff.iter().enumerate() {
                let pj = self.alphas[j] / total;
                let cov = if i == j {
                    pi * (1.0 - pi) / (total + 1.0)
                } else {
                    -pi * pj / (total + 1.0)
                };
                var += ci * cj * cov;
            }
        }
        var
    }
}
