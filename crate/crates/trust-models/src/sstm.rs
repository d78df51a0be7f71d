//! State-space trust model: truncated-normal trust dynamics observed through
//! a neighbor-voting likelihood, plus the iterative particle filter (IPF)
//! that estimates every member of a peer committee in turn.

use crate::error::{Error, Result};
use crate::pf::{
    step, LikelihoodModel, ParticleSet, StepConfig, TruncatedNormalTransition,
};
use crate::rng::derive;
use crate::trust::{Observation, TrustScalar};

/// Model parameters for the state-space trust filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SstmConfig {
    /// Multiplicative decay of the trust state per step (the transition's
    /// forgetting factor). The empirical default is 0.85.
    pub forgetting: f64,
    /// Process noise variance Q of the truncated-normal transition.
    pub process_variance: f64,
    /// Sensitivity of the voting likelihood, in (0,1); smaller is sharper.
    pub sensitivity: f64,
    /// Maximum allowable reading difference for a neighbor to vote "trusted",
    /// in observation units.
    pub tolerance_r: f64,
    pub particle_count: usize,
    /// Maximum full sweeps of the iterative committee estimate.
    pub ipf_max_iter: usize,
    /// Convergence threshold on the largest per-member trust change across a
    /// sweep.
    pub ipf_epsilon: f64,
}

impl Default for SstmConfig {
    fn default() -> Self {
        Self {
            forgetting: 0.85,
            process_variance: 0.01,
            sensitivity: 0.2,
            tolerance_r: 1.0,
            particle_count: 500,
            ipf_max_iter: 20,
            ipf_epsilon: 1e-3,
        }
    }
}

impl SstmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.forgetting) {
            return Err(Error::InvalidParameter(format!(
                "forgetting {} outside [0,1]",
                self.forgetting
            )));
        }
        if !(self.process_variance > 0.0 && self.process_variance.is_finite()) {
            return Err(Error::InvalidParameter(
                "process variance must be positive".into(),
            ));
        }
        if !(self.sensitivity > 0.0 && self.sensitivity < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sensitivity {} outside (0,1)",
                self.sensitivity
            )));
        }
        if !(self.tolerance_r > 0.0 && self.tolerance_r.is_finite()) {
            return Err(Error::InvalidParameter(
                "tolerance r must be positive".into(),
            ));
        }
        if self.particle_count == 0 || self.ipf_max_iter == 0 {
            return Err(Error::InvalidParameter(
                "particle count and ipf_max_iter must be >= 1".into(),
            ));
        }
        if !(self.ipf_epsilon > 0.0) {
            return Err(Error::InvalidParameter(
                "ipf_epsilon must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn transition(&self) -> Result<TruncatedNormalTransition> {
        TruncatedNormalTransition::new(self.forgetting, self.process_variance)
    }
}

/// Trust estimates for an n+1 member committee; index 0 is the trustee.
#[derive(Debug, Clone, PartialEq)]
pub struct CommitteeState {
    pub trusts: Vec<TrustScalar>,
}

/// One exact draw from N(forgetting * theta_prev, Q) truncated to [0,1].
pub fn transition_sample(
    theta_prev: TrustScalar,
    cfg: &SstmConfig,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<TrustScalar> {
    let trans = cfg.transition()?;
    TrustScalar::new(trans.draw(theta_prev.value(), rng))
}

/// Indicator vote of a single neighbor: 1 iff its reading lies strictly
/// within `tolerance_r` of the trustor's own reading.
pub fn vote(own: f64, neighbor: f64, tolerance_r: f64) -> u8 {
    u8::from((neighbor - own).abs() < tolerance_r)
}

/// Averaged voting value over all neighbor peers.
pub fn voting_value(own: f64, neighbors: &[f64], tolerance_r: f64) -> Result<f64> {
    if neighbors.is_empty() {
        return Err(Error::InvalidObservation(
            "voting vector has no neighbors".into(),
        ));
    }
    let yes: u64 = neighbors
        .iter()
        .map(|y| u64::from(vote(own, *y, tolerance_r)))
        .sum();
    Ok(yes as f64 / neighbors.len() as f64)
}

/// Trust-weighted voting value. Returns `None` when the neighbors' total
/// trust is zero: the vote then carries no information and the caller should
/// treat the likelihood as constant rather than fail.
pub fn weighted_voting_value(
    own: f64,
    neighbors: &[f64],
    neighbor_trusts: &[TrustScalar],
    tolerance_r: f64,
) -> Result<Option<f64>> {
    if neighbors.is_empty() {
        return Err(Error::InvalidObservation(
            "voting vector has no neighbors".into(),
        ));
    }
    if neighbors.len() != neighbor_trusts.len() {
        return Err(Error::InvalidObservation(format!(
            "{} neighbor readings but {} neighbor trusts",
            neighbors.len(),
            neighbor_trusts.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (y, t) in neighbors.iter().zip(neighbor_trusts) {
        let t = t.value();
        num += t * f64::from(vote(own, *y, tolerance_r));
        den += t;
    }
    if den == 0.0 {
        Ok(None)
    } else {
        Ok(Some(num / den))
    }
}

/// exp(-|theta - V| / sensitivity); maximal (= 1) at theta = V.
pub fn voting_likelihood(theta: f64, voting: f64, sensitivity: f64) -> f64 {
    (-(theta - voting).abs() / sensitivity).exp()
}

/// [`LikelihoodModel`] wrapper around a precomputed voting value.
pub struct VotingLikelihood {
    pub voting: f64,
    pub sensitivity: f64,
}

impl LikelihoodModel for VotingLikelihood {
    fn validate(&self, obs: &Observation) -> Result<()> {
        match obs {
            Observation::VotingVector { neighbors, .. } if neighbors.is_empty() => Err(
                Error::InvalidObservation("voting vector has no neighbors".into()),
            ),
            Observation::VotingVector { .. } => Ok(()),
            other => Err(Error::InvalidObservation(format!(
                "voting likelihood cannot process a {} observation",
                other.kind()
            ))),
        }
    }

    fn log_likelihood(&self, theta: f64, _obs: &Observation) -> f64 {
        -(theta - self.voting).abs() / self.sensitivity
    }
}

/// One filtering step of the state-space model over a voting observation.
pub fn sstm_step(
    prior: &ParticleSet,
    own: f64,
    neighbors: &[f64],
    cfg: &SstmConfig,
    seed: u64,
) -> Result<ParticleSet> {
    cfg.validate()?;
    let voting = voting_value(own, neighbors, cfg.tolerance_r)?;
    let trans = cfg.transition()?;
    let lik = VotingLikelihood {
        voting,
        sensitivity: cfg.sensitivity,
    };
    let obs = Observation::VotingVector {
        own,
        neighbors: neighbors.to_vec(),
    };
    step(prior, &trans, &lik, &obs, &StepConfig::default(), seed)
}

const TAG_IPF: u64 = 0x6970_6600; // "ipf"

/// Iterative particle filter over a virtual committee (Gauss-Seidel sweeps).
///
/// `readings` holds one reading per committee member. Every member starts
/// fully trusted (all particles at 1). Each sweep treats members in turn as
/// the trustee, holds the others' trust estimates fixed, and advances the
/// member's particle set by one PF iteration against the trust-weighted
/// voting value of its peers. Members whose readings the committee rejects
/// therefore decay toward low trust sweep by sweep, while consistent members
/// settle near 1. Sweeping stops once the largest per-member trust change
/// falls below `ipf_epsilon`, or after `ipf_max_iter` sweeps.
pub fn ipf_estimate(readings: &[f64], cfg: &SstmConfig, seed: u64) -> Result<CommitteeState> {
    cfg.validate()?;
    let n = readings.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "committee needs >= 2 members, got {n}"
        )));
    }
    let trans = cfg.transition()?;
    let one = TrustScalar::new(1.0).expect("1 is a valid trust value");
    let mut trusts = vec![one; n];
    let mut clouds = vec![ParticleSet::uniform(vec![1.0; cfg.particle_count])?; n];

    for sweep in 0..cfg.ipf_max_iter {
        let mut max_delta = 0.0f64;
        for j in 0..n {
            let mut neigh_readings = Vec::with_capacity(n - 1);
            let mut neigh_trusts = Vec::with_capacity(n - 1);
            for i in 0..n {
                if i != j {
                    neigh_readings.push(readings[i]);
                    neigh_trusts.push(trusts[i]);
                }
            }
            let voting = match weighted_voting_value(
                readings[j],
                &neigh_readings,
                &neigh_trusts,
                cfg.tolerance_r,
            )? {
                // Zero total neighbor trust: no information, skip the update.
                None => continue,
                Some(v) => v,
            };
            let lik = VotingLikelihood {
                voting,
                sensitivity: cfg.sensitivity,
            };
            let obs = Observation::VotingVector {
                own: readings[j],
                neighbors: neigh_readings,
            };
            let member_seed = derive(seed, TAG_IPF, (sweep * n + j) as u64);
            clouds[j] = step(
                &clouds[j],
                &trans,
                &lik,
                &obs,
                &StepConfig::default(),
                member_seed,
            )?;
            let updated = TrustScalar::new(clouds[j].mean())?;
            max_delta = max_delta.max((updated.value() - trusts[j].value()).abs());
            trusts[j] = updated;
        }
        if max_delta < cfg.ipf_epsilon {
            break;
        }
    }
    Ok(CommitteeState { trusts })
}
