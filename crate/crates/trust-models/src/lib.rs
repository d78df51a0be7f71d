//! Bayesian trust inference for multi-agent systems.
//!
//! The crate models trust as a latent quantity estimated by sequential
//! Bayesian filtering, and provides:
//!
//! - [`trust`]: conjugate Beta/Dirichlet reputation models with advisor
//!   discounting and exponential forgetting;
//! - [`pf`]: a bootstrap particle filter for non-conjugate trust dynamics;
//! - [`sstm`]: a state-space voting trust model for sensor committees, with
//!   iterative committee-wide estimation;
//! - [`opinion`]: subjective-logic opinion triplets bridged to Dirichlet
//!   evidence;
//! - [`decision`]: an expected-utility decision layer over any posterior;
//! - [`sim`]: a deterministic agent-network simulator;
//! - [`trace`]: a lossless text format for interaction traces.
//!
//! All stochastic components draw from seed-keyed substreams
//! ([`rng::substream`]), so results are reproducible bit-for-bit across runs
//! and across the parallel/sequential execution paths (the `parallel`
//! feature, enabled by default, uses rayon for per-particle work).

pub mod decision;
pub mod error;
pub mod exec;
pub mod opinion;
pub mod pf;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod sstm;
pub mod trace;
pub mod trust;

pub use decision::{choose_action, expected_utility, Posterior, Utility};
pub use error::{Error, Result};
pub use opinion::Opinion;
pub use pf::{
    BinomialLikelihood, LikelihoodModel, ParticleSet, ResampleScheme, StaticTransition,
    StepConfig, TransitionModel, TruncatedNormalTransition,
};
pub use sim::{AdvisorSpec, BehaviorProfile, Interaction, Schedule};
pub use sstm::{CommitteeState, SstmConfig};
pub use trace::{Trace, TraceHeader, TraceRecord};
pub use trust::{BetaParams, DirichletParams, Observation, TrustScalar, TrustSimplex};
