//! Expected-utility decision layer: integrate a utility function against a
//! trust posterior and pick the action that maximizes it.

use crate::error::{Error, Result};
use crate::pf::ParticleSet;
use crate::quad::{beta_expectation, dirichlet_expectation};
use crate::trust::{BetaParams, DirichletParams};

/// A trust posterior in any of the representations this crate produces.
#[derive(Debug, Clone)]
pub enum Posterior {
    Beta(BetaParams),
    Dirichlet(DirichletParams),
    Particles(ParticleSet),
}

/// A utility function over the posterior's support.
pub enum Utility {
    /// Utility of a scalar trust value, for Beta or particle posteriors.
    Scalar(Box<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Utility of a trust simplex point, for Dirichlet posteriors.
    Simplex(Box<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Utility {
    pub fn scalar<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Utility::Scalar(Box::new(f))
    }

    pub fn simplex<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Utility::Simplex(Box::new(f))
    }
}

/// Expected utility of `u` under the posterior.
///
/// Conjugate posteriors are integrated by fixed-node Gaussian quadrature
/// (>= 256 nodes, exact for affine utilities); particle posteriors by the
/// weighted sample average.
pub fn expected_utility(posterior: &Posterior, u: &Utility) -> Result<f64> {
    match (posterior, u) {
        (Posterior::Beta(p), Utility::Scalar(f)) => beta_expectation(p.alpha, p.beta, f),
        (Posterior::Dirichlet(p), Utility::Simplex(f)) => dirichlet_expectation(&p.alphas, f),
        (Posterior::Particles(ps), Utility::Scalar(f)) => {
            let mut acc = 0.0;
            for (theta, w) in ps.particles().iter().zip(ps.weights()) {
                let v = f(*theta);
                if !v.is_finite() {
                    return Err(Error::NonFiniteUtility);
                }
                acc += w * v;
            }
            Ok(acc)
        }
        (Posterior::Beta(_) | Posterior::Particles(_), Utility::Simplex(_)) => Err(
            Error::InvalidInput("simplex utility applied to a scalar posterior".into()),
        ),
        (Posterior::Dirichlet(_), Utility::Scalar(_)) => Err(Error::InvalidInput(
            "scalar utility applied to a Dirichlet posterior".into(),
        )),
    }
}

/// Index of the candidate maximizing expected utility; ties break to the
/// lowest index.
pub fn choose_action(candidates: &[(Posterior, Utility)]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidate actions".into()));
    }
    let mut best = 0usize;
    let mut best_eu = f64::NEG_INFINITY;
    for (i, (posterior, u)) in candidates.iter().enumerate() {
        let eu = expected_utility(posterior, u)?;
        if eu > best_eu {
            best = i;
            best_eu = eu;
        }
    }
    Ok(best)
}
