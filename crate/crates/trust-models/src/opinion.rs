//! Subjective-logic opinions and their Dirichlet evidence bridge.
//!
//! An opinion is a (belief, disbelief, ignorance) triplet summing to one,
//! carried together with its total evidence mass. The triplet alone does not
//! determine a unique Dirichlet distribution, so the evidence weight travels
//! with it; that makes the bijection to 3-category Dirichlet parameters, and
//! hence cumulative fusion, well defined. Category order is fixed as
//! (belief, ignorance, disbelief).

use crate::error::{Error, Result};
use crate::trust::{BetaParams, DirichletParams, TrustScalar, SIMPLEX_TOL};

/// Positivity floor for Dirichlet parameters built from opinions with zero
/// components.
pub const EVIDENCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opinion {
    pub belief: f64,
    pub disbelief: f64,
    pub ignorance: f64,
    /// Total Dirichlet evidence mass behind the triplet.
    pub evidence_weight: f64,
}

impl Opinion {
    pub fn new(belief: f64, disbelief: f64, ignorance: f64, evidence_weight: f64) -> Result<Self> {
        for (name, v) in [
            ("belief", belief),
            ("disbelief", disbelief),
            ("ignorance", ignorance),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "opinion {name} {v} outside [0,1]"
                )));
            }
        }
        let sum = belief + disbelief + ignorance;
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter(format!(
                "opinion triplet sums to {sum}, expected 1"
            )));
        }
        if !(evidence_weight > 0.0 && evidence_weight.is_finite()) {
            return Err(Error::InvalidParameter(
                "opinion evidence weight must be positive".into(),
            ));
        }
        Ok(Self {
            belief,
            disbelief,
            ignorance,
            evidence_weight,
        })
    }

    /// The vacuous opinion: total ignorance with unit evidence per category.
    pub fn vacuous() -> Self {
        Self {
            belief: 1.0 / 3.0,
            disbelief: 1.0 / 3.0,
            ignorance: 1.0 / 3.0,
            evidence_weight: 3.0,
        }
    }

    /// Map to 3-category Dirichlet evidence in (belief, ignorance, disbelief)
    /// order. Zero components are floored to keep the parameters positive.
    pub fn to_dirichlet(&self) -> DirichletParams {
        let scale = |x: f64| (self.evidence_weight * x).max(EVIDENCE_FLOOR);
        DirichletParams {
            alphas: vec![
                scale(self.belief),
                scale(self.ignorance),
                scale(self.disbelief),
            ],
            prior_alphas: vec![EVIDENCE_FLOOR; 3],
        }
    }

    /// Inverse of [`Opinion::to_dirichlet`]: normalize 3-category evidence
    /// back to a triplet and keep the total mass as the weight.
    pub fn from_dirichlet(params: &DirichletParams) -> Result<Self> {
        if params.categories() != 3 {
            return Err(Error::InvalidInput(format!(
                "opinion bridge needs 3 Dirichlet categories, got {}",
                params.categories()
            )));
        }
        let total: f64 = params.alphas.iter().sum();
        Ok(Self {
            belief: params.alphas[0] / total,
            ignorance: params.alphas[1] / total,
            disbelief: params.alphas[2] / total,
            evidence_weight: total,
        })
    }

    /// Cumulative fusion through the Dirichlet bridge: evidence vectors add.
    pub fn fuse(&self, other: &Opinion) -> Opinion {
        let a = self.to_dirichlet();
        let b = other.to_dirichlet();
        let alphas: Vec<f64> = a.alphas.iter().zip(&b.alphas).map(|(x, y)| x + y).collect();
        Opinion::from_dirichlet(&DirichletParams {
            alphas,
            prior_alphas: vec![EVIDENCE_FLOOR; 3],
        })
        .expect("3 categories by construction")
    }

    /// Fold in observed outcome counts in (belief, ignorance, disbelief)
    /// order via the conjugate Dirichlet update.
    pub fn observe_outcomes(&self, counts: &[u64; 3]) -> Opinion {
        let post = self
            .to_dirichlet()
            .observe_counts(counts)
            .expect("count vector has 3 categories");
        Opinion::from_dirichlet(&post).expect("3 categories by construction")
    }

    /// Scalar trust estimate: belief plus half the ignorance mass, treating
    /// ignorance as an intermediate state on the belief-disbelief scale.
    pub fn projected_trust(&self) -> TrustScalar {
        TrustScalar::new((self.belief + self.ignorance / 2.0).clamp(0.0, 1.0))
            .expect("clamped to [0,1]")
    }

    /// Variance of the projected trust under the bridged Dirichlet.
    pub fn projected_variance(&self) -> f64 {
        self.to_dirichlet().linear_variance(&[1.0, 0.5, 0.0])
    }

    /// Beta marginal of (belief vs rest) through the bridge, useful for
    /// decision-layer integration.
    pub fn to_beta_marginal(&self) -> BetaParams {
        let d = self.to_dirichlet();
        BetaParams {
            alpha: d.alphas[0] + d.alphas[1] / 2.0,
            beta: d.alphas[2] + d.alphas[1] / 2.0,
            prior_alpha: EVIDENCE_FLOOR,
            prior_beta: EVIDENCE_FLOOR,
        }
    }
}
