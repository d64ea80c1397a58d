use serde::{Deserialize, Serialize};

use super::FitError;
use crate::model::Hyperparameters;

/// How the latent positions are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    /// First principal-component scores of `Y`, scaled to unit variance.
    Pca,
    /// `z_i ~ N(q_i, 1 / tau_q)`.
    Random,
}

/// Loop control and priors for [`fit`](super::fit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Stop once the relative ELBO change between evaluations drops below this.
    pub elbo_rel_tolerance: f64,
    /// Evaluate the ELBO every this many sweeps.
    pub elbo_every: usize,
    pub seed: u64,
    pub init_strategy: InitStrategy,
    /// Width `k` of the `m +/- k s` interval used to call interactions.
    pub significance_multiplier: f64,
    pub hyper: Hyperparameters,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iterations: 500,
            elbo_rel_tolerance: 1e-6,
            elbo_every: 1,
            seed: 0,
            init_strategy: InitStrategy::Pca,
            significance_multiplier: 2.0,
            hyper: Hyperparameters::default(),
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), FitError> {
        if self.max_iterations == 0 {
            return Err(FitError::InvalidConfig("max_iterations must be at least 1"));
        }
        if self.elbo_every == 0 {
            return Err(FitError::InvalidConfig("elbo_every must be at least 1"));
        }
        if !(self.elbo_rel_tolerance > 0.0 && self.elbo_rel_tolerance.is_finite()) {
            return Err(FitError::InvalidConfig("elbo_rel_tolerance must be positive"));
        }
        if !(self.significance_multiplier > 0.0 && self.significance_multiplier.is_finite()) {
            return Err(FitError::InvalidConfig(
                "significance_multiplier must be positive",
            ));
        }
        self.hyper.validate_scalars()?;
        Ok(())
    }
}
