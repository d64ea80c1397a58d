use serde::{Deserialize, Serialize};

use super::ModelError;

/// Fixed prior parameters of the generative model.
///
/// Every Gamma prior is on a precision, parameterized by shape and rate.
/// An empty `q` stands for the all-zero vector of latent prior means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparameters {
    /// Prior precision of the covariate intercepts `alpha`.
    pub tau_alpha: f64,
    /// Prior precision of the base loadings `c`.
    pub tau_c: f64,
    /// Prior precision of the latent positions `z`.
    pub tau_q: f64,
    /// Prior precision of the feature intercepts `mu`.
    pub tau_mu: f64,
    /// Shape of the Gamma prior on the noise precision `tau_g`.
    pub a: f64,
    /// Rate of the Gamma prior on the noise precision `tau_g`.
    pub b: f64,
    /// Shape of the Gamma prior on the interaction precision `chi_pg`.
    pub a_beta: f64,
    /// Rate of the Gamma prior on the interaction precision `chi_pg`.
    pub b_beta: f64,
    /// Prior means of the latent positions; empty means all zeros.
    pub q: Vec<f64>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            tau_alpha: 1.0,
            tau_c: 1.0,
            tau_q: 1.0,
            tau_mu: 1.0,
            a: 2.0,
            b: 2.0,
            a_beta: 6.0,
            b_beta: 0.1,
            q: Vec::new(),
        }
    }
}

impl Hyperparameters {
    /// Checks that every scalar is strictly positive and finite, and that `q`
    /// is either empty or of length `n`.
    pub fn validate(&self, n: usize) -> Result<(), ModelError> {
        self.validate_scalars()?;
        if !self.q.is_empty() && self.q.len() != n {
            return Err(ModelError::DimensionMismatch {
                what: "latent prior means q",
                expected: n,
                found: self.q.len(),
            });
        }
        if let Some(v) = self.q.iter().find(|v| !v.is_finite()) {
            return Err(ModelError::InvalidHyperparameter {
                name: "q",
                value: *v,
            });
        }
        Ok(())
    }

    /// Checks the scalar fields only; used where `N` is not yet known.
    pub fn validate_scalars(&self) -> Result<(), ModelError> {
        for (name, value) in self.scalars() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidHyperparameter { name, value });
            }
        }
        Ok(())
    }

    fn scalars(&self) -> [(&'static str, f64); 8] {
        [
            ("tau_alpha", self.tau_alpha),
            ("tau_c", self.tau_c),
            ("tau_q", self.tau_q),
            ("tau_mu", self.tau_mu),
            ("a", self.a),
            ("b", self.b),
            ("a_beta", self.a_beta),
            ("b_beta", self.b_beta),
        ]
    }

    /// Prior mean of `z_i`.
    #[inline]
    pub fn q_at(&self, i: usize) -> f64 {
        if self.q.is_empty() {
            0.0
        } else {
            self.q[i]
        }
    }
}
