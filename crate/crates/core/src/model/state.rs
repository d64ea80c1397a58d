use nalgebra::{DMatrix, DVector};

use super::ModelError;

/// Moments of the mean-field posterior.
///
/// Gaussian factors are stored as (mean, variance); Gamma factors as
/// (shape, rate). `P x G` matrices are indexed `(p, g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub z_mean: DVector<f64>,
    pub z_var: DVector<f64>,
    pub mu_mean: DVector<f64>,
    pub mu_var: DVector<f64>,
    pub c_mean: DVector<f64>,
    pub c_var: DVector<f64>,
    pub alpha_mean: DMatrix<f64>,
    pub alpha_var: DMatrix<f64>,
    pub beta_mean: DMatrix<f64>,
    pub beta_var: DMatrix<f64>,
    pub chi_shape: DMatrix<f64>,
    pub chi_rate: DMatrix<f64>,
    pub tau_shape: DVector<f64>,
    pub tau_rate: DVector<f64>,
}

impl VariationalState {
    /// A state of the right shape with unit variances and unit Gamma factors.
    pub fn unit(n: usize, g: usize, p: usize) -> Self {
        VariationalState {
            z_mean: DVector::zeros(n),
            z_var: DVector::from_element(n, 1.0),
            mu_mean: DVector::zeros(g),
            mu_var: DVector::from_element(g, 1.0),
            c_mean: DVector::zeros(g),
            c_var: DVector::from_element(g, 1.0),
            alpha_mean: DMatrix::zeros(p, g),
            alpha_var: DMatrix::from_element(p, g, 1.0),
            beta_mean: DMatrix::zeros(p, g),
            beta_var: DMatrix::from_element(p, g, 1.0),
            chi_shape: DMatrix::from_element(p, g, 1.0),
            chi_rate: DMatrix::from_element(p, g, 1.0),
            tau_shape: DVector::from_element(g, 1.0),
            tau_rate: DVector::from_element(g, 1.0),
        }
    }

    pub fn n(&self) -> usize {
        self.z_mean.len()
    }

    pub fn g(&self) -> usize {
        self.mu_mean.len()
    }

    pub fn p(&self) -> usize {
        self.alpha_mean.nrows()
    }

    /// Posterior mean of the noise precision `tau_g`.
    #[inline]
    pub fn tau_expect(&self, g: usize) -> f64 {
        self.tau_shape[g] / self.tau_rate[g]
    }

    /// Posterior mean of the interaction precision `chi_pg`.
    #[inline]
    pub fn chi_expect(&self, p: usize, g: usize) -> f64 {
        self.chi_shape[(p, g)] / self.chi_rate[(p, g)]
    }

    /// `E[z_i^2]`.
    #[inline]
    pub fn z_second_moment(&self, i: usize) -> f64 {
        self.z_mean[i] * self.z_mean[i] + self.z_var[i]
    }

    /// Checks dimensions against `(n, g, p)` and positivity of every
    /// variance, shape and rate.
    pub fn validate(&self, n: usize, g: usize, p: usize) -> Result<(), ModelError> {
        let vectors = [
            ("z", &self.z_mean, &self.z_var, n),
            ("mu", &self.mu_mean, &self.mu_var, g),
            ("c", &self.c_mean, &self.c_var, g),
            ("tau", &self.tau_shape, &self.tau_rate, g),
        ];
        for (what, a, b, len) in vectors {
            for v in [a, b] {
                if v.len() != len {
                    return Err(ModelError::DimensionMismatch {
                        what,
                        expected: len,
                        found: v.len(),
                    });
                }
            }
        }
        let matrices = [
            ("alpha", &self.alpha_mean, &self.alpha_var),
            ("beta", &self.beta_mean, &self.beta_var),
            ("chi", &self.chi_shape, &self.chi_rate),
        ];
        for (what, a, b) in matrices {
            for m in [a, b] {
                if m.shape() != (p, g) {
                    return Err(ModelError::DimensionMismatch {
                        what,
                        expected: p * g,
                        found: m.len(),
                    });
                }
            }
        }
        let positive: [(&'static str, &[f64]); 9] = [
            ("z_var", self.z_var.as_slice()),
            ("mu_var", self.mu_var.as_slice()),
            ("c_var", self.c_var.as_slice()),
            ("alpha_var", self.alpha_var.as_slice()),
            ("beta_var", self.beta_var.as_slice()),
            ("chi_shape", self.chi_shape.as_slice()),
            ("chi_rate", self.chi_rate.as_slice()),
            ("tau_shape", self.tau_shape.as_slice()),
            ("tau_rate", self.tau_rate.as_slice()),
        ];
        for (name, values) in positive {
            if let Some(&value) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(ModelError::InvalidState { name, value });
            }
        }
        Ok(())
    }
}
