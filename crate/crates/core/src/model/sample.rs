//! Forward sampling from the covariate latent variable model.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`).
//! Parameters are drawn in the fixed order
//! `chi -> tau -> beta -> mu -> alpha -> c -> z -> noise`, and matrices are
//! filled row-major (`chi` and `beta` over `(p, g)`, the noise over `(i, g)`).
//! An overridden parameter consumes no draws.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::{Hyperparameters, ModelError};

/// One realization of every parameter and the data it generates.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeDraw {
    pub y: DMatrix<f64>,
    pub true_z: DVector<f64>,
    pub true_mu: DVector<f64>,
    pub true_c: DVector<f64>,
    pub true_alpha: DMatrix<f64>,
    pub true_beta: DMatrix<f64>,
    pub true_chi: DMatrix<f64>,
    pub true_tau: DVector<f64>,
}

/// Parameter values to fix instead of sampling.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenerativeOverrides {
    pub z: Option<DVector<f64>>,
    pub mu: Option<DVector<f64>>,
    pub c: Option<DVector<f64>>,
    pub alpha: Option<DMatrix<f64>>,
    pub beta: Option<DMatrix<f64>>,
    pub chi: Option<DMatrix<f64>>,
    pub tau: Option<DVector<f64>>,
}

impl GenerativeOverrides {
    /// Every signal parameter fixed at zero; only `tau` and the noise are drawn.
    pub fn zero_signal(n: usize, g: usize, p: usize) -> Self {
        GenerativeOverrides {
            z: Some(DVector::zeros(n)),
            mu: Some(DVector::zeros(g)),
            c: Some(DVector::zeros(g)),
            alpha: Some(DMatrix::zeros(p, g)),
            beta: Some(DMatrix::zeros(p, g)),
            chi: None,
            tau: None,
        }
    }

    fn check(&self, n: usize, g: usize, p: usize) -> Result<(), ModelError> {
        let vectors = [
            ("z", &self.z, n),
            ("mu", &self.mu, g),
            ("c", &self.c, g),
            ("tau", &self.tau, g),
        ];
        for (name, v, len) in vectors {
            if let Some(v) = v {
                if v.len() != len {
                    return Err(ModelError::InvalidOverride {
                        name,
                        expected: (len, 1),
                        found: (v.len(), 1),
                    });
                }
            }
        }
        for (name, m) in [("alpha", &self.alpha), ("beta", &self.beta), ("chi", &self.chi)] {
            if let Some(m) = m {
                if m.shape() != (p, g) {
                    return Err(ModelError::InvalidOverride {
                        name,
                        expected: (p, g),
                        found: m.shape(),
                    });
                }
            }
        }
        if let Some(tau) = &self.tau {
            if tau.iter().any(|t| !(*t > 0.0)) {
                return Err(ModelError::NonPositivePrecision("tau override"));
            }
        }
        if let Some(chi) = &self.chi {
            if chi.iter().any(|t| !(*t > 0.0)) {
                return Err(ModelError::NonPositivePrecision("chi override"));
            }
        }
        Ok(())
    }
}

/// Draws parameters and data for covariates `x` (`N x P`) and `g` features.
pub fn sample_generative(
    x: &DMatrix<f64>,
    g: usize,
    hyper: &Hyperparameters,
    seed: u64,
    overrides: &GenerativeOverrides,
) -> Result<GenerativeDraw, ModelError> {
    let n = x.nrows();
    let p = x.ncols();
    hyper.validate(n)?;
    overrides.check(n, g, p)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let true_chi = match &overrides.chi {
        Some(chi) => chi.clone(),
        None => {
            let dist = gamma(hyper.a_beta, hyper.b_beta);
            row_major(p, g, || dist.sample(&mut rng))
        }
    };
    let true_tau = match &overrides.tau {
        Some(tau) => tau.clone(),
        None => {
            let dist = gamma(hyper.a, hyper.b);
            DVector::from_fn(g, |_, _| dist.sample(&mut rng))
        }
    };
    let true_beta = match &overrides.beta {
        Some(beta) => beta.clone(),
        None => {
            let mut beta = DMatrix::zeros(p, g);
            for k in 0..p {
                for j in 0..g {
                    beta[(k, j)] = normal(&mut rng) / true_chi[(k, j)].sqrt();
                }
            }
            beta
        }
    };
    let true_mu = overrides
        .mu
        .clone()
        .unwrap_or_else(|| DVector::from_fn(g, |_, _| normal(&mut rng) / hyper.tau_mu.sqrt()));
    let true_alpha = overrides
        .alpha
        .clone()
        .unwrap_or_else(|| row_major(p, g, || normal(&mut rng) / hyper.tau_alpha.sqrt()));
    let true_c = overrides
        .c
        .clone()
        .unwrap_or_else(|| DVector::from_fn(g, |_, _| normal(&mut rng) / hyper.tau_c.sqrt()));
    let true_z = overrides.z.clone().unwrap_or_else(|| {
        DVector::from_fn(n, |i, _| hyper.q_at(i) + normal(&mut rng) / hyper.tau_q.sqrt())
    });

    let mut y = DMatrix::zeros(n, g);
    for i in 0..n {
        for j in 0..g {
            let mut loading = true_c[j];
            let mut intercept = true_mu[j];
            for k in 0..p {
                loading += true_beta[(k, j)] * x[(i, k)];
                intercept += true_alpha[(k, j)] * x[(i, k)];
            }
            let noise = normal(&mut rng) / true_tau[j].sqrt();
            y[(i, j)] = intercept + loading * true_z[i] + noise;
        }
    }

    Ok(GenerativeDraw {
        y,
        true_z,
        true_mu,
        true_c,
        true_alpha,
        true_beta,
        true_chi,
        true_tau,
    })
}

fn gamma(shape: f64, rate: f64) -> Gamma<f64> {
    Gamma::new(shape, 1.0 / rate).expect("validated shape and rate")
}

fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn row_major(rows: usize, cols: usize, mut f: impl FnMut() -> f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = f();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_x(n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, 1, |i, _| (i % 2) as f64)
    }

    #[test]
    fn same_seed_same_draw() {
        let x = binary_x(6);
        let h = Hyperparameters::default();
        let o = GenerativeOverrides::default();
        let a = sample_generative(&x, 3, &h, 7, &o).unwrap();
        let b = sample_generative(&x, 3, &h, 7, &o).unwrap();
        assert_eq!(a, b);
        let c = sample_generative(&x, 3, &h, 8, &o).unwrap();
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn zero_signal_is_pure_noise() {
        let n = 20_000;
        let x = binary_x(n);
        let mut o = GenerativeOverrides::zero_signal(n, 2, 1);
        o.tau = Some(DVector::from_vec(vec![4.0, 0.25]));
        let d = sample_generative(&x, 2, &Hyperparameters::default(), 1, &o).unwrap();
        for (j, expected) in [0.25, 4.0].into_iter().enumerate() {
            let col = d.y.column(j);
            let var = col.norm_squared() / n as f64;
            // standard error of a variance estimate is about var * sqrt(2/n)
            assert!((var - expected).abs() < 5.0 * expected * (2.0 / n as f64).sqrt());
        }
    }

    #[test]
    fn zero_latent_removes_loading_dependence() {
        let n = 8;
        let x = binary_x(n);
        let h = Hyperparameters::default();
        let mut o = GenerativeOverrides {
            z: Some(DVector::zeros(n)),
            c: Some(DVector::from_element(2, 3.0)),
            beta: Some(DMatrix::from_element(1, 2, -5.0)),
            ..Default::default()
        };
        let a = sample_generative(&x, 2, &h, 3, &o).unwrap();
        o.c = Some(DVector::from_element(2, -1.0));
        o.beta = Some(DMatrix::from_element(1, 2, 9.0));
        let b = sample_generative(&x, 2, &h, 3, &o).unwrap();
        assert_eq!(a.y, b.y);
    }

    #[test]
    fn wrong_override_shape() {
        let x = binary_x(4);
        let o = GenerativeOverrides {
            beta: Some(DMatrix::zeros(2, 3)),
            ..Default::default()
        };
        let err = sample_generative(&x, 3, &Hyperparameters::default(), 0, &o).unwrap_err();
        assert!(matches!(err, ModelError::InvalidOverride { name: "beta", .. }));
    }
}
