use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{FitConfig, FitError, InitStrategy};
use crate::model::{Dataset, VariationalState};

/// First principal component of a column-centered matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponent {
    /// Projection of each row onto the leading axis.
    pub scores: DVector<f64>,
    /// Unit-norm leading axis in column space.
    pub loadings: DVector<f64>,
}

/// Leading principal component of `y`, or `None` when `y` is all zeros.
///
/// Works on whichever Gram matrix (`Y^T Y` or `Y Y^T`) is smaller. The sign
/// is fixed so that the loading of largest magnitude is positive.
pub fn first_principal_component(y: &DMatrix<f64>) -> Option<PrincipalComponent> {
    if y.iter().all(|&v| v == 0.0) {
        return None;
    }
    let (n, g) = y.shape();
    let (mut scores, mut loadings) = if g <= n {
        let v = leading_eigenvector(y.transpose() * y);
        (y * &v, v)
    } else {
        let u = leading_eigenvector(y * y.transpose());
        let mut v = y.transpose() * u;
        let norm = v.norm();
        v /= norm;
        (y * &v, v)
    };
    let pivot = loadings.iamax();
    if loadings[pivot] < 0.0 {
        loadings.neg_mut();
        scores.neg_mut();
    }
    Some(PrincipalComponent { scores, loadings })
}

fn leading_eigenvector(gram: DMatrix<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.imax();
    eig.eigenvectors.column(top).into_owned()
}

fn unit_variance(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() as f64;
    let mean = v.mean();
    let centered = v.add_scalar(-mean);
    let sd = (centered.norm_squared() / (n - 1.0)).sqrt();
    if sd > 0.0 {
        v / sd
    } else {
        v.clone()
    }
}

/// Starting point for the coordinate ascent.
///
/// Latent means come from PCA or a prior draw; every other mean is zero,
/// Gaussian variances equal the prior variances and Gamma factors equal
/// their priors.
pub fn initialize_state(data: &Dataset, config: &FitConfig) -> Result<VariationalState, FitError> {
    let h = &config.hyper;
    let (n, g, p) = (data.n(), data.g(), data.p());
    h.validate(n)?;
    let z_mean = match config.init_strategy {
        InitStrategy::Pca => {
            let pc = first_principal_component(data.y()).ok_or(FitError::DegenerateData)?;
            unit_variance(&pc.scores)
        }
        InitStrategy::Random => {
            let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
            let sd = 1.0 / h.tau_q.sqrt();
            DVector::from_fn(n, |i, _| h.q_at(i) + sd * rng.sample::<f64, _>(StandardNormal))
        }
    };
    Ok(VariationalState {
        z_mean,
        z_var: DVector::from_element(n, 1.0 / h.tau_q),
        mu_mean: DVector::zeros(g),
        mu_var: DVector::from_element(g, 1.0 / h.tau_mu),
        c_mean: DVector::zeros(g),
        c_var: DVector::from_element(g, 1.0 / h.tau_c),
        alpha_mean: DMatrix::zeros(p, g),
        alpha_var: DMatrix::from_element(p, g, 1.0 / h.tau_alpha),
        beta_mean: DMatrix::zeros(p, g),
        beta_var: DMatrix::from_element(p, g, h.b_beta / h.a_beta),
        chi_shape: DMatrix::from_element(p, g, h.a_beta),
        chi_rate: DMatrix::from_element(p, g, h.b_beta),
        tau_shape: DVector::from_element(g, h.a),
        tau_rate: DVector::from_element(g, h.b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let a = a.add_scalar(-a.mean());
        let b = b.add_scalar(-b.mean());
        a.dot(&b) / (a.norm() * b.norm())
    }

    #[test]
    fn rank_one_recovers_row_factor() {
        let u = DVector::from_vec(vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        for g in [3usize, 8] {
            let v = DVector::from_fn(g, |j, _| 1.0 + j as f64 * 0.5);
            let y = &u * v.transpose();
            let data = Dataset::unlabeled(y, DMatrix::zeros(5, 0)).unwrap();
            let s = initialize_state(&data, &FitConfig::default()).unwrap();
            assert!((pearson(&s.z_mean, &u).abs() - 1.0).abs() < 1e-12);
            let var = s.z_mean.add_scalar(-s.z_mean.mean()).norm_squared() / 4.0;
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_init_is_deterministic() {
        let y = DMatrix::from_fn(6, 2, |i, j| (i * j) as f64);
        let data = Dataset::unlabeled(y, DMatrix::zeros(6, 0)).unwrap();
        let cfg = FitConfig {
            init_strategy: InitStrategy::Random,
            seed: 11,
            ..Default::default()
        };
        let a = initialize_state(&data, &cfg).unwrap();
        let b = initialize_state(&data, &cfg).unwrap();
        assert_eq!(a, b);
        a.validate(6, 2, 0).unwrap();
    }

    #[test]
    fn all_zero_data_is_degenerate() {
        let data = Dataset::unlabeled(DMatrix::zeros(4, 3), DMatrix::zeros(4, 1)).unwrap();
        let err = initialize_state(&data, &FitConfig::default()).unwrap_err();
        assert!(matches!(err, FitError::DegenerateData));
    }

    #[test]
    fn prior_matched_factors() {
        let y = DMatrix::from_fn(4, 2, |i, j| (i as f64 - 1.5) * (j as f64 + 1.0));
        let data = Dataset::unlabeled(y, DMatrix::zeros(4, 1)).unwrap();
        let s = initialize_state(&data, &FitConfig::default()).unwrap();
        assert_eq!(s.chi_shape[(0, 1)], 6.0);
        assert_eq!(s.chi_rate[(0, 1)], 0.1);
        assert_eq!(s.tau_shape[0], 2.0);
        assert_eq!(s.c_mean[1], 0.0);
    }
}
