//! Covariate latent variable models.
//!
//! A one-dimensional factor model whose loadings are perturbed by external
//! covariates:
//!
//! ```text
//! y_ig = mu_g + sum_p alpha_pg x_ip + (c_g + sum_p beta_pg x_ip) z_i + eps_ig
//! ```
//!
//! The latent trajectory `z` and the trajectory-by-covariate interactions
//! `beta` are inferred with coordinate-ascent mean-field variational
//! inference ([`cavi`]). Interactions whose posterior interval excludes zero
//! are reported by [`interactions`].
//!
//! ```
//! use clvm::cavi::{fit, FitConfig};
//! use clvm::model::{sample_generative, Dataset, GenerativeOverrides, Hyperparameters};
//! use nalgebra::DMatrix;
//!
//! let x = DMatrix::from_fn(60, 1, |i, _| (i % 2) as f64);
//! let draw = sample_generative(&x, 10, &Hyperparameters::default(), 1,
//!                              &GenerativeOverrides::default()).unwrap();
//! let data = Dataset::unlabeled(draw.y, x).unwrap().center_columns();
//! let result = fit(&data, &FitConfig::default()).unwrap();
//! assert_eq!(result.state.z_mean.len(), 60);
//! ```

pub mod cavi;
pub mod interactions;
pub mod io;
pub mod kernel;
pub mod model;

pub use cavi::{fit, FitConfig, FitError, FitResult};
pub use model::{Dataset, Hyperparameters, VariationalState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/interactions.md")]
    mod interactions {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
