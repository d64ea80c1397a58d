//! Coordinate-ascent mean-field variational inference.
//!
//! The posterior is approximated by a fully factorized family: Gaussian
//! factors for `z_i`, `mu_g`, `c_g`, `alpha_pg` and `beta_pg`, Gamma factors
//! for the precisions `tau_g` and `chi_pg`. A sweep updates the feature block
//! (`mu`, `alpha`, `c`, `beta` per feature), then the latent positions, then
//! the noise precisions, then the interaction precisions.

mod config;
mod elbo;
mod fit;
mod init;
pub mod updates;

pub use config::{FitConfig, InitStrategy};
pub use elbo::{compute_elbo, elbo_terms, ElboTerms};
pub use fit::{check_convergence, fit, orient_to_first_pc, FitResult};
pub use init::{first_principal_component, initialize_state, PrincipalComponent};
pub use updates::{sweep, update_chi, update_gene_block, update_tau, update_z};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("Y has zero total variance; the principal axis is undefined")]
    DegenerateData,
    #[error("ELBO is not finite (term {term})")]
    NonFiniteElbo { term: &'static str },
    #[error("dataset must be column-centered before fitting")]
    NotCentered,
    #[error("invalid fit configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}
