//! Data types, input validation, the generative sampler and the marginal
//! covariance of a data column.

mod covariance;
mod dataset;
mod hyper;
mod sample;
mod state;
mod synthetic;

pub use covariance::marginal_covariance;
pub use dataset::{Dataset, Labels, CENTERING_TOLERANCE};
pub use hyper::Hyperparameters;
pub use sample::{sample_generative, GenerativeDraw, GenerativeOverrides};
pub use state::VariationalState;
pub use synthetic::{simulate, SyntheticData, SyntheticSpec};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value {value} in {matrix} at row {row}, column {col}")]
    NonFiniteEntry {
        matrix: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("at least 2 samples are required, found {0}")]
    TooFewSamples(usize),
    #[error("at least one feature is required")]
    NoFeatures,
    #[error("hyperparameter {name} must be positive and finite, got {value}")]
    InvalidHyperparameter { name: &'static str, value: f64 },
    #[error("variational parameter {name} must be positive and finite, got {value}")]
    InvalidState { name: &'static str, value: f64 },
    #[error("override {name} has shape {found:?}, expected {expected:?}")]
    InvalidOverride {
        name: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("precision {0} must be strictly positive")]
    NonPositivePrecision(&'static str),
}
