//! File formats, feature filtering, run configuration and the command line.
//!
//! Inputs are taken as already transformed (for expression data, typically
//! `log2(TPM + 1)`); nothing here applies a transform. Rows of both input
//! files are samples and must appear in the same order.

pub mod cli;
mod config;
mod filter;
mod matrix;
mod output;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{load_config, load_config_with, ConfigOverrides, RunConfig};
pub use filter::{retained_columns, variance_filter};
pub use matrix::{format_float, read_matrix_csv, write_matrix_csv, write_rows, LabeledMatrix};
pub use output::{
    write_fit_result, write_labeled, ELBO_TRACE_FILE, GENE_POSTERIORS_FILE, INTERACTIONS_FILE,
    RUN_META_FILE, TRAJECTORY_FILE,
};

use crate::cavi::{fit, FitError, FitResult};
use crate::interactions::{significant_interactions, InteractionError, InteractionSet};
use crate::model::{Dataset, Labels, ModelError};

#[derive(Debug, Error)]
pub enum DataIoError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("{}: file is empty or has no header", .0.display())]
    EmptyFile(PathBuf),
    #[error("{}: cannot parse {token:?} at data row {row}, column {column}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        token: String,
    },
    #[error("{}: data row {row} has {found} fields, header has {expected}", path.display())]
    RaggedRows {
        path: PathBuf,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("sample ids differ between expression and covariates at row {row}: {expression:?} vs {covariate:?}")]
    SampleMismatch {
        row: usize,
        expression: String,
        covariate: String,
    },
    #[error("no feature has variance above {threshold}")]
    AllFiltered { threshold: f64 },
    #[error("variance threshold must be finite and non-negative, got {0}")]
    InvalidThreshold(f64),
    #[error("{message}")]
    Model {
        message: String,
        #[source]
        source: ModelError,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {}: {message}", path.display())]
    Read { path: PathBuf, message: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("configuration type mismatch: {0}")]
    TypeMismatch(String),
    #[error("configuration is not valid JSON: {0}")]
    Syntax(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("missing required configuration field {0:?}")]
    MissingRequired(&'static str),
}

/// Any failure of a file-driven run.
#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataIoError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Interactions(#[from] InteractionError),
}

/// Reads, validates, filters and (optionally) centers and standardizes the
/// inputs named by `config`.
pub fn prepare_dataset(config: &RunConfig) -> Result<Dataset, DataIoError> {
    let y = read_matrix_csv(&config.expression_path)?;
    let x = read_matrix_csv(&config.covariate_path)?;
    if y.row_labels.len() == x.row_labels.len() {
        for (row, (a, b)) in y.row_labels.iter().zip(&x.row_labels).enumerate() {
            if a != b {
                return Err(DataIoError::SampleMismatch {
                    row: row + 1,
                    expression: a.clone(),
                    covariate: b.clone(),
                });
            }
        }
    }
    let labels = Labels {
        sample_ids: y.row_labels.clone(),
        feature_names: y.col_labels.clone(),
        covariate_names: x.col_labels.clone(),
    };
    let data = Dataset::new(y.values, x.values, labels.clone())
        .map_err(|e| model_error(e, Some(&labels)))?;
    if !(config.variance_threshold >= 0.0 && config.variance_threshold.is_finite()) {
        return Err(DataIoError::InvalidThreshold(config.variance_threshold));
    }
    let keep = retained_columns(data.y(), config.variance_threshold);
    if keep.is_empty() {
        return Err(DataIoError::AllFiltered {
            threshold: config.variance_threshold,
        });
    }
    log::info!(
        "retained {} of {} features with variance above {}",
        keep.len(),
        data.g(),
        config.variance_threshold
    );
    let mut data = data
        .select_features(&keep)
        .map_err(|e| model_error(e, None))?;
    if config.center {
        data = data.center_columns();
    }
    if config.standardize_covariates {
        data = data.standardize_covariates();
    }
    Ok(data)
}

fn model_error(e: ModelError, labels: Option<&Labels>) -> DataIoError {
    let message = match (&e, labels) {
        (
            ModelError::NonFiniteEntry {
                matrix,
                row,
                col,
                value,
            },
            Some(labels),
        ) => {
            let (file, names) = if *matrix == "Y" {
                ("expression", &labels.feature_names)
            } else {
                ("covariates", &labels.covariate_names)
            };
            format!(
                "non-finite value {value} in {file} at sample {:?}, column {:?} (data row {}, column {})",
                labels.sample_ids[*row],
                names[*col],
                row + 1,
                col + 1
            )
        }
        _ => e.to_string(),
    };
    DataIoError::Model { message, source: e }
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub data: Dataset,
    pub result: FitResult,
    pub interactions: InteractionSet,
}

/// Reads the inputs, fits the model and writes all result files.
pub fn run(config: &RunConfig) -> Result<RunOutput, RunError> {
    let data = prepare_dataset(config)?;
    let result = fit(&data, &config.fit)?;
    let labels = data.labels();
    let interactions = significant_interactions(
        &result.state,
        &labels.covariate_names,
        &labels.feature_names,
        config.fit.significance_multiplier,
    )?;
    write_fit_result(&result, &interactions, &data, config)?;
    Ok(RunOutput {
        data,
        result,
        interactions,
    })
}
