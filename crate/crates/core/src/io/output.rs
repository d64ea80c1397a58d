use std::path::Path;

use serde::Serialize;

use super::matrix::{format_float, write_rows};
use super::{DataIoError, LabeledMatrix, RunConfig};
use crate::cavi::FitResult;
use crate::interactions::InteractionSet;
use crate::model::{Dataset, Labels};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const GENE_POSTERIORS_FILE: &str = "gene_posteriors.csv";
pub const INTERACTIONS_FILE: &str = "interactions.csv";
pub const ELBO_TRACE_FILE: &str = "elbo_trace.csv";
pub const RUN_META_FILE: &str = "run_meta.json";

#[derive(Serialize)]
struct RunMeta<'a> {
    library_version: &'static str,
    config: &'a RunConfig,
    seed: u64,
    converged: bool,
    iterations: usize,
    wall_time_seconds: f64,
    n_samples: usize,
    n_features: usize,
    n_covariates: usize,
    final_elbo: Option<f64>,
    significant_interactions: usize,
    significant_features: usize,
}

/// Writes the five result files into `config.output_dir`, creating it if
/// needed. Floats in CSV files carry 17 significant digits.
pub fn write_fit_result(
    result: &FitResult,
    interactions: &InteractionSet,
    data: &Dataset,
    config: &RunConfig,
) -> Result<(), DataIoError> {
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| DataIoError::Io {
        path: dir.clone(),
        source,
    })?;
    let s = &result.state;
    let labels: &Labels = data.labels();
    let f = |v: f64| format_float(v);

    write_rows(
        &dir.join(TRAJECTORY_FILE),
        &["sample_id", "z_mean", "z_sd"],
        (0..s.n()).map(|i| {
            vec![
                labels.sample_ids[i].clone(),
                f(s.z_mean[i]),
                f(s.z_var[i].sqrt()),
            ]
        }),
    )?;

    write_rows(
        &dir.join(GENE_POSTERIORS_FILE),
        &["feature", "mu_mean", "mu_sd", "c_mean", "c_sd", "tau_mean"],
        (0..s.g()).map(|g| {
            vec![
                labels.feature_names[g].clone(),
                f(s.mu_mean[g]),
                f(s.mu_var[g].sqrt()),
                f(s.c_mean[g]),
                f(s.c_var[g].sqrt()),
                f(s.tau_expect(g)),
            ]
        }),
    )?;

    write_rows(
        &dir.join(INTERACTIONS_FILE),
        &[
            "covariate",
            "feature",
            "beta_mean",
            "beta_sd",
            "chi_inverse_mean",
            "significant",
            "alpha_mean",
            "alpha_sd",
        ],
        interactions.interactions.iter().map(|it| {
            let (p, g) = (it.covariate_index, it.feature_index);
            vec![
                it.covariate.clone(),
                it.feature.clone(),
                f(it.beta_mean),
                f(it.beta_sd),
                f(it.chi_inverse_mean),
                it.significant.to_string(),
                f(s.alpha_mean[(p, g)]),
                f(s.alpha_var[(p, g)].sqrt()),
            ]
        }),
    )?;

    write_rows(
        &dir.join(ELBO_TRACE_FILE),
        &["iteration", "elbo"],
        result
            .elbo_iterations
            .iter()
            .zip(&result.elbo_trace)
            .map(|(it, e)| vec![it.to_string(), f(*e)]),
    )?;

    let meta = RunMeta {
        library_version: env!("CARGO_PKG_VERSION"),
        config,
        seed: config.fit.seed,
        converged: result.converged,
        iterations: result.iterations_run,
        wall_time_seconds: result.wall_time,
        n_samples: data.n(),
        n_features: data.g(),
        n_covariates: data.p(),
        final_elbo: result.elbo_trace.last().copied(),
        significant_interactions: interactions.significant().count(),
        significant_features: interactions.significant_feature_count(),
    };
    let path = dir.join(RUN_META_FILE);
    let json = serde_json::to_string_pretty(&meta).expect("run metadata serializes");
    std::fs::write(&path, json + "\n").map_err(|source| DataIoError::Io { path, source })
}

/// Writes a matrix with row and column labels, creating parent directories.
pub fn write_labeled(path: &Path, m: &LabeledMatrix) -> Result<(), DataIoError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| DataIoError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    super::matrix::write_matrix_csv(path, m)
}
