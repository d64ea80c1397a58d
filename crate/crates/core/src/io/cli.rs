//! `clvm` command line: `fit`, `simulate` and `check`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure. A fit that stops without converging still exits 0.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde_json::json;

use super::{
    load_config_with, prepare_dataset, run, write_labeled, write_rows, ConfigOverrides,
    DataIoError, LabeledMatrix, RunError,
};
use crate::cavi::FitError;
use crate::io::format_float;
use crate::model::{simulate, ModelError, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "clvm", version, about = "Covariate latent variable models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the model and write result tables.
    Fit(FitArgs),
    /// Simulate a dataset with ground truth.
    Simulate(SimulateArgs),
    /// Validate configuration and inputs without fitting.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// JSON run configuration.
    #[arg(long = "config", value_name = "PATH")]
    config: Option<PathBuf>,
    /// Configuration given positionally.
    #[arg(value_name = "CONFIG", conflicts_with = "config")]
    config_positional: Option<PathBuf>,
    /// Expression matrix (samples x features), overrides the config.
    #[arg(long, value_name = "PATH")]
    expression: Option<PathBuf>,
    /// Covariate matrix (samples x covariates), overrides the config.
    #[arg(long, value_name = "PATH")]
    covariates: Option<PathBuf>,
    /// Output directory, overrides the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long = "config", value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(value_name = "CONFIG", conflicts_with = "config")]
    config_positional: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    g: usize,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Fix every noise precision instead of drawing it from the prior.
    #[arg(long)]
    tau: Option<f64>,
    /// Plant interactions of size +/- `planted_effect` in this fraction of
    /// (covariate, feature) pairs and set the rest to zero.
    #[arg(long)]
    planted_fraction: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    planted_effect: f64,
}

/// Runs the command line on `argv` (including the program name) and returns
/// the process exit code. Diagnostics go to standard error.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Fit(args) => fit_command(args),
        Command::Simulate(args) => simulate_command(args),
        Command::Check(args) => check_command(args),
    }
}

fn fit_command(args: FitArgs) -> i32 {
    let config_path = args.config.or(args.config_positional);
    let all_paths = args.expression.is_some() && args.covariates.is_some() && args.out.is_some();
    if config_path.is_none() && !all_paths {
        eprintln!("error: fit needs --config <PATH> (or --expression, --covariates and --out)\n");
        eprintln!("usage: clvm fit --config <PATH> [--expression <PATH> --covariates <PATH> --out <DIR> --seed <N>]");
        return EXIT_USAGE;
    }
    let overrides = ConfigOverrides {
        expression_path: args.expression,
        covariate_path: args.covariates,
        output_dir: args.out,
        seed: args.seed,
    };
    let config = match load_config_with(config_path.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => return report(RunError::Config(e)),
    };
    match run(&config) {
        Ok(out) => {
            let r = &out.result;
            eprintln!(
                "{} after {} sweeps; {} significant interactions in {} features; results in {}",
                if r.converged { "converged" } else { "not converged" },
                r.iterations_run,
                out.interactions.significant().count(),
                out.interactions.significant_feature_count(),
                config.output_dir.display()
            );
            EXIT_OK
        }
        Err(e) => report(e),
    }
}

fn check_command(args: CheckArgs) -> i32 {
    let Some(path) = args.config.or(args.config_positional) else {
        eprintln!("error: check needs --config <PATH>\n\nusage: clvm check --config <PATH>");
        return EXIT_USAGE;
    };
    let config = match load_config_with(Some(&path), &ConfigOverrides::default()) {
        Ok(c) => c,
        Err(e) => return report(RunError::Config(e)),
    };
    match prepare_dataset(&config) {
        Ok(data) => {
            eprintln!(
                "ok: {} samples, {} features after filtering, {} covariates",
                data.n(),
                data.g(),
                data.p()
            );
            EXIT_OK
        }
        Err(e) => report(RunError::Data(e)),
    }
}

fn simulate_command(args: SimulateArgs) -> i32 {
    let mut spec = SyntheticSpec::new(args.n, args.g, args.p, args.seed);
    spec.tau = args.tau;
    spec.planted_fraction = args.planted_fraction;
    spec.planted_effect = args.planted_effect;
    if let Some(tau) = spec.tau {
        if !(tau > 0.0) {
            eprintln!("error: --tau must be positive");
            return EXIT_USAGE;
        }
    }
    if let Some(f) = spec.planted_fraction {
        if !(0.0..=1.0).contains(&f) {
            eprintln!("error: --planted-fraction must lie in [0, 1]");
            return EXIT_USAGE;
        }
    }
    let data = match simulate(&spec) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                ModelError::TooFewSamples(_) | ModelError::NoFeatures => EXIT_USAGE,
                _ => EXIT_DATA,
            };
        }
    };
    if args.n < 2 || args.g == 0 {
        eprintln!("error: simulate needs --n >= 2 and --g >= 1");
        return EXIT_USAGE;
    }
    match write_simulation(&args.out, &data) {
        Ok(()) => {
            eprintln!("wrote simulated data to {}", args.out.display());
            EXIT_OK
        }
        Err(e) => report(RunError::Data(e)),
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn write_simulation(out: &Path, data: &crate::model::SyntheticData) -> Result<(), DataIoError> {
    let d = &data.draw;
    let (n, g, p) = (data.x.nrows(), d.y.ncols(), data.x.ncols());
    let samples = names("sample", n);
    let features = names("feature", g);
    let covariates = names("covariate", p);
    write_labeled(
        &out.join("expression.csv"),
        &LabeledMatrix {
            corner: "sample_id".into(),
            row_labels: samples.clone(),
            col_labels: features.clone(),
            values: d.y.clone(),
        },
    )?;
    write_labeled(
        &out.join("covariates.csv"),
        &LabeledMatrix {
            corner: "sample_id".into(),
            row_labels: samples.clone(),
            col_labels: covariates.clone(),
            values: data.x.clone(),
        },
    )?;
    write_labeled(
        &out.join("truth_latent.csv"),
        &LabeledMatrix {
            corner: "sample_id".into(),
            row_labels: samples,
            col_labels: vec!["z".into()],
            values: DMatrix::from_column_slice(n, 1, d.true_z.as_slice()),
        },
    )?;
    write_rows(
        &out.join("truth_features.csv"),
        &["feature", "mu", "c", "tau"],
        (0..g).map(|j| {
            vec![
                features[j].clone(),
                format_float(d.true_mu[j]),
                format_float(d.true_c[j]),
                format_float(d.true_tau[j]),
            ]
        }),
    )?;
    let planted = &data.planted;
    write_rows(
        &out.join("truth_interactions.csv"),
        &["covariate", "feature", "alpha", "beta", "chi", "planted"],
        (0..p).flat_map(|k| {
            let features = &features;
            let covariates = &covariates;
            (0..g).map(move |j| {
                vec![
                    covariates[k].clone(),
                    features[j].clone(),
                    format_float(d.true_alpha[(k, j)]),
                    format_float(d.true_beta[(k, j)]),
                    format_float(d.true_chi[(k, j)]),
                    planted.binary_search(&(k, j)).is_ok().to_string(),
                ]
            })
        }),
    )?;
    let config = json!({
        "expression_path": "expression.csv",
        "covariate_path": "covariates.csv",
        "output_dir": "fit",
        "variance_threshold": 0.0,
    });
    let path = out.join("config.json");
    let text = serde_json::to_string_pretty(&config).expect("static json") + "\n";
    std::fs::write(&path, text).map_err(|source| DataIoError::Io { path, source })
}

fn report(e: RunError) -> i32 {
    eprintln!("error: {e}");
    match e {
        RunError::Config(_) => EXIT_USAGE,
        RunError::Fit(FitError::NonFiniteElbo { .. }) => EXIT_NUMERICAL,
        RunError::Fit(FitError::InvalidConfig(_)) | RunError::Interactions(_) => EXIT_USAGE,
        RunError::Fit(_) | RunError::Data(_) => EXIT_DATA,
    }
}
