use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::cavi::FitConfig;

/// Everything needed to run a fit from files.
///
/// Relative paths in a config file are resolved against the directory that
/// contains the file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub expression_path: PathBuf,
    pub covariate_path: PathBuf,
    pub output_dir: PathBuf,
    pub variance_threshold: f64,
    pub center: bool,
    pub standardize_covariates: bool,
    pub fit: FitConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub expression_path: Option<PathBuf>,
    pub covariate_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    expression_path: Option<PathBuf>,
    covariate_path: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    variance_threshold: f64,
    #[serde(default = "yes")]
    center: bool,
    #[serde(default = "yes")]
    standardize_covariates: bool,
    #[serde(default)]
    fit: FitConfig,
}

fn default_threshold() -> f64 {
    0.5
}

fn yes() -> bool {
    true
}

/// Reads a JSON run configuration. Missing fields take their defaults;
/// unknown keys are rejected.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    load_config_with(Some(path), &ConfigOverrides::default())
}

/// Like [`load_config`], then applies `overrides`. With no file, every path
/// must come from the overrides.
pub fn load_config_with(
    path: Option<&Path>,
    overrides: &ConfigOverrides,
) -> Result<RunConfig, ConfigError> {
    let mut raw = match path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
            let mut raw = parse_config(&text)?;
            let base = path.parent().unwrap_or(Path::new(""));
            for p in [
                &mut raw.expression_path,
                &mut raw.covariate_path,
                &mut raw.output_dir,
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            raw
        }
        None => parse_config("{}")?,
    };
    if let Some(p) = &overrides.expression_path {
        raw.expression_path = Some(p.clone());
    }
    if let Some(p) = &overrides.covariate_path {
        raw.covariate_path = Some(p.clone());
    }
    if let Some(p) = &overrides.output_dir {
        raw.output_dir = Some(p.clone());
    }
    if let Some(seed) = overrides.seed {
        raw.fit.seed = seed;
    }

    if !(raw.variance_threshold >= 0.0 && raw.variance_threshold.is_finite()) {
        return Err(ConfigError::Invalid(format!(
            "variance_threshold must be finite and non-negative, got {}",
            raw.variance_threshold
        )));
    }
    raw.fit
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let required = |p: Option<PathBuf>, name| match p {
        Some(p) if !p.as_os_str().is_empty() => Ok(p),
        _ => Err(ConfigError::MissingRequired(name)),
    };
    Ok(RunConfig {
        expression_path: required(raw.expression_path, "expression_path")?,
        covariate_path: required(raw.covariate_path, "covariate_path")?,
        output_dir: required(raw.output_dir, "output_dir")?,
        variance_threshold: raw.variance_threshold,
        center: raw.center,
        standardize_covariates: raw.standardize_covariates,
        fit: raw.fit,
    })
}

fn parse_config(text: &str) -> Result<RawRunConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        if let Some(rest) = msg.strip_prefix("unknown field `") {
            if let Some(end) = rest.find('`') {
                return ConfigError::UnknownKey(rest[..end].to_string());
            }
        }
        match e.classify() {
            serde_json::error::Category::Data => ConfigError::TypeMismatch(msg),
            _ => ConfigError::Syntax(msg),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavi::InitStrategy;

    fn load(body: &str) -> Result<RunConfig, ConfigError> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, body).unwrap();
        load_config(&p)
    }

    #[test]
    fn defaults_applied() {
        let c = load(r#"{"expression_path":"Y.csv","covariate_path":"X.csv","output_dir":"out"}"#)
            .unwrap();
        assert_eq!(c.variance_threshold, 0.5);
        assert_eq!((c.fit.hyper.a_beta, c.fit.hyper.b_beta), (6.0, 0.1));
        assert_eq!(c.fit.init_strategy, InitStrategy::Pca);
        assert!(c.center && c.standardize_covariates);
        assert!(c.expression_path.ends_with("Y.csv"));
        assert!(c.expression_path.is_absolute());
    }

    #[test]
    fn unknown_key() {
        let err = load(r#"{"varianse_threshold":1}"#).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("varianse_threshold".into()));
        let err = load(r#"{"fit":{"hyper":{"tau_z":1}}}"#).unwrap_err();
        assert_eq!(err, ConfigError::UnknownKey("tau_z".into()));
    }

    #[test]
    fn invariant_violation() {
        let err = load(r#"{"fit":{"max_iterations":0}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }

    #[test]
    fn type_mismatch() {
        let err = load(r#"{"center":"yes"}"#).unwrap_err();
        assert!(matches!(err, ConfigError::TypeMismatch(_)));
    }

    #[test]
    fn missing_required() {
        let err = load(r#"{"expression_path":"Y.csv"}"#).unwrap_err();
        assert_eq!(err, ConfigError::MissingRequired("covariate_path"));
    }

    #[test]
    fn overrides_take_precedence() {
        let o = ConfigOverrides {
            expression_path: Some("a.csv".into()),
            covariate_path: Some("b.csv".into()),
            output_dir: Some("o".into()),
            seed: Some(9),
        };
        let c = load_config_with(None, &o).unwrap();
        assert_eq!(c.expression_path, PathBuf::from("a.csv"));
        assert_eq!(c.fit.seed, 9);
    }
}
