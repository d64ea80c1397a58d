use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ModelError;

/// Absolute tolerance on column means for a dataset flagged as centered.
pub const CENTERING_TOLERANCE: f64 = 1e-10;

/// Row and column labels accompanying the numeric matrices of a [`Dataset`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub sample_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub covariate_names: Vec<String>,
}

impl Labels {
    /// Generated labels `s0.., f0.., x0..` for unlabeled matrices.
    pub fn generated(n: usize, g: usize, p: usize) -> Self {
        Labels {
            sample_ids: (0..n).map(|i| format!("s{i}")).collect(),
            feature_names: (0..g).map(|j| format!("f{j}")).collect(),
            covariate_names: (0..p).map(|k| format!("x{k}")).collect(),
        }
    }
}

/// An `N x G` observation matrix together with its `N x P` covariates.
///
/// Rows are samples. Construct through [`Dataset::new`], which enforces the
/// dimension and finiteness invariants; the fields are read-only afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DMatrix<f64>,
    x: DMatrix<f64>,
    labels: Labels,
    centered: bool,
}

impl Dataset {
    /// Validates `y`, `x` and `labels` and assembles a dataset.
    ///
    /// `x` may have zero columns. Label vectors must match the matrix
    /// dimensions exactly.
    pub fn new(y: DMatrix<f64>, x: DMatrix<f64>, labels: Labels) -> Result<Self, ModelError> {
        if y.nrows() != x.nrows() {
            return Err(ModelError::DimensionMismatch {
                what: "covariate rows",
                expected: y.nrows(),
                found: x.nrows(),
            });
        }
        if y.nrows() < 2 {
            return Err(ModelError::TooFewSamples(y.nrows()));
        }
        if y.ncols() == 0 {
            return Err(ModelError::NoFeatures);
        }
        check_finite(&y, "Y")?;
        check_finite(&x, "X")?;
        let checks = [
            ("sample ids", y.nrows(), labels.sample_ids.len()),
            ("feature names", y.ncols(), labels.feature_names.len()),
            ("covariate names", x.ncols(), labels.covariate_names.len()),
        ];
        for (what, expected, found) in checks {
            if expected != found {
                return Err(ModelError::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        let centered = columns_centered(&y);
        Ok(Dataset {
            y,
            x,
            labels,
            centered,
        })
    }

    /// Like [`Dataset::new`] with generated labels.
    pub fn unlabeled(y: DMatrix<f64>, x: DMatrix<f64>) -> Result<Self, ModelError> {
        let labels = Labels::generated(y.nrows(), y.ncols(), x.ncols());
        Dataset::new(y, x, labels)
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    /// Number of features.
    pub fn g(&self) -> usize {
        self.y.ncols()
    }

    /// Number of covariates.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// True when every column of `Y` has mean zero within [`CENTERING_TOLERANCE`].
    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Subtracts each column mean of `Y`. `X` is left untouched.
    ///
    /// Constant columns become all-zero and are reported through the log.
    pub fn center_columns(&self) -> Dataset {
        let mut y = self.y.clone();
        for (j, mut col) in y.column_iter_mut().enumerate() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
            if col.iter().all(|&v| v == 0.0) {
                log::warn!(
                    "feature {} is constant; its loading posteriors will stay at the prior",
                    self.labels.feature_names[j]
                );
            }
        }
        let centered = columns_centered(&y);
        Dataset {
            y,
            x: self.x.clone(),
            labels: self.labels.clone(),
            centered,
        }
    }

    /// Standardizes continuous covariate columns to zero mean and unit
    /// variance. Columns whose entries are all 0 or 1 are treated as binary
    /// and left as they are.
    pub fn standardize_covariates(&self) -> Dataset {
        let mut x = self.x.clone();
        for (k, mut col) in x.column_iter_mut().enumerate() {
            if col.iter().all(|&v| v == 0.0 || v == 1.0) {
                continue;
            }
            let mean = col.mean();
            col.add_scalar_mut(-mean);
            let n = col.len() as f64;
            let sd = (col.norm_squared() / (n - 1.0)).sqrt();
            if sd > 0.0 {
                col /= sd;
            } else {
                log::warn!(
                    "covariate {} is constant; centered but not scaled",
                    self.labels.covariate_names[k]
                );
            }
        }
        Dataset {
            y: self.y.clone(),
            x,
            labels: self.labels.clone(),
            centered: self.centered,
        }
    }

    /// Returns a dataset keeping only the listed feature columns, in order.
    pub fn select_features(&self, columns: &[usize]) -> Result<Dataset, ModelError> {
        let y = self.y.select_columns(columns);
        let mut labels = self.labels.clone();
        labels.feature_names = columns
            .iter()
            .map(|&j| self.labels.feature_names[j].clone())
            .collect();
        Dataset::new(y, self.x.clone(), labels)
    }
}

fn check_finite(m: &DMatrix<f64>, matrix: &'static str) -> Result<(), ModelError> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let value = m[(i, j)];
            if !value.is_finite() {
                return Err(ModelError::NonFiniteEntry {
                    matrix,
                    row: i,
                    col: j,
                    value,
                });
            }
        }
    }
    Ok(())
}

fn columns_centered(y: &DMatrix<f64>) -> bool {
    y.column_iter().all(|c| c.mean().abs() <= CENTERING_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(y: DMatrix<f64>, x: DMatrix<f64>) -> Result<Dataset, ModelError> {
        Dataset::unlabeled(y, x)
    }

    #[test]
    fn accepts_consistent_dimensions() {
        let d = ds(DMatrix::from_element(3, 2, 1.0), DMatrix::zeros(3, 1)).unwrap();
        assert_eq!((d.n(), d.g(), d.p()), (3, 2, 1));
    }

    #[test]
    fn rejects_row_mismatch() {
        let err = ds(DMatrix::zeros(3, 2), DMatrix::zeros(4, 1)).unwrap_err();
        assert!(matches!(
            err,
            ModelError::DimensionMismatch {
                expected: 3,
                found: 4,
                ..
            }
        ));
    }

    #[test]
    fn reports_nan_position() {
        let mut y = DMatrix::zeros(3, 2);
        y[(2, 1)] = f64::NAN;
        let err = ds(y, DMatrix::zeros(3, 1)).unwrap_err();
        assert!(matches!(
            err,
            ModelError::NonFiniteEntry {
                matrix: "Y",
                row: 2,
                col: 1,
                ..
            }
        ));
    }

    #[test]
    fn too_few_samples() {
        let err = ds(DMatrix::zeros(1, 2), DMatrix::zeros(1, 0)).unwrap_err();
        assert!(matches!(err, ModelError::TooFewSamples(1)));
    }

    #[test]
    fn zero_covariates_allowed() {
        let d = ds(DMatrix::zeros(2, 1), DMatrix::zeros(2, 0)).unwrap();
        assert_eq!(d.p(), 0);
    }

    #[test]
    fn centering_examples() {
        let y = DMatrix::from_column_slice(3, 3, &[1.0, 2.0, 3.0, -1.0, 1.0, 0.0, 5.0, 5.0, 5.0]);
        let d = ds(y, DMatrix::zeros(3, 0)).unwrap().center_columns();
        assert!(d.is_centered());
        assert_eq!(d.y().column(0).as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(d.y().column(1).as_slice(), &[-1.0, 1.0, 0.0]);
        assert_eq!(d.y().column(2).as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn binary_covariates_untouched_continuous_standardized() {
        let x = DMatrix::from_column_slice(4, 2, &[0.0, 1.0, 1.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
        let d = ds(DMatrix::zeros(4, 1), x).unwrap().standardize_covariates();
        assert_eq!(d.x().column(0).as_slice(), &[0.0, 1.0, 1.0, 0.0]);
        let c = d.x().column(1);
        assert!(c.mean().abs() < 1e-15);
        assert!((c.norm_squared() / 3.0 - 1.0).abs() < 1e-12);
    }
}
