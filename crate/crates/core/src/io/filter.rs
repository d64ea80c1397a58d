use nalgebra::DMatrix;

use super::{DataIoError, LabeledMatrix};

/// Indices of the columns whose sample variance (denominator `N - 1`) is
/// strictly greater than `threshold`.
pub fn retained_columns(values: &DMatrix<f64>, threshold: f64) -> Vec<usize> {
    let n = values.nrows() as f64;
    values
        .column_iter()
        .enumerate()
        .filter(|(_, col)| {
            let mean = col.mean();
            let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            ss / (n - 1.0) > threshold
        })
        .map(|(j, _)| j)
        .collect()
}

/// Keeps the columns with variance above `threshold`. Returns the filtered
/// matrix and the retained column names.
pub fn variance_filter(
    m: &LabeledMatrix,
    threshold: f64,
) -> Result<(LabeledMatrix, Vec<String>), DataIoError> {
    if !(threshold >= 0.0 && threshold.is_finite()) {
        return Err(DataIoError::InvalidThreshold(threshold));
    }
    let keep = retained_columns(&m.values, threshold);
    if keep.is_empty() {
        return Err(DataIoError::AllFiltered { threshold });
    }
    let names: Vec<String> = keep.iter().map(|&j| m.col_labels[j].clone()).collect();
    let filtered = LabeledMatrix {
        corner: m.corner.clone(),
        row_labels: m.row_labels.clone(),
        col_labels: names.clone(),
        values: m.values.select_columns(&keep),
    };
    Ok((filtered, names))
}
