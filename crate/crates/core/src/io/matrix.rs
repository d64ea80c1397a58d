use std::fs::File;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use super::DataIoError;

/// A real matrix with row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    /// Content of the top-left header cell.
    pub corner: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: DMatrix<f64>,
}

/// Reads a CSV whose first row holds column labels and whose first column
/// holds row labels. Every other cell must parse as a float.
///
/// Parse errors report the 1-based data row (header excluded) and 1-based
/// data column (label column excluded).
pub fn read_matrix_csv(path: &Path) -> Result<LabeledMatrix, DataIoError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DataIoError::FileNotFound(path.to_path_buf()),
        _ => DataIoError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?,
        None => return Err(DataIoError::EmptyFile(path.to_path_buf())),
    };
    let width = header.len();
    if width == 0 {
        return Err(DataIoError::EmptyFile(path.to_path_buf()));
    }
    let corner = header[0].to_string();
    let col_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();

    let mut row_labels = Vec::new();
    let mut data = Vec::new();
    for (r, record) in records.enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = r + 1;
        if record.len() != width {
            return Err(DataIoError::RaggedRows {
                path: path.to_path_buf(),
                row,
                expected: width,
                found: record.len(),
            });
        }
        row_labels.push(record[0].to_string());
        for (c, token) in record.iter().enumerate().skip(1) {
            let value: f64 = token.parse().map_err(|_| DataIoError::Parse {
                path: path.to_path_buf(),
                row,
                column: c,
                token: token.to_string(),
            })?;
            data.push(value);
        }
    }
    let values = DMatrix::from_row_slice(row_labels.len(), col_labels.len(), &data);
    Ok(LabeledMatrix {
        corner,
        row_labels,
        col_labels,
        values,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> DataIoError {
    DataIoError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Formats a float with 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `m` in the layout read by [`read_matrix_csv`].
pub fn write_matrix_csv(path: &Path, m: &LabeledMatrix) -> Result<(), DataIoError> {
    let mut header = vec![m.corner.clone()];
    header.extend(m.col_labels.iter().cloned());
    let rows = (0..m.values.nrows()).map(|i| {
        let mut row = vec![m.row_labels[i].clone()];
        row.extend(m.values.row(i).iter().map(|&v| format_float(v)));
        row
    });
    write_rows(path, &header, rows)
}

/// Writes a header plus string rows as CSV.
pub fn write_rows(
    path: &Path,
    header: &[impl AsRef<str>],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), DataIoError> {
    let io_err = |source| DataIoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header.iter().map(|h| h.as_ref()))
        .map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    let mut inner = w.into_inner().map_err(|e| DataIoError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    inner.flush().map_err(io_err)
}
