use nalgebra::{DMatrix, DVector};

use super::{Hyperparameters, ModelError};

/// Covariance of one data column with the loadings `c_g`, `alpha_.g` and
/// `beta_.g` integrated out, for fixed latent positions `z`:
///
/// ```text
/// Sigma = I / tau_g + X X^T / tau_alpha + z z^T / tau_c
///       + sum_p (x_p * z)(x_p * z)^T / chi_pg
/// ```
///
/// where `x_p * z` is the element-wise product. `chi_g` holds the `P`
/// interaction precisions of the feature.
pub fn marginal_covariance(
    x: &DMatrix<f64>,
    z: &DVector<f64>,
    tau_g: f64,
    chi_g: &[f64],
    hyper: &Hyperparameters,
) -> Result<DMatrix<f64>, ModelError> {
    let n = x.nrows();
    if z.len() != n {
        return Err(ModelError::DimensionMismatch {
            what: "latent positions",
            expected: n,
            found: z.len(),
        });
    }
    if chi_g.len() != x.ncols() {
        return Err(ModelError::DimensionMismatch {
            what: "interaction precisions",
            expected: x.ncols(),
            found: chi_g.len(),
        });
    }
    if !(tau_g > 0.0) {
        return Err(ModelError::NonPositivePrecision("tau_g"));
    }
    if chi_g.iter().any(|c| !(*c > 0.0)) {
        return Err(ModelError::NonPositivePrecision("chi_g"));
    }
    hyper.validate_scalars()?;

    let mut sigma = DMatrix::identity(n, n) / tau_g;
    sigma += (x * x.transpose()) / hyper.tau_alpha;
    sigma += (z * z.transpose()) / hyper.tau_c;
    for (k, &chi) in chi_g.iter().enumerate() {
        let xz = x.column(k).component_mul(z);
        sigma += (&xz * xz.transpose()) / chi;
    }
    // rank-one products are symmetric up to rounding; make it exact
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (sigma[(i, j)] + sigma[(j, i)]);
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    Ok(sigma)
}
