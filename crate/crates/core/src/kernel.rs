//! Composite kernel for a Gaussian-process version of the covariate model.
//!
//! The Gram matrix sums a kernel over the covariate rows, a kernel over the
//! latent positions and one kernel per covariate over the products
//! `x_ip * z_i`:
//!
//! ```text
//! K_ij = w_x k_x(x_i, x_j) + w_z k_z(z_i, z_j)
//!      + sum_p w_p k_p(x_ip z_i, x_jp z_j) + jitter [i == j]
//! ```
//!
//! Only construction is provided; there is no GP-LVM training here.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("lengthscale must be positive and finite, got {0}")]
    NonPositiveLengthscale(f64),
    #[error("amplitude must be positive and finite, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("weight must be non-negative and finite, got {0}")]
    NegativeWeight(f64),
    #[error("jitter must be non-negative and finite, got {0}")]
    NegativeJitter(f64),
    #[error("expected {expected} perturbation terms, found {found}")]
    TermCount { expected: usize, found: usize },
    #[error("latent vector has length {found}, expected {expected}")]
    LatentLength { expected: usize, found: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
    #[error("matrix is not square: {0} x {1}")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric: |K_ij - K_ji| = {0} at ({1}, {2})")]
    NotSymmetric(f64, usize, usize),
}

/// Base kernel of one term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseKernel {
    /// `amplitude * exp(-|a - b|^2 / (2 lengthscale^2))`.
    SquaredExponential { lengthscale: f64, amplitude: f64 },
    /// `amplitude * <a, b>`; with unit amplitude this reproduces the
    /// covariance terms of the linear model.
    Linear { amplitude: f64 },
}

impl BaseKernel {
    pub fn unit_se() -> Self {
        BaseKernel::SquaredExponential {
            lengthscale: 1.0,
            amplitude: 1.0,
        }
    }

    fn validate(&self) -> Result<(), KernelError> {
        let amplitude = match *self {
            BaseKernel::SquaredExponential {
                lengthscale,
                amplitude,
            } => {
                if !(lengthscale > 0.0 && lengthscale.is_finite()) {
                    return Err(KernelError::NonPositiveLengthscale(lengthscale));
                }
                amplitude
            }
            BaseKernel::Linear { amplitude } => amplitude,
        };
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(KernelError::NonPositiveAmplitude(amplitude));
        }
        Ok(())
    }

    #[inline]
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            BaseKernel::SquaredExponential {
                lengthscale,
                amplitude,
            } => {
                let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                amplitude * (-0.5 * d2 / (lengthscale * lengthscale)).exp()
            }
            BaseKernel::Linear { amplitude } => {
                amplitude * a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>()
            }
        }
    }
}

/// A weighted base kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTerm {
    pub base: BaseKernel,
    pub weight: f64,
}

impl KernelTerm {
    pub fn new(base: BaseKernel, weight: f64) -> Self {
        KernelTerm { base, weight }
    }
}

/// Terms of the composite kernel. `perturbation` has one entry per covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub covariates: KernelTerm,
    pub latent: KernelTerm,
    pub perturbation: Vec<KernelTerm>,
    pub jitter: f64,
}

/// Jitter added to the diagonal unless configured otherwise.
pub const DEFAULT_JITTER: f64 = 1e-9;

impl KernelSpec {
    /// Unit squared-exponential terms with unit weights and default jitter.
    pub fn unit(p: usize) -> Self {
        let term = KernelTerm::new(BaseKernel::unit_se(), 1.0);
        KernelSpec {
            covariates: term,
            latent: term,
            perturbation: vec![term; p],
            jitter: DEFAULT_JITTER,
        }
    }

    fn validate(&self, p: usize) -> Result<(), KernelError> {
        if self.perturbation.len() != p {
            return Err(KernelError::TermCount {
                expected: p,
                found: self.perturbation.len(),
            });
        }
        for term in std::iter::once(&self.covariates)
            .chain(std::iter::once(&self.latent))
            .chain(&self.perturbation)
        {
            term.base.validate()?;
            if !(term.weight >= 0.0 && term.weight.is_finite()) {
                return Err(KernelError::NegativeWeight(term.weight));
            }
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(KernelError::NegativeJitter(self.jitter));
        }
        Ok(())
    }
}

/// Builds the `N x N` composite Gram matrix. The result is exactly symmetric.
pub fn build_covariate_kernel(
    x: &DMatrix<f64>,
    z: &DVector<f64>,
    spec: &KernelSpec,
) -> Result<DMatrix<f64>, KernelError> {
    let (n, p) = x.shape();
    if z.len() != n {
        return Err(KernelError::LatentLength {
            expected: n,
            found: z.len(),
        });
    }
    spec.validate(p)?;
    if x.iter().chain(z.iter()).any(|v| !v.is_finite()) {
        return Err(KernelError::NonFiniteInput);
    }

    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut v = spec.covariates.weight * spec.covariates.base.eval(&rows[i], &rows[j]);
            v += spec.latent.weight * spec.latent.base.eval(&[z[i]], &[z[j]]);
            for (q, term) in spec.perturbation.iter().enumerate() {
                let a = x[(i, q)] * z[i];
                let b = x[(j, q)] * z[j];
                v += term.weight * term.base.eval(&[a], &[b]);
            }
            if i == j {
                v += spec.jitter;
            }
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// Absolute tolerance for the symmetry precondition of [`assert_psd`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// True iff the smallest eigenvalue of `m` is at least `-tolerance`.
pub fn assert_psd(m: &DMatrix<f64>, tolerance: f64) -> Result<bool, KernelError> {
    let (r, c) = m.shape();
    if r != c {
        return Err(KernelError::NotSquare(r, c));
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let d = (m[(i, j)] - m[(j, i)]).abs();
            if !(d <= SYMMETRY_TOLERANCE) {
                return Err(KernelError::NotSymmetric(d, i, j));
            }
        }
    }
    if r == 0 {
        return Ok(true);
    }
    let eig = SymmetricEigen::new(m.clone());
    Ok(eig.eigenvalues.min() >= -tolerance)
}
