use std::time::Instant;

use nalgebra::DVector;

use super::elbo::compute_elbo;
use super::init::{first_principal_component, initialize_state};
use super::updates::sweep;
use super::{FitConfig, FitError};
use crate::model::{Dataset, VariationalState};

/// Outcome of a [`fit`] call. Non-convergence is reported here, not as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub state: VariationalState,
    /// ELBO values in evaluation order.
    pub elbo_trace: Vec<f64>,
    /// Sweep number (1-based) at which each trace entry was evaluated.
    pub elbo_iterations: Vec<usize>,
    pub converged: bool,
    pub iterations_run: usize,
    pub wall_time: f64,
}

/// True iff the last relative ELBO change is below `tolerance`.
///
/// # Panics
///
/// Panics when the trace holds fewer than two values.
pub fn check_convergence(elbo_trace: &[f64], tolerance: f64) -> bool {
    assert!(
        elbo_trace.len() >= 2,
        "convergence needs at least two ELBO values"
    );
    let last = elbo_trace[elbo_trace.len() - 1];
    let previous = elbo_trace[elbo_trace.len() - 2];
    (last - previous).abs() / (previous.abs() + 1e-12) < tolerance
}

/// Runs coordinate ascent on a centered dataset until the relative ELBO
/// change falls below the tolerance or the iteration budget runs out.
pub fn fit(data: &Dataset, config: &FitConfig) -> Result<FitResult, FitError> {
    let start = Instant::now();
    config.validate()?;
    if !data.is_centered() {
        return Err(FitError::NotCentered);
    }
    let hyper = &config.hyper;
    hyper.validate(data.n())?;
    let mut state = initialize_state(data, config)?;

    let mut elbo_trace = Vec::new();
    let mut elbo_iterations = Vec::new();
    let mut converged = false;
    let mut iterations_run = 0;
    for it in 1..=config.max_iterations {
        sweep(&mut state, data, hyper);
        iterations_run = it;
        if it % config.elbo_every != 0 && it != config.max_iterations {
            continue;
        }
        let elbo = compute_elbo(&state, data, hyper)?;
        elbo_trace.push(elbo);
        elbo_iterations.push(it);
        log::debug!("sweep {it}: elbo {elbo}");
        if elbo_trace.len() >= 2 && check_convergence(&elbo_trace, config.elbo_rel_tolerance) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "no convergence after {} sweeps (tolerance {})",
            iterations_run,
            config.elbo_rel_tolerance
        );
    }
    orient_to_first_pc(&mut state, data);

    Ok(FitResult {
        state,
        elbo_trace,
        elbo_iterations,
        converged,
        iterations_run,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Flips `(z, c, beta)` jointly so that `z_mean` correlates non-negatively
/// with the first principal component of `Y`. The ELBO is unchanged.
pub fn orient_to_first_pc(state: &mut VariationalState, data: &Dataset) {
    let Some(pc) = first_principal_component(data.y()) else {
        return;
    };
    if covariance(&state.z_mean, &pc.scores) < 0.0 {
        state.z_mean.neg_mut();
        state.c_mean.neg_mut();
        state.beta_mean.neg_mut();
    }
}

fn covariance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (ma, mb) = (a.mean(), b.mean());
    a.iter().zip(b.iter()).map(|(x, y)| (x - ma) * (y - mb)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn convergence_examples() {
        assert!(check_convergence(&[-100.0, -100.0000001], 1e-6));
        assert!(!check_convergence(&[-100.0, -90.0], 1e-6));
    }

    #[test]
    #[should_panic]
    fn convergence_needs_two_values() {
        check_convergence(&[-1.0], 1e-6);
    }

    #[test]
    fn rejects_uncentered_data() {
        let y = DMatrix::from_fn(4, 2, |i, j| (i + j) as f64);
        let data = Dataset::unlabeled(y, DMatrix::zeros(4, 0)).unwrap();
        assert!(matches!(
            fit(&data, &FitConfig::default()),
            Err(FitError::NotCentered)
        ));
    }

    #[test]
    fn single_iteration_budget_is_not_an_error() {
        let y = DMatrix::from_fn(6, 3, |i, j| ((i * 5 + j * 2) % 7) as f64);
        let data = Dataset::unlabeled(y, DMatrix::zeros(6, 1))
            .unwrap()
            .center_columns();
        let cfg = FitConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let r = fit(&data, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_run, 1);
        assert_eq!(r.elbo_trace.len(), 1);
    }
}
