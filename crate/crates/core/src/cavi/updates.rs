//! Closed-form coordinate updates of the mean-field posterior.
//!
//! Each function sets one factor (or a block of conditionally independent
//! factors) to the maximizer of the ELBO with every other factor held fixed.
//! Gaussian factors have the form `N(s2 * h, s2)` with `s2 = 1 / precision`,
//! where `precision` and `h` collect the prior and the expected likelihood.
//!
//! Notation used below, all expectations under the current factors:
//!
//! ```text
//! lambda_ig   = c_g + sum_p beta_pg x_ip
//! E[lambda]   = c_mean + sum_p beta_mean x_ip
//! E[lambda^2] = E[lambda]^2 + c_var + sum_p x_ip^2 beta_var
//! ```

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::model::{Dataset, Hyperparameters, VariationalState};

/// Smallest precision inverted by an update.
pub const MIN_PRECISION: f64 = 1e-12;

#[inline]
fn gaussian(precision: f64, h: f64) -> (f64, f64) {
    let var = 1.0 / precision.max(MIN_PRECISION);
    (var * h, var)
}

/// Gaussian factors attached to a single feature.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GeneFactors {
    pub mu: (f64, f64),
    pub c: (f64, f64),
    pub alpha: Vec<(f64, f64)>,
    pub beta: Vec<(f64, f64)>,
}

impl GeneFactors {
    pub fn read(state: &VariationalState, g: usize) -> Self {
        let p = state.p();
        GeneFactors {
            mu: (state.mu_mean[g], state.mu_var[g]),
            c: (state.c_mean[g], state.c_var[g]),
            alpha: (0..p)
                .map(|k| (state.alpha_mean[(k, g)], state.alpha_var[(k, g)]))
                .collect(),
            beta: (0..p)
                .map(|k| (state.beta_mean[(k, g)], state.beta_var[(k, g)]))
                .collect(),
        }
    }

    pub fn write(&self, state: &mut VariationalState, g: usize) {
        (state.mu_mean[g], state.mu_var[g]) = self.mu;
        (state.c_mean[g], state.c_var[g]) = self.c;
        for (k, &(m, v)) in self.alpha.iter().enumerate() {
            state.alpha_mean[(k, g)] = m;
            state.alpha_var[(k, g)] = v;
        }
        for (k, &(m, v)) in self.beta.iter().enumerate() {
            state.beta_mean[(k, g)] = m;
            state.beta_var[(k, g)] = v;
        }
    }

    #[inline]
    fn alpha_sum(&self, x: &DMatrix<f64>, i: usize, skip: Option<usize>) -> f64 {
        let mut s = 0.0;
        for (k, &(m, _)) in self.alpha.iter().enumerate() {
            if Some(k) != skip {
                s += m * x[(i, k)];
            }
        }
        s
    }

    #[inline]
    fn beta_sum(&self, x: &DMatrix<f64>, i: usize, skip: Option<usize>) -> f64 {
        let mut s = 0.0;
        for (k, &(m, _)) in self.beta.iter().enumerate() {
            if Some(k) != skip {
                s += m * x[(i, k)];
            }
        }
        s
    }
}

/// Read-only context for the updates of one feature.
struct GeneContext<'a> {
    y: &'a [f64],
    x: &'a DMatrix<f64>,
    z_mean: &'a [f64],
    z_var: &'a [f64],
    tau: f64,
    chi: Vec<f64>,
}

impl<'a> GeneContext<'a> {
    fn new(state: &'a VariationalState, data: &'a Dataset, g: usize) -> Self {
        GeneContext {
            y: &data.y().as_slice()[g * data.n()..(g + 1) * data.n()],
            x: data.x(),
            z_mean: state.z_mean.as_slice(),
            z_var: state.z_var.as_slice(),
            tau: state.tau_expect(g),
            chi: (0..state.p()).map(|k| state.chi_expect(k, g)).collect(),
        }
    }

    #[inline]
    fn z2(&self, i: usize) -> f64 {
        self.z_mean[i] * self.z_mean[i] + self.z_var[i]
    }

    fn update_mu(&self, f: &mut GeneFactors, tau_mu: f64) {
        let n = self.y.len();
        let mut h = 0.0;
        for i in 0..n {
            let lambda = f.c.0 + f.beta_sum(self.x, i, None);
            h += self.y[i] - f.alpha_sum(self.x, i, None) - lambda * self.z_mean[i];
        }
        f.mu = gaussian(tau_mu + n as f64 * self.tau, self.tau * h);
    }

    fn update_alpha(&self, f: &mut GeneFactors, k: usize, tau_alpha: f64) {
        let mut prec = 0.0;
        let mut h = 0.0;
        for i in 0..self.y.len() {
            let xk = self.x[(i, k)];
            let lambda = f.c.0 + f.beta_sum(self.x, i, None);
            let resid =
                self.y[i] - f.mu.0 - f.alpha_sum(self.x, i, Some(k)) - lambda * self.z_mean[i];
            prec += xk * xk;
            h += xk * resid;
        }
        f.alpha[k] = gaussian(tau_alpha + self.tau * prec, self.tau * h);
    }

    fn update_c(&self, f: &mut GeneFactors, tau_c: f64) {
        let mut prec = 0.0;
        let mut h = 0.0;
        for i in 0..self.y.len() {
            let z2 = self.z2(i);
            let resid = self.y[i] - f.mu.0 - f.alpha_sum(self.x, i, None);
            prec += z2;
            h += self.z_mean[i] * resid - z2 * f.beta_sum(self.x, i, None);
        }
        f.c = gaussian(tau_c + self.tau * prec, self.tau * h);
    }

    fn update_beta(&self, f: &mut GeneFactors, k: usize) {
        let mut prec = 0.0;
        let mut h = 0.0;
        for i in 0..self.y.len() {
            let xk = self.x[(i, k)];
            if xk == 0.0 {
                continue;
            }
            let z2 = self.z2(i);
            let resid = self.y[i] - f.mu.0 - f.alpha_sum(self.x, i, None);
            let other_loading = f.c.0 + f.beta_sum(self.x, i, Some(k));
            prec += xk * xk * z2;
            h += xk * (self.z_mean[i] * resid - z2 * other_loading);
        }
        f.beta[k] = gaussian(self.chi[k] + self.tau * prec, self.tau * h);
    }

    fn sweep(&self, f: &mut GeneFactors, hyper: &Hyperparameters) {
        self.update_mu(f, hyper.tau_mu);
        for k in 0..f.alpha.len() {
            self.update_alpha(f, k, hyper.tau_alpha);
        }
        self.update_c(f, hyper.tau_c);
        for k in 0..f.beta.len() {
            self.update_beta(f, k);
        }
    }
}

/// Updates `mu_g`, then each `alpha_pg`, then `c_g`, then each `beta_pg`,
/// for every feature. Features are processed in parallel; the result does
/// not depend on scheduling.
pub fn update_gene_block(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters) {
    let updated: Vec<GeneFactors> = (0..state.g())
        .into_par_iter()
        .map(|g| {
            let ctx = GeneContext::new(state, data, g);
            let mut f = GeneFactors::read(state, g);
            ctx.sweep(&mut f, hyper);
            f
        })
        .collect();
    for (g, f) in updated.iter().enumerate() {
        f.write(state, g);
    }
}

fn update_gene_single(
    state: &mut VariationalState,
    data: &Dataset,
    g: usize,
    step: impl FnOnce(&GeneContext<'_>, &mut GeneFactors),
) {
    let mut f = GeneFactors::read(state, g);
    {
        let ctx = GeneContext::new(state, data, g);
        step(&ctx, &mut f);
    }
    f.write(state, g);
}

/// Optimal update of `q(mu_g)` alone.
pub fn update_mu_g(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters, g: usize) {
    update_gene_single(state, data, g, |ctx, f| ctx.update_mu(f, hyper.tau_mu));
}

/// Optimal update of `q(alpha_pg)` alone.
pub fn update_alpha_pg(
    state: &mut VariationalState,
    data: &Dataset,
    hyper: &Hyperparameters,
    p: usize,
    g: usize,
) {
    update_gene_single(state, data, g, |ctx, f| {
        ctx.update_alpha(f, p, hyper.tau_alpha)
    });
}

/// Optimal update of `q(c_g)` alone.
pub fn update_c_g(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters, g: usize) {
    update_gene_single(state, data, g, |ctx, f| ctx.update_c(f, hyper.tau_c));
}

/// Optimal update of `q(beta_pg)` alone, with prior precision `E[chi_pg]`.
pub fn update_beta_pg(state: &mut VariationalState, data: &Dataset, p: usize, g: usize) {
    update_gene_single(state, data, g, |ctx, f| ctx.update_beta(f, p));
}

/// `(precision, h)` of the optimal `q(z_i)`.
fn z_natural(state: &VariationalState, data: &Dataset, hyper: &Hyperparameters, i: usize) -> (f64, f64) {
    let x = data.x();
    let y = data.y();
    let p = state.p();
    let mut prec = hyper.tau_q;
    let mut h = hyper.tau_q * hyper.q_at(i);
    for g in 0..state.g() {
        let tau = state.tau_expect(g);
        let mut lambda = state.c_mean[g];
        let mut lambda_var = state.c_var[g];
        let mut intercept = state.mu_mean[g];
        for k in 0..p {
            let xk = x[(i, k)];
            lambda += state.beta_mean[(k, g)] * xk;
            lambda_var += xk * xk * state.beta_var[(k, g)];
            intercept += state.alpha_mean[(k, g)] * xk;
        }
        prec += tau * (lambda * lambda + lambda_var);
        h += tau * lambda * (y[(i, g)] - intercept);
    }
    (prec, h)
}

/// Sets every `q(z_i)` to its optimum. The `z_i` are conditionally
/// independent given the feature factors, so this equals any sequential order.
pub fn update_z(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters) {
    let updated: Vec<(f64, f64)> = (0..state.n())
        .into_par_iter()
        .map(|i| {
            let (prec, h) = z_natural(state, data, hyper, i);
            gaussian(prec, h)
        })
        .collect();
    for (i, (m, v)) in updated.into_iter().enumerate() {
        state.z_mean[i] = m;
        state.z_var[i] = v;
    }
}

/// Optimal update of `q(z_i)` alone.
pub fn update_z_i(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters, i: usize) {
    let (prec, h) = z_natural(state, data, hyper, i);
    (state.z_mean[i], state.z_var[i]) = gaussian(prec, h);
}

/// `sum_i E[(y_ig - mu_g - sum_p alpha_pg x_ip - lambda_ig z_i)^2]` under the
/// current factors.
pub fn expected_sq_residual(state: &VariationalState, data: &Dataset, g: usize) -> f64 {
    let x = data.x();
    let y = data.y();
    let p = state.p();
    let mut total = 0.0;
    for i in 0..state.n() {
        let mut lambda = state.c_mean[g];
        let mut lambda_var = state.c_var[g];
        let mut intercept = state.mu_mean[g];
        let mut intercept_var = state.mu_var[g];
        for k in 0..p {
            let xk = x[(i, k)];
            lambda += state.beta_mean[(k, g)] * xk;
            lambda_var += xk * xk * state.beta_var[(k, g)];
            intercept += state.alpha_mean[(k, g)] * xk;
            intercept_var += xk * xk * state.alpha_var[(k, g)];
        }
        let zm = state.z_mean[i];
        let z2 = state.z_second_moment(i);
        let lambda2 = lambda * lambda + lambda_var;
        let resid = y[(i, g)] - intercept - lambda * zm;
        // Var(lambda z) = E[lambda^2] E[z^2] - E[lambda]^2 E[z]^2
        total += resid * resid + intercept_var + lambda2 * z2 - lambda * lambda * zm * zm;
    }
    total
}

/// `q(tau_g) = Gamma(a + N/2, b + sum_i E[r_ig^2] / 2)` for every feature.
pub fn update_tau(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters) {
    let rates: Vec<f64> = (0..state.g())
        .into_par_iter()
        .map(|g| hyper.b + 0.5 * expected_sq_residual(state, data, g))
        .collect();
    let shape = hyper.a + 0.5 * state.n() as f64;
    for (g, rate) in rates.into_iter().enumerate() {
        state.tau_shape[g] = shape;
        state.tau_rate[g] = rate;
    }
}

/// Optimal update of `q(tau_g)` alone.
pub fn update_tau_g(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters, g: usize) {
    state.tau_shape[g] = hyper.a + 0.5 * state.n() as f64;
    state.tau_rate[g] = hyper.b + 0.5 * expected_sq_residual(state, data, g);
}

/// `q(chi_pg) = Gamma(a_beta + 1/2, b_beta + E[beta_pg^2] / 2)` for every pair.
pub fn update_chi(state: &mut VariationalState, hyper: &Hyperparameters) {
    for g in 0..state.g() {
        for k in 0..state.p() {
            update_chi_pg(state, hyper, k, g);
        }
    }
}

/// Optimal update of `q(chi_pg)` alone.
pub fn update_chi_pg(state: &mut VariationalState, hyper: &Hyperparameters, p: usize, g: usize) {
    let m = state.beta_mean[(p, g)];
    let beta2 = m * m + state.beta_var[(p, g)];
    state.chi_shape[(p, g)] = hyper.a_beta + 0.5;
    state.chi_rate[(p, g)] = hyper.b_beta + 0.5 * beta2;
}

/// One full sweep in the fixed order: feature block, latent positions,
/// noise precisions, interaction precisions.
pub fn sweep(state: &mut VariationalState, data: &Dataset, hyper: &Hyperparameters) {
    update_gene_block(state, data, hyper);
    update_z(state, data, hyper);
    update_tau(state, data, hyper);
    update_chi(state, hyper);
}
