//! Test-only numerical oracles. Nothing here calls the closed-form updates.
#![allow(dead_code)]

use clvm::cavi::compute_elbo;
use clvm::model::{Dataset, Hyperparameters, VariationalState};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let a = a.add_scalar(-a.mean());
    let b = b.add_scalar(-b.mean());
    a.dot(&b) / (a.norm() * b.norm())
}

/// Prints one acceptance line and returns whether it passed. Goes straight
/// to the stderr handle so it shows up without `--nocapture`.
pub fn report(id: &str, name: &str, pass: bool, detail: impl std::fmt::Display) -> bool {
    use std::io::Write;
    let line = format!(
        "[{}] criterion {id}: {name} -- {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    pass
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal `f` starting from `x0`: expands a bracket with
/// initial width `step`, then runs golden-section search to `tol`.
pub fn golden_max(f: &mut impl FnMut(f64) -> f64, x0: f64, step: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (x0 - step, x0 + step);
    let mut fa = f(a);
    let mut fb = f(b);
    let f0 = f(x0);
    // widen until the start point dominates both ends
    let mut width = step;
    while fa > f0 || fb > f0 {
        width *= 2.0;
        if fa > f0 {
            a = x0 - width;
            fa = f(a);
        }
        if fb > f0 {
            b = x0 + width;
            fb = f(b);
        }
        assert!(width < 1e12, "failed to bracket maximum");
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Nelder-Mead maximization in two dimensions.
pub fn nelder_mead_max(f: &mut impl FnMut([f64; 2]) -> f64, x0: [f64; 2], step: f64) -> [f64; 2] {
    let mut simplex = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]];
    let mut values = simplex.map(|p| -f(p));
    for _ in 0..20_000 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let (best, mid, worst) = (order[0], order[1], order[2]);
        let spread = (values[worst] - values[best]).abs();
        let size = (0..2)
            .map(|k| {
                (simplex[worst][k] - simplex[best][k])
                    .abs()
                    .max((simplex[mid][k] - simplex[best][k]).abs())
            })
            .fold(0.0, f64::max);
        if spread < 1e-15 * (1.0 + values[best].abs()) && size < 1e-10 {
            return simplex[best];
        }
        let centroid = [
            0.5 * (simplex[best][0] + simplex[mid][0]),
            0.5 * (simplex[best][1] + simplex[mid][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[worst][0] - centroid[0]),
                centroid[1] + t * (simplex[worst][1] - centroid[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = -f(xr);
        if fr < values[best] {
            let xe = along(-2.0);
            let fe = -f(xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let xc = if fr < values[worst] { along(-0.5) } else { along(0.5) };
            let fc = -f(xc);
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                for i in [mid, worst] {
                    for k in 0..2 {
                        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                    }
                    values[i] = -f(simplex[i]);
                }
            }
        }
    }
    panic!("Nelder-Mead did not converge");
}

/// The seven variational factor families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Z,
    Mu,
    Tau,
    C,
    Alpha,
    Beta,
    Chi,
}

pub const FAMILIES: [Family; 7] = [
    Family::Z,
    Family::Mu,
    Family::Tau,
    Family::C,
    Family::Alpha,
    Family::Beta,
    Family::Chi,
];

/// A coordinate: the family plus `(row, col)` (`row` is `i`, `g` or `p`).
#[derive(Debug, Clone, Copy)]
pub struct Coord {
    pub family: Family,
    pub a: usize,
    pub b: usize,
}

/// `(first, second)` parameters of a factor: (mean, variance) for Gaussians,
/// (shape, rate) for Gammas.
pub fn get(s: &VariationalState, c: Coord) -> (f64, f64) {
    match c.family {
        Family::Z => (s.z_mean[c.a], s.z_var[c.a]),
        Family::Mu => (s.mu_mean[c.a], s.mu_var[c.a]),
        Family::C => (s.c_mean[c.a], s.c_var[c.a]),
        Family::Tau => (s.tau_shape[c.a], s.tau_rate[c.a]),
        Family::Alpha => (s.alpha_mean[(c.a, c.b)], s.alpha_var[(c.a, c.b)]),
        Family::Beta => (s.beta_mean[(c.a, c.b)], s.beta_var[(c.a, c.b)]),
        Family::Chi => (s.chi_shape[(c.a, c.b)], s.chi_rate[(c.a, c.b)]),
    }
}

pub fn set(s: &mut VariationalState, c: Coord, v: (f64, f64)) {
    match c.family {
        Family::Z => (s.z_mean[c.a], s.z_var[c.a]) = v,
        Family::Mu => (s.mu_mean[c.a], s.mu_var[c.a]) = v,
        Family::C => (s.c_mean[c.a], s.c_var[c.a]) = v,
        Family::Tau => (s.tau_shape[c.a], s.tau_rate[c.a]) = v,
        Family::Alpha => {
            s.alpha_mean[(c.a, c.b)] = v.0;
            s.alpha_var[(c.a, c.b)] = v.1;
        }
        Family::Beta => {
            s.beta_mean[(c.a, c.b)] = v.0;
            s.beta_var[(c.a, c.b)] = v.1;
        }
        Family::Chi => {
            s.chi_shape[(c.a, c.b)] = v.0;
            s.chi_rate[(c.a, c.b)] = v.1;
        }
    }
}

/// Numerically maximizes the ELBO over one factor, all others fixed.
///
/// Gaussian factors: alternating golden-section search over the mean and
/// the log-variance (the ELBO is separable in these two). Gamma factors:
/// Nelder-Mead over (log-shape, log-rate).
pub fn numerical_argmax(
    state: &VariationalState,
    data: &Dataset,
    hyper: &Hyperparameters,
    c: Coord,
) -> (f64, f64) {
    let mut work = state.clone();
    let mut elbo = |v: (f64, f64)| {
        set(&mut work, c, v);
        compute_elbo(&work, data, hyper).unwrap_or(f64::NEG_INFINITY)
    };
    let (mut m, mut v) = get(state, c);
    match c.family {
        Family::Tau | Family::Chi => {
            let best = nelder_mead_max(
                &mut |p: [f64; 2]| elbo((p[0].exp(), p[1].exp())),
                [m.ln(), v.ln()],
                0.5,
            );
            (best[0].exp(), best[1].exp())
        }
        _ => {
            for _ in 0..3 {
                m = golden_max(&mut |t| elbo((t, v)), m, 0.5, 1e-10);
                let lv = golden_max(&mut |t| elbo((m, t.exp())), v.ln(), 0.5, 1e-10);
                v = lv.exp();
            }
            (m, v)
        }
    }
}

/// Random small dataset with `P` continuous covariates, centered.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, g: usize, p: usize) -> Dataset {
    let x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.5..1.5));
    let y = DMatrix::from_fn(n, g, |_, _| rng.random_range(-2.0..2.0));
    Dataset::unlabeled(y, x).unwrap().center_columns()
}

/// A valid state with every parameter randomized.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, g: usize, p: usize) -> VariationalState {
    let mut s = VariationalState::unit(n, g, p);
    let pos = |rng: &mut ChaCha8Rng| rng.random_range(0.05..1.0);
    for i in 0..n {
        s.z_mean[i] = rng.random_range(-1.5..1.5);
        s.z_var[i] = pos(rng);
    }
    for j in 0..g {
        s.mu_mean[j] = rng.random_range(-1.0..1.0);
        s.mu_var[j] = pos(rng);
        s.c_mean[j] = rng.random_range(-1.0..1.0);
        s.c_var[j] = pos(rng);
        s.tau_shape[j] = rng.random_range(1.0..8.0);
        s.tau_rate[j] = rng.random_range(0.5..4.0);
        for k in 0..p {
            s.alpha_mean[(k, j)] = rng.random_range(-1.0..1.0);
            s.alpha_var[(k, j)] = pos(rng);
            s.beta_mean[(k, j)] = rng.random_range(-1.0..1.0);
            s.beta_var[(k, j)] = pos(rng);
            s.chi_shape[(k, j)] = rng.random_range(1.0..8.0);
            s.chi_rate[(k, j)] = rng.random_range(0.1..2.0);
        }
    }
    s
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Relative agreement with a small absolute floor for values near zero.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-3)
}
