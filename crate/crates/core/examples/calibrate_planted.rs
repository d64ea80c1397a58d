//! Runs the planted-interaction benchmark over a range of seeds and prints
//! latent correlation, precision, recall and the false-positive rate.

use clvm::cavi::{fit, FitConfig};
use clvm::interactions::significant_interactions;
use clvm::model::{simulate, Dataset, SyntheticSpec};
use nalgebra::DVector;

fn pearson(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let a = a.add_scalar(-a.mean());
    let b = b.add_scalar(-b.mean());
    a.dot(&b) / (a.norm() * b.norm())
}

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let (mut tp, mut fp, mut fneg, mut nulls) = (0, 0, 0, 0);
    for seed in 0..seeds {
        let mut spec = SyntheticSpec::new(200, 50, 1, seed);
        spec.tau = Some(10.0);
        spec.planted_fraction = Some(0.1);
        let sim = simulate(&spec).unwrap();
        let data = Dataset::unlabeled(sim.draw.y.clone(), sim.x.clone())
            .unwrap()
            .center_columns();
        let result = fit(&data, &FitConfig::default()).unwrap();
        let l = data.labels();
        let set = significant_interactions(&result.state, &l.covariate_names, &l.feature_names, 2.0)
            .unwrap();
        let (mut stp, mut sfp) = (0, 0);
        for it in &set.interactions {
            let planted = sim.planted.contains(&(it.covariate_index, it.feature_index));
            match (it.significant, planted) {
                (true, true) => stp += 1,
                (true, false) => sfp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
            if !planted {
                nulls += 1;
            }
        }
        tp += stp;
        fp += sfp;
        println!(
            "seed {seed:3}: corr {:.4} tp {stp} fp {sfp} iters {} converged {}",
            pearson(&result.state.z_mean, &sim.draw.true_z).abs(),
            result.iterations_run,
            result.converged
        );
    }
    let precision = tp as f64 / (tp + fp).max(1) as f64;
    let recall = tp as f64 / (tp + fneg).max(1) as f64;
    println!(
        "pooled precision {precision:.3} recall {recall:.3} false-positive rate {:.4}",
        fp as f64 / nulls as f64
    );
}
