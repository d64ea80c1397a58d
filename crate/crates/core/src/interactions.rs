//! Calling trajectory-by-covariate interactions from the `beta` posterior.
//!
//! An interaction `(p, g)` is significant when zero lies outside
//! `m +/- k s`, with `m` and `s` the posterior mean and standard deviation of
//! `beta_pg`. Mean-field posteriors tend to be too narrow, so the call is
//! anti-conservative.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::model::VariationalState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InteractionError {
    #[error("significance multiplier must be positive and finite, got {0}")]
    InvalidMultiplier(f64),
    #[error("{what} has {found} names, expected {expected}")]
    LabelMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Posterior summary of one `(covariate, feature)` interaction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interaction {
    pub covariate_index: usize,
    pub covariate: String,
    pub feature_index: usize,
    pub feature: String,
    pub beta_mean: f64,
    pub beta_sd: f64,
    /// Posterior mean of the interaction variance `1 / chi_pg`.
    pub chi_inverse_mean: f64,
    pub significant: bool,
}

impl Interaction {
    /// `|m| / s`, the ranking key.
    pub fn z_score(&self) -> f64 {
        self.beta_mean.abs() / self.beta_sd
    }
}

/// An entry whose `chi` shape is at most one, so `E[1 / chi]` is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeTooSmall {
    pub covariate_index: usize,
    pub feature_index: usize,
    pub shape: f64,
}

/// Interactions of a fit plus the entries that could not be summarized.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionSet {
    pub interactions: Vec<Interaction>,
    pub excluded: Vec<ShapeTooSmall>,
}

impl InteractionSet {
    pub fn significant(&self) -> impl Iterator<Item = &Interaction> {
        self.interactions.iter().filter(|i| i.significant)
    }

    /// Number of features with at least one significant covariate.
    pub fn significant_feature_count(&self) -> usize {
        let mut features: Vec<usize> = self.significant().map(|i| i.feature_index).collect();
        features.sort_unstable();
        features.dedup();
        features.len()
    }
}

/// The significance rule: `m - k s > 0` or `m + k s < 0`.
#[inline]
pub fn is_significant(mean: f64, sd: f64, multiplier: f64) -> bool {
    mean - multiplier * sd > 0.0 || mean + multiplier * sd < 0.0
}

/// Summarizes every `beta_pg` of `state`, in `(covariate, feature)` order.
pub fn significant_interactions(
    state: &VariationalState,
    covariate_names: &[String],
    feature_names: &[String],
    multiplier: f64,
) -> Result<InteractionSet, InteractionError> {
    if !(multiplier > 0.0 && multiplier.is_finite()) {
        return Err(InteractionError::InvalidMultiplier(multiplier));
    }
    if covariate_names.len() != state.p() {
        return Err(InteractionError::LabelMismatch {
            what: "covariates",
            expected: state.p(),
            found: covariate_names.len(),
        });
    }
    if feature_names.len() != state.g() {
        return Err(InteractionError::LabelMismatch {
            what: "features",
            expected: state.g(),
            found: feature_names.len(),
        });
    }
    let mut set = InteractionSet::default();
    for p in 0..state.p() {
        for g in 0..state.g() {
            let shape = state.chi_shape[(p, g)];
            if shape <= 1.0 {
                set.excluded.push(ShapeTooSmall {
                    covariate_index: p,
                    feature_index: g,
                    shape,
                });
                continue;
            }
            let beta_mean = state.beta_mean[(p, g)];
            let beta_sd = state.beta_var[(p, g)].sqrt();
            set.interactions.push(Interaction {
                covariate_index: p,
                covariate: covariate_names[p].clone(),
                feature_index: g,
                feature: feature_names[g].clone(),
                beta_mean,
                beta_sd,
                chi_inverse_mean: state.chi_rate[(p, g)] / (shape - 1.0),
                significant: is_significant(beta_mean, beta_sd, multiplier),
            });
        }
    }
    Ok(set)
}

/// Sorts by `|m| / s` descending; ties go to the lexicographically smaller
/// `(covariate, feature)` name pair, then index pair.
pub fn rank_interactions(mut interactions: Vec<Interaction>) -> Vec<Interaction> {
    interactions.sort_by(|a, b| {
        b.z_score()
            .partial_cmp(&a.z_score())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.covariate.cmp(&b.covariate))
            .then_with(|| a.feature.cmp(&b.feature))
            .then_with(|| a.covariate_index.cmp(&b.covariate_index))
            .then_with(|| a.feature_index.cmp(&b.feature_index))
    });
    interactions
}

/// One row of the `beta` versus `1 / chi` scatter table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaChiRow {
    pub covariate: String,
    pub feature: String,
    pub beta_mean: f64,
    pub chi_inverse_mean: f64,
    pub significant: bool,
}

/// Plot-ready rows, one per interaction, in input order.
pub fn export_beta_chi(interactions: &[Interaction]) -> Vec<BetaChiRow> {
    interactions
        .iter()
        .map(|i| BetaChiRow {
            covariate: i.covariate.clone(),
            feature: i.feature.clone(),
            beta_mean: i.beta_mean,
            chi_inverse_mean: i.chi_inverse_mean,
            significant: i.significant,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn interaction(feature: &str, m: f64, s: f64) -> Interaction {
        Interaction {
            covariate_index: 0,
            covariate: "msi".into(),
            feature_index: 0,
            feature: feature.into(),
            beta_mean: m,
            beta_sd: s,
            chi_inverse_mean: 0.1,
            significant: is_significant(m, s, 2.0),
        }
    }

    #[test]
    fn rule_examples() {
        assert!(is_significant(0.5, 0.1, 2.0));
        assert!(!is_significant(0.1, 0.2, 2.0));
        assert!(is_significant(-0.3, 0.1, 2.0));
        assert!(!is_significant(0.2, 0.1, 2.0));
    }

    #[test]
    fn ranking_by_ratio_then_name() {
        let ranked = rank_interactions(vec![interaction("a", 1.0, 0.1), interaction("b", 0.5, 0.01)]);
        assert_eq!(ranked[0].feature, "b");
        let ranked = rank_interactions(vec![interaction("z", 1.0, 0.5), interaction("m", -2.0, 1.0)]);
        assert_eq!(ranked[0].feature, "m");
        assert!(rank_interactions(Vec::new()).is_empty());
    }

    #[test]
    fn set_and_export_are_consistent() {
        let mut s = VariationalState::unit(3, 4, 2);
        s.beta_mean[(1, 2)] = 0.9;
        s.beta_var[(1, 2)] = 0.01;
        s.chi_shape.fill(6.5);
        s.chi_rate.fill(0.2);
        s.chi_shape[(0, 3)] = 0.8;
        let set = significant_interactions(&s, &names("x", 2), &names("f", 4), 2.0).unwrap();
        assert_eq!(set.interactions.len(), 2 * 4 - 1);
        assert_eq!(set.excluded.len(), 1);
        assert_eq!(set.significant_feature_count(), 1);
        let rows = export_beta_chi(&set.interactions);
        assert_eq!(rows.len(), set.interactions.len());
        for (row, i) in rows.iter().zip(&set.interactions) {
            assert_eq!(row.significant, i.significant);
            assert_eq!(row.feature, i.feature);
        }
        let hit = set.significant().next().unwrap();
        assert_eq!((hit.covariate.as_str(), hit.feature.as_str()), ("x1", "f2"));
        assert!((hit.chi_inverse_mean - 0.2 / 5.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_multiplier_and_labels() {
        let s = VariationalState::unit(3, 2, 1);
        assert!(significant_interactions(&s, &names("x", 1), &names("f", 2), 0.0).is_err());
        assert!(significant_interactions(&s, &names("x", 2), &names("f", 2), 2.0).is_err());
    }

    proptest! {
        #[test]
        fn scale_invariance(m in -5.0f64..5.0, s in 0.01f64..3.0, scale in 0.01f64..100.0, k in 0.5f64..4.0) {
            // both sides of the inequality scale by the same positive factor
            let a = is_significant(m, s, k);
            let b = is_significant(m * scale, s * scale, k);
            let ratio = (m.abs() / s - k).abs();
            prop_assume!(ratio > 1e-9);
            prop_assert_eq!(a, b);
        }
    }
}
