//! Multi-label KNN on fuzzy labels (FLEL-ML-KNN) and its ML-KNN
//! degeneration.
//!
//! Priors come from the column sums of the training fuzzy labels. For a
//! query, each label's neighbors are split into those whose membership
//! exceeds the threshold (`count_l`) and the rest (`countN_l`). The smoothed
//! conditionals are
//!
//! ```text
//! P_cond_l  = (s + count_l)  / (s(K+1) + Σ_l count_l)
//! P_condN_l = (s + countN_l) / (s(K+1) + Σ_l countN_l)
//! ```
//!
//! and the posterior is the two-hypothesis Bayes ratio. Two alternative
//! readings are kept for comparison:
//!
//! * [`MlknnVariant::AsPrinted`]: counts use `u ≤ σ` for `count_l` (and
//!   `u > σ` for `countN_l`), and the posterior denominator is
//!   `P_prior(l)·count_l + P_prior(¬l)·P_condN_l`.
//! * [`MlknnVariant::Classic`]: Zhang and Zhou's ML-KNN, where the
//!   conditionals are per-label histograms of leave-one-out neighbor counts
//!   over the training set.

use std::fmt;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMatrix, FuzzyLabelMatrix};
use crate::error::{Error, Result};
use crate::knn::{nearest, Neighbor, NeighborTable};

pub const K_GRID: [usize; 6] = [1, 3, 5, 7, 9, 13];
pub const SMOOTH_GRID: [f64; 5] = [0.01, 0.03, 0.05, 0.07, 0.09];
pub const DEFAULT_SMOOTHING: f64 = 0.05;
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MlknnVariant {
    #[default]
    Fuzzy,
    AsPrinted,
    Classic,
}

impl fmt::Display for MlknnVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MlknnVariant::Fuzzy => "fuzzy",
            MlknnVariant::AsPrinted => "as-printed",
            MlknnVariant::Classic => "classic",
        })
    }
}

fn check_smoothing(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("smoothing must be > 0, got {s}")));
    }
    Ok(())
}

fn check_threshold(t: f64) -> Result<()> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold must lie in (0, 1), got {t}")));
    }
    Ok(())
}

/// `(Σ_n u_n^l + s) / (N + 2s)` per label.
pub fn fit_priors(train_fuzzy: ArrayView2<'_, f64>, smoothing: f64) -> Result<Array1<f64>> {
    check_smoothing(smoothing)?;
    let n = train_fuzzy.nrows() as f64;
    Ok(train_fuzzy
        .sum_axis(ndarray::Axis(0))
        .mapv(|c| (c + smoothing) / (n + 2.0 * smoothing)))
}

/// Per label `(count_l, countN_l)` over the given neighbors. A neighbor
/// belongs to label `l` when `u^l > threshold`; `as_printed` flips the
/// comparison. The pair always sums to the neighbor count.
pub fn neighborhood_counts(
    neighbors: &[Neighbor],
    train_fuzzy: ArrayView2<'_, f64>,
    threshold: f64,
    as_printed: bool,
) -> Vec<(usize, usize)> {
    let k = neighbors.len();
    (0..train_fuzzy.ncols())
        .map(|l| {
            let above = neighbors
                .iter()
                .filter(|n| train_fuzzy[[n.index, l]] > threshold)
                .count();
            let count = if as_printed { k - above } else { above };
            (count, k - count)
        })
        .collect()
}

/// Smoothed `(P_cond_l, P_condN_l)` with denominators summed over labels.
pub fn conditional_probabilities(counts: &[(usize, usize)], k: usize, smoothing: f64) -> Vec<(f64, f64)> {
    let sum_in: usize = counts.iter().map(|c| c.0).sum();
    let sum_out: usize = counts.iter().map(|c| c.1).sum();
    let base = smoothing * (k as f64 + 1.0);
    let (den_in, den_out) = (base + sum_in as f64, base + sum_out as f64);
    counts
        .iter()
        .map(|&(c, n)| ((smoothing + c as f64) / den_in, (smoothing + n as f64) / den_out))
        .collect()
}

/// `prior·P_cond / (prior·P_cond + (1 − prior)·P_condN)`.
pub fn bayes_posterior(prior: f64, p_cond: f64, p_cond_n: f64) -> f64 {
    let hit = prior * p_cond;
    hit / (hit + (1.0 - prior) * p_cond_n)
}

/// The posterior with `prior·count_l` in place of `prior·P_cond` in the
/// denominator. Not a probability in general.
pub fn printed_posterior(prior: f64, p_cond: f64, p_cond_n: f64, count: usize) -> f64 {
    prior * p_cond / (prior * count as f64 + (1.0 - prior) * p_cond_n)
}

/// Per-label likelihood tables of classic ML-KNN, indexed `[label, c]` for
/// neighbor counts `c = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicTables {
    pub given_label: Array2<f64>,
    pub given_not_label: Array2<f64>,
}

/// Builds the classic ML-KNN histograms from leave-one-out neighbor lists.
pub fn fit_classic(
    train_fuzzy: ArrayView2<'_, f64>,
    loo: &NeighborTable,
    k: usize,
    smoothing: f64,
    threshold: f64,
) -> ClassicTables {
    let l_count = train_fuzzy.ncols();
    let mut hist_in = Array2::<f64>::zeros((l_count, k + 1));
    let mut hist_out = Array2::<f64>::zeros((l_count, k + 1));
    for i in 0..train_fuzzy.nrows() {
        let counts = neighborhood_counts(loo.get(i, k), train_fuzzy, threshold, false);
        for (l, &(c, _)) in counts.iter().enumerate() {
            if train_fuzzy[[i, l]] > threshold {
                hist_in[[l, c]] += 1.0;
            } else {
                hist_out[[l, c]] += 1.0;
            }
        }
    }
    let normalise = |hist: &Array2<f64>| {
        let mut out = hist.clone();
        for (mut row, src) in out.rows_mut().into_iter().zip(hist.rows()) {
            let den = smoothing * (k as f64 + 1.0) + src.sum();
            row.mapv_inplace(|v| (smoothing + v) / den);
        }
        out
    };
    ClassicTables {
        given_label: normalise(&hist_in),
        given_not_label: normalise(&hist_out),
    }
}

#[derive(Debug, Clone)]
pub struct MultiLabelModel {
    train_features: FeatureMatrix,
    train_fuzzy: FuzzyLabelMatrix,
    k_neighbors: usize,
    smoothing: f64,
    threshold: f64,
    priors: Array1<f64>,
    variant: MlknnVariant,
    classic: Option<ClassicTables>,
}

impl MultiLabelModel {
    pub fn fit(
        train_features: FeatureMatrix,
        train_fuzzy: FuzzyLabelMatrix,
        k_neighbors: usize,
        smoothing: f64,
        threshold: f64,
        variant: MlknnVariant,
    ) -> Result<Self> {
        Self::fit_with_loo(train_features, train_fuzzy, k_neighbors, smoothing, threshold, variant, None)
    }

    /// As [`fit`](Self::fit), reusing precomputed leave-one-out neighbor
    /// lists (with at least `k_neighbors` entries) for the classic variant.
    pub fn fit_with_loo(
        train_features: FeatureMatrix,
        train_fuzzy: FuzzyLabelMatrix,
        k_neighbors: usize,
        smoothing: f64,
        threshold: f64,
        variant: MlknnVariant,
        loo: Option<&NeighborTable>,
    ) -> Result<Self> {
        let n = train_features.nrows();
        if n != train_fuzzy.nrows() {
            return Err(Error::Shape(format!(
                "{n} training rows but {} label rows",
                train_fuzzy.nrows()
            )));
        }
        check_smoothing(smoothing)?;
        check_threshold(threshold)?;
        let limit = if variant == MlknnVariant::Classic { n.saturating_sub(1) } else { n };
        if k_neighbors == 0 || k_neighbors > limit {
            return Err(Error::InvalidParameter(format!(
                "K must lie in 1..={limit}, got {k_neighbors}"
            )));
        }
        let priors = fit_priors(train_fuzzy.view(), smoothing)?;
        let classic = if variant == MlknnVariant::Classic {
            let owned;
            let loo = match loo {
                Some(t) if t.k_max() >= k_neighbors && t.len() == n => t,
                _ => {
                    owned = NeighborTable::build_loo(&train_features, k_neighbors)?;
                    &owned
                }
            };
            Some(fit_classic(train_fuzzy.view(), loo, k_neighbors, smoothing, threshold))
        } else {
            None
        };
        Ok(MultiLabelModel {
            train_features,
            train_fuzzy,
            k_neighbors,
            smoothing,
            threshold,
            priors,
            variant,
            classic,
        })
    }

    /// ML-KNN: the same pipeline fed the logical labels as {0, 1} memberships.
    pub fn fit_baseline_mlknn(train: &Dataset, k_neighbors: usize, smoothing: f64) -> Result<Self> {
        Self::fit(
            train.features().clone(),
            FuzzyLabelMatrix::from(train.logical()),
            k_neighbors,
            smoothing,
            DEFAULT_THRESHOLD,
            MlknnVariant::Fuzzy,
        )
    }

    pub fn priors(&self) -> ArrayView1<'_, f64> {
        self.priors.view()
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn variant(&self) -> MlknnVariant {
        self.variant
    }

    pub fn label_count(&self) -> usize {
        self.train_fuzzy.ncols()
    }

    pub fn neighbor_search(&self, query: ArrayView1<'_, f64>) -> Result<Vec<Neighbor>> {
        nearest(self.train_features.view(), query, self.k_neighbors, None)
    }

    pub fn neighborhood_counts(&self, query: ArrayView1<'_, f64>) -> Result<Vec<(usize, usize)>> {
        let neighbors = self.neighbor_search(query)?;
        Ok(neighborhood_counts(
            &neighbors,
            self.train_fuzzy.view(),
            self.threshold,
            self.variant == MlknnVariant::AsPrinted,
        ))
    }

    /// Posteriors from an already computed neighbor list (first K used).
    pub fn posteriors_from_neighbors(&self, neighbors: &[Neighbor]) -> Array1<f64> {
        let neighbors = &neighbors[..self.k_neighbors.min(neighbors.len())];
        let k = neighbors.len();
        let as_printed = self.variant == MlknnVariant::AsPrinted;
        let counts = neighborhood_counts(neighbors, self.train_fuzzy.view(), self.threshold, as_printed);
        match (&self.classic, self.variant) {
            (Some(tables), _) => Array1::from_iter(counts.iter().enumerate().map(|(l, &(c, _))| {
                bayes_posterior(self.priors[l], tables.given_label[[l, c]], tables.given_not_label[[l, c]])
            })),
            (None, MlknnVariant::AsPrinted) => {
                let cond = conditional_probabilities(&counts, k, self.smoothing);
                Array1::from_iter(
                    cond.iter()
                        .zip(&counts)
                        .enumerate()
                        .map(|(l, (&(pc, pn), &(c, _)))| printed_posterior(self.priors[l], pc, pn, c)),
                )
            }
            (None, _) => {
                let cond = conditional_probabilities(&counts, k, self.smoothing);
                Array1::from_iter(
                    cond.iter()
                        .enumerate()
                        .map(|(l, &(pc, pn))| bayes_posterior(self.priors[l], pc, pn)),
                )
            }
        }
    }

    pub fn predict_fuzzy(&self, query: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        Ok(self.posteriors_from_neighbors(&self.neighbor_search(query)?))
    }

    pub fn predict_logical(&self, query: ArrayView1<'_, f64>) -> Result<Array1<u8>> {
        Ok(threshold_posteriors(self.predict_fuzzy(query)?.view(), self.threshold))
    }
}

/// `1` where the posterior is at least the threshold.
pub fn threshold_posteriors(posteriors: ArrayView1<'_, f64>, threshold: f64) -> Array1<u8> {
    posteriors.mapv(|p| u8::from(p >= threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn nb(indices: &[usize]) -> Vec<Neighbor> {
        indices
            .iter()
            .map(|&index| Neighbor { index, distance: 0.0 })
            .collect()
    }

    #[test]
    fn priors_match_hand_values() {
        let u = array![[0.5], [0.5], [0.5], [0.5]];
        assert!((fit_priors(u.view(), 0.05).unwrap()[0] - 0.5).abs() < 1e-15);
        let zeros = Array2::<f64>::zeros((100, 1));
        assert!((fit_priors(zeros.view(), 1.0).unwrap()[0] - 1.0 / 102.0).abs() < 1e-15);
        let ones = Array2::<f64>::ones((100, 1));
        assert!((fit_priors(ones.view(), 1.0).unwrap()[0] - 101.0 / 102.0).abs() < 1e-15);
        assert!(fit_priors(ones.view(), 0.0).is_err());
    }

    #[test]
    fn counts_use_strict_threshold() {
        let u = array![[0.9], [0.6], [0.2], [0.5]];
        assert_eq!(neighborhood_counts(&nb(&[0, 1, 2]), u.view(), 0.5, false), vec![(2, 1)]);
        assert_eq!(neighborhood_counts(&nb(&[2, 3]), u.view(), 0.5, false), vec![(0, 2)]);
        assert_eq!(neighborhood_counts(&nb(&[0, 1, 2]), u.view(), 0.5, true), vec![(1, 2)]);
    }

    #[test]
    fn conditionals_match_hand_values() {
        let c = conditional_probabilities(&[(2, 1)], 3, 1.0);
        assert!((c[0].0 - 0.5).abs() < 1e-15);
        let zero = conditional_probabilities(&[(0, 3), (0, 3)], 3, 0.05);
        assert!((zero[0].0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn bayes_hand_values() {
        assert!((bayes_posterior(0.5, 0.3, 0.3) - 0.5).abs() < 1e-15);
        assert!((bayes_posterior(0.4, 0.6, 0.2) - 2.0 / 3.0).abs() < 1e-15);
        assert!(bayes_posterior(0.5, 1.0, 1e-12) > 0.999_999);
    }

    #[test]
    fn logical_threshold_is_inclusive() {
        assert_eq!(threshold_posteriors(array![0.7, 0.3].view(), 0.5), array![1, 0]);
        assert_eq!(threshold_posteriors(array![0.5].view(), 0.5), array![1]);
        assert_eq!(threshold_posteriors(array![0.1, 0.2].view(), 0.5), array![0, 0]);
    }

    #[test]
    fn classic_tables_rows_are_distributions_up_to_smoothing() {
        let x = FeatureMatrix::new(array![[0.0], [0.1], [0.2], [5.0], [5.1], [5.2]]).unwrap();
        let u = FuzzyLabelMatrix::new(array![[1.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]])
            .unwrap();
        let m = MultiLabelModel::fit(x, u, 2, 1.0, 0.5, MlknnVariant::Classic).unwrap();
        let t = m.classic.as_ref().unwrap();
        assert!(t.given_label.iter().all(|&p| p > 0.0 && p < 1.0));
        let p = m.predict_fuzzy(array![0.05].view()).unwrap();
        assert!(p[0] > 0.5);
    }

    #[test]
    fn fit_validates_parameters() {
        let x = FeatureMatrix::new(array![[0.0], [1.0]]).unwrap();
        let u = FuzzyLabelMatrix::new(array![[1.0], [0.0]]).unwrap();
        assert!(MultiLabelModel::fit(x.clone(), u.clone(), 3, 0.05, 0.5, MlknnVariant::Fuzzy).is_err());
        assert!(MultiLabelModel::fit(x.clone(), u.clone(), 1, 0.05, 1.0, MlknnVariant::Fuzzy).is_err());
        assert!(MultiLabelModel::fit(x.clone(), u.clone(), 2, 0.05, 0.5, MlknnVariant::Classic).is_err());
        assert!(MultiLabelModel::fit(x, u, 2, 0.05, 0.5, MlknnVariant::Fuzzy).is_ok());
    }
}
