//! Single-label KNN on fuzzy labels (FLEL-SL-KNN) and the classic
//! majority-vote KNN baseline.
//!
//! The fuzzy predictor averages the neighbors' fuzzy label rows with weights
//! `1/(d + ε)` and predicts the column with the largest value. Fed one-hot
//! labels it becomes distance-weighted soft-voting KNN.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{argmax, FeatureMatrix, FuzzyLabelMatrix, LogicalLabelMatrix};
use crate::error::{Error, Result};
use crate::knn::{nearest, Neighbor};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const K_GRID: [usize; 7] = [1, 3, 5, 7, 9, 11, 13];

/// Voting rule of the plain KNN baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BaselineRule {
    /// Unweighted majority vote.
    #[default]
    Majority,
    /// The fuzzy predictor fed one-hot labels.
    Soft,
}

impl fmt::Display for BaselineRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineRule::Majority => "majority",
            BaselineRule::Soft => "soft",
        })
    }
}

impl FromStr for BaselineRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(BaselineRule::Majority),
            "soft" => Ok(BaselineRule::Soft),
            other => Err(Error::InvalidParameter(format!(
                "unknown baseline rule {other:?}, expected majority or soft"
            ))),
        }
    }
}

/// Weighted average of neighbor label rows, weights `1/(d + ε)`.
pub fn weighted_vote(neighbors: &[Neighbor], labels: ArrayView2<'_, f64>, epsilon: f64) -> Array1<f64> {
    let mut acc = Array1::zeros(labels.ncols());
    let mut total = 0.0;
    for n in neighbors {
        let w = 1.0 / (n.distance + epsilon);
        acc.scaled_add(w, &labels.row(n.index));
        total += w;
    }
    if total > 0.0 {
        acc /= total;
    }
    acc
}

/// Vote shares of an unweighted majority vote; the predicted class is the
/// argmax (ties toward the lower class index).
pub fn majority_shares(neighbors: &[Neighbor], classes: &[usize], n_classes: usize) -> Array1<f64> {
    let mut votes = Array1::zeros(n_classes);
    for n in neighbors {
        votes[classes[n.index]] += 1.0;
    }
    if !neighbors.is_empty() {
        votes /= neighbors.len() as f64;
    }
    votes
}

fn check_k(k: usize, n_train: usize) -> Result<()> {
    if k == 0 || k > n_train {
        return Err(Error::InvalidParameter(format!(
            "K must lie in 1..={n_train}, got {k}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SingleLabelModel {
    train_features: FeatureMatrix,
    train_fuzzy: FuzzyLabelMatrix,
    k_neighbors: usize,
    epsilon: f64,
}

impl SingleLabelModel {
    pub fn new(
        train_features: FeatureMatrix,
        train_fuzzy: FuzzyLabelMatrix,
        k_neighbors: usize,
        epsilon: f64,
    ) -> Result<Self> {
        if train_features.nrows() != train_fuzzy.nrows() {
            return Err(Error::Shape(format!(
                "{} training rows but {} label rows",
                train_features.nrows(),
                train_fuzzy.nrows()
            )));
        }
        check_k(k_neighbors, train_features.nrows())?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be > 0, got {epsilon}")));
        }
        Ok(SingleLabelModel {
            train_features,
            train_fuzzy,
            k_neighbors,
            epsilon,
        })
    }

    /// Baseline degeneration: one-hot logical labels used as fuzzy labels.
    pub fn from_logical(
        train_features: FeatureMatrix,
        logical: &LogicalLabelMatrix,
        k_neighbors: usize,
        epsilon: f64,
    ) -> Result<Self> {
        Self::new(train_features, FuzzyLabelMatrix::from(logical), k_neighbors, epsilon)
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn neighbor_search(&self, query: ArrayView1<'_, f64>) -> Result<Vec<Neighbor>> {
        nearest(self.train_features.view(), query, self.k_neighbors, None)
    }

    pub fn predict_fuzzy(&self, query: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let neighbors = self.neighbor_search(query)?;
        Ok(weighted_vote(&neighbors, self.train_fuzzy.view(), self.epsilon))
    }

    pub fn predict_class(&self, query: ArrayView1<'_, f64>) -> Result<usize> {
        Ok(argmax(self.predict_fuzzy(query)?.view()))
    }

    /// Fuzzy predictions for every query row.
    pub fn predict_fuzzy_batch(&self, queries: &FeatureMatrix) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((queries.nrows(), self.train_fuzzy.ncols()));
        for (i, q) in queries.view().rows().into_iter().enumerate() {
            out.row_mut(i).assign(&self.predict_fuzzy(q)?);
        }
        Ok(out)
    }
}

/// Classic KNN: unweighted majority vote among the K nearest neighbors.
#[derive(Debug, Clone)]
pub struct MajorityKnn {
    train_features: FeatureMatrix,
    classes: Vec<usize>,
    n_classes: usize,
    k_neighbors: usize,
}

impl MajorityKnn {
    pub fn new(train_features: FeatureMatrix, logical: &LogicalLabelMatrix, k_neighbors: usize) -> Result<Self> {
        if train_features.nrows() != logical.nrows() {
            return Err(Error::Shape(format!(
                "{} training rows but {} label rows",
                train_features.nrows(),
                logical.nrows()
            )));
        }
        if !logical.is_one_hot() {
            return Err(Error::Validation("majority KNN needs one-hot labels".into()));
        }
        check_k(k_neighbors, train_features.nrows())?;
        Ok(MajorityKnn {
            train_features,
            classes: logical.class_indices(),
            n_classes: logical.ncols(),
            k_neighbors,
        })
    }

    pub fn vote_shares(&self, query: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let neighbors = nearest(self.train_features.view(), query, self.k_neighbors, None)?;
        Ok(majority_shares(&neighbors, &self.classes, self.n_classes))
    }

    pub fn predict_class(&self, query: ArrayView1<'_, f64>) -> Result<usize> {
        Ok(argmax(self.vote_shares(query)?.view()))
    }
}
