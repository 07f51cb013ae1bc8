//! Cluster-weighted similarity graph and its normalised propagation matrix.
//!
//! The base similarity is a Gaussian kernel with a zero diagonal. Each entry
//! `(i, j)` is then multiplied by the membership of `j` in the dominant FCM
//! cluster of `i`, which pulls same-cluster neighbours closer. That product
//! is not symmetric, so by default it is averaged with its transpose before
//! normalisation.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// Median pairwise Euclidean distance of the instances.
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `Â^{-1/2} W Â^{-1/2}`.
    Symmetric,
    /// `Â^{-1} W`.
    RowStochastic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    pub bandwidth: Bandwidth,
    /// Keep only each vertex's `k` strongest edges (union over both ends).
    pub knn: Option<usize>,
    /// Average the cluster-weighted matrix with its transpose.
    pub symmetrize: bool,
    pub normalization: Normalization,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            bandwidth: Bandwidth::Median,
            knn: None,
            symmetrize: true,
            normalization: Normalization::Symmetric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightGraph {
    pub weights: Array2<f64>,
    pub degree: Array1<f64>,
    pub propagation: Array2<f64>,
    pub kernel_sigma: Option<f64>,
}

impl WeightGraph {
    pub fn len(&self) -> usize {
        self.weights.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn pairwise_squared(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let x = x.as_standard_layout();
    let flat = x.as_slice().expect("standard layout");
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        let xi = &flat[i * d..(i + 1) * d];
        for j in (i + 1)..n {
            let xj = &flat[j * d..(j + 1) * d];
            let v: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum();
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Median over all `i < j` of `‖x_i − x_j‖`.
pub fn median_pairwise_distance(features: &FeatureMatrix) -> Result<f64> {
    median_from_squared(&pairwise_squared(features.view()))
}

fn median_from_squared(d2: &Array2<f64>) -> Result<f64> {
    let n = d2.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "median heuristic needs at least two instances".into(),
        ));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for (i, row) in d2.rows().into_iter().enumerate() {
        dists.extend(row.iter().skip(i + 1).copied());
    }
    // sqrt is monotone, so select on squared distances and take roots at the end
    let m = dists.len();
    let (_, upper, _) = dists.select_nth_unstable_by(m / 2, f64::total_cmp);
    let upper = upper.sqrt();
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower = dists[..m / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower.sqrt() + upper)
    };
    Ok(median)
}

pub fn resolve_bandwidth(features: &FeatureMatrix, bandwidth: Bandwidth) -> Result<f64> {
    let sigma = match bandwidth {
        Bandwidth::Fixed(s) => s,
        Bandwidth::Median => median_pairwise_distance(features)?,
    };
    check_sigma(sigma)
}

fn check_sigma(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kernel bandwidth must be > 0, got {sigma}"
        )));
    }
    Ok(sigma)
}

/// `exp(−‖x_i − x_j‖² / 2σ²)` off the diagonal, 0 on it.
pub fn gaussian_similarity(features: &FeatureMatrix, sigma: f64) -> Result<Array2<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(gaussian_from_squared(pairwise_squared(features.view()), sigma))
}

fn gaussian_from_squared(mut d2: Array2<f64>, sigma: f64) -> Array2<f64> {
    let scale = 2.0 * sigma * sigma;
    d2.mapv_inplace(|v| (-v / scale).exp());
    d2.diag_mut().fill(0.0);
    d2
}

/// `w_ij = base_ij · m[j, dominant[i]]`.
pub fn cluster_weighted_similarity(
    base: ArrayView2<'_, f64>,
    membership: ArrayView2<'_, f64>,
    dominant: &[usize],
) -> Result<Array2<f64>> {
    let n = base.nrows();
    if base.ncols() != n || membership.nrows() != n || dominant.len() != n {
        return Err(Error::Shape(format!(
            "base {:?}, membership {:?}, {} dominant indices",
            base.dim(),
            membership.dim(),
            dominant.len()
        )));
    }
    if let Some(&k) = dominant.iter().find(|&&k| k >= membership.ncols()) {
        return Err(Error::Shape(format!(
            "dominant cluster {k} out of range for {} clusters",
            membership.ncols()
        )));
    }
    let mut w = base.to_owned();
    for (mut row, &k) in w.rows_mut().into_iter().zip(dominant) {
        row.zip_mut_with(&membership.column(k), |v, &m| *v *= m);
    }
    Ok(w)
}

pub fn symmetrize(weights: ArrayView2<'_, f64>) -> Array2<f64> {
    (&weights + &weights.t()) * 0.5
}

/// Kernel, cluster weighting and symmetrisation fused into one pass over
/// the upper triangle; same values as the three separate steps.
fn symmetric_cluster_weights(
    mut d2: Array2<f64>,
    sigma: f64,
    membership: ArrayView2<'_, f64>,
    dominant: &[usize],
) -> Result<Array2<f64>> {
    let n = d2.nrows();
    if membership.nrows() != n || dominant.iter().any(|&k| k >= membership.ncols()) {
        return Err(Error::Shape(format!(
            "membership {:?} does not match {n} instances",
            membership.dim()
        )));
    }
    let scale = 2.0 * sigma * sigma;
    for i in 0..n {
        d2[[i, i]] = 0.0;
        for j in (i + 1)..n {
            let e = (-d2[[i, j]] / scale).exp();
            let v = 0.5 * (e * membership[[j, dominant[i]]] + e * membership[[i, dominant[j]]]);
            d2[[i, j]] = v;
            d2[[j, i]] = v;
        }
    }
    Ok(d2)
}

/// Zeroes every edge that is not among the `k` heaviest of either endpoint.
pub fn knn_sparsify(weights: ArrayView2<'_, f64>, k: usize) -> Array2<f64> {
    let n = weights.nrows();
    let mut keep = Array2::from_elem((n, n), false);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| weights[[i, b]].total_cmp(&weights[[i, a]]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            keep[[i, j]] = true;
            keep[[j, i]] = true;
        }
    }
    Array2::from_shape_fn((n, n), |(i, j)| if keep[[i, j]] { weights[[i, j]] } else { 0.0 })
}

/// Degree vector and normalised propagation matrix of `weights`. Vertices
/// with zero degree get zero rows and columns.
pub fn build_propagation(weights: Array2<f64>, normalization: Normalization) -> Result<WeightGraph> {
    let n = weights.nrows();
    if weights.ncols() != n {
        return Err(Error::Shape(format!("weight matrix is {:?}, not square", weights.dim())));
    }
    if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::Validation("weights must be finite and nonnegative".into()));
    }
    if weights.diag().iter().any(|&w| w != 0.0) {
        return Err(Error::Validation("weight matrix must have a zero diagonal".into()));
    }
    let degree = weights.sum_axis(ndarray::Axis(1));
    if degree.iter().all(|&d| d == 0.0) {
        return Err(Error::Validation("weight matrix has no edges".into()));
    }
    let mut propagation = weights.clone();
    match normalization {
        Normalization::Symmetric => {
            for (i, mut row) in propagation.rows_mut().into_iter().enumerate() {
                row.zip_mut_with(&degree, |w, &dj| {
                    let dd = degree[i] * dj;
                    *w = if dd > 0.0 { *w / dd.sqrt() } else { 0.0 };
                });
            }
        }
        Normalization::RowStochastic => {
            for (mut row, &di) in propagation.rows_mut().into_iter().zip(degree.iter()) {
                if di > 0.0 {
                    row.mapv_inplace(|w| w / di);
                } else {
                    row.fill(0.0);
                }
            }
        }
    }
    Ok(WeightGraph {
        weights,
        degree,
        propagation,
        kernel_sigma: None,
    })
}

/// Full graph construction from (already scaled) features and an FCM
/// membership matrix.
pub fn build_weight_graph(
    features: &FeatureMatrix,
    membership: ArrayView2<'_, f64>,
    config: &GraphConfig,
) -> Result<WeightGraph> {
    let d2 = pairwise_squared(features.view());
    let sigma = check_sigma(match config.bandwidth {
        Bandwidth::Fixed(s) => s,
        Bandwidth::Median => median_from_squared(&d2)?,
    })?;
    let dominant = crate::fcm::dominant_cluster(membership);
    let mut w = if config.symmetrize {
        symmetric_cluster_weights(d2, sigma, membership, &dominant)?
    } else {
        cluster_weighted_similarity(gaussian_from_squared(d2, sigma).view(), membership, &dominant)?
    };
    if let Some(k) = config.knn {
        if k == 0 {
            return Err(Error::InvalidParameter("graph knn must be at least 1".into()));
        }
        w = knn_sparsify(w.view(), k);
    }
    let mut graph = build_propagation(w, config.normalization)?;
    graph.kernel_sigma = Some(sigma);
    Ok(graph)
}
