//! Fuzzy C-Means clustering.
//!
//! Standard alternating optimisation of
//! `J = Σ_n Σ_k m_nk^p ‖x_n − c_k‖²` with fuzzifier `p > 1`: centers are the
//! `m^p`-weighted means, memberships are
//! `m_nk = 1 / Σ_j (d_nk / d_nj)^{2/(p−1)}`. A point lying on a center gets
//! membership 1 there and 0 elsewhere.

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    /// Cluster count; `None` means "one cluster per label".
    pub k: Option<usize>,
    pub fuzzifier: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        FcmConfig {
            k: None,
            fuzzifier: 2.0,
            tol: 1e-5,
            max_iter: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcmResult {
    pub centers: Array2<f64>,
    pub membership: Array2<f64>,
    pub iterations: usize,
    pub final_objective: f64,
    /// Objective after every completed iteration.
    pub objective_history: Vec<f64>,
    pub converged: bool,
}

fn squared_distances(x: ArrayView2<'_, f64>, centers: &Array2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let k = centers.nrows();
    let x = x.as_standard_layout();
    let c = centers.as_standard_layout();
    let (xs, cs) = (x.as_slice().expect("standard layout"), c.as_slice().expect("standard layout"));
    let mut out = Array2::zeros((n, k));
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let xi = &xs[i * d..(i + 1) * d];
        for (j, v) in row.iter_mut().enumerate() {
            *v = xi.iter().zip(&cs[j * d..(j + 1) * d]).map(|(a, b)| (a - b) * (a - b)).sum();
        }
    }
    out
}

/// `m^p`, with the common `p = 2` kept off the `powf` path.
fn fuzz_pow(m: f64, p: f64) -> f64 {
    if p == 2.0 {
        m * m
    } else {
        m.powf(p)
    }
}

fn update_centers(x: ArrayView2<'_, f64>, membership: &Array2<f64>, fuzzifier: f64) -> Array2<f64> {
    let weights = membership.mapv(|m| fuzz_pow(m, fuzzifier));
    let mut centers = weights.t().dot(&x);
    let totals: Array1<f64> = weights.sum_axis(ndarray::Axis(0));
    for (mut row, &t) in centers.rows_mut().into_iter().zip(totals.iter()) {
        if t > 0.0 {
            row.mapv_inplace(|v| v / t);
        }
    }
    centers
}

fn update_membership(dist2: &Array2<f64>, fuzzifier: f64) -> Array2<f64> {
    let exponent = 1.0 / (fuzzifier - 1.0);
    let (n, k) = dist2.dim();
    let mut out = Array2::zeros((n, k));
    for i in 0..n {
        let row = dist2.row(i);
        if let Some(hit) = row.iter().position(|&d| d == 0.0) {
            out[[i, hit]] = 1.0;
            continue;
        }
        if exponent == 1.0 {
            // p = 2: m_ij = (1/d_ij) / Σ_l (1/d_il)
            let inv_sum: f64 = row.iter().map(|&d| 1.0 / d).sum();
            for j in 0..k {
                out[[i, j]] = 1.0 / (row[j] * inv_sum);
            }
            continue;
        }
        for j in 0..k {
            // (d_ij / d_il)^{2/(p-1)} written on squared distances
            let denom: f64 = row.iter().map(|&dl| (row[j] / dl).powf(exponent)).sum();
            out[[i, j]] = 1.0 / denom;
        }
    }
    out
}

fn objective(dist2: &Array2<f64>, membership: &Array2<f64>, fuzzifier: f64) -> f64 {
    membership
        .iter()
        .zip(dist2.iter())
        .map(|(&m, &d)| fuzz_pow(m, fuzzifier) * d)
        .sum()
}

/// Fits `k` fuzzy clusters from a seeded random row-normalised start.
pub fn fcm_fit(
    features: &FeatureMatrix,
    k: usize,
    fuzzifier: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<FcmResult> {
    let x = features.view();
    let n = x.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("FCM needs at least one cluster".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "FCM asked for {k} clusters but only {n} instances are available"
        )));
    }
    if !(fuzzifier > 1.0 && fuzzifier.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "fuzzifier must be > 1, got {fuzzifier}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be > 0, got {tol}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership = Array2::from_shape_fn((n, k), |_| rng.random::<f64>() + f64::EPSILON);
    for mut row in membership.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }

    let mut centers = update_centers(x, &membership, fuzzifier);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        centers = update_centers(x, &membership, fuzzifier);
        let dist2 = squared_distances(x, &centers);
        let next = update_membership(&dist2, fuzzifier);
        history.push(objective(&dist2, &next, fuzzifier));
        let change = next
            .iter()
            .zip(membership.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        membership = next;
        if change < tol {
            converged = true;
            break;
        }
    }

    let final_objective = history.last().copied().unwrap_or_else(|| {
        objective(&squared_distances(x, &centers), &membership, fuzzifier)
    });
    Ok(FcmResult {
        centers,
        membership,
        iterations,
        final_objective,
        objective_history: history,
        converged,
    })
}

pub fn fcm_fit_with(features: &FeatureMatrix, k: usize, config: &FcmConfig) -> Result<FcmResult> {
    fcm_fit(features, k, config.fuzzifier, config.tol, config.max_iter, config.seed)
}

/// Per-row index of the highest membership (ties go to the lower index).
pub fn dominant_cluster(membership: ArrayView2<'_, f64>) -> Vec<usize> {
    membership
        .rows()
        .into_iter()
        .map(crate::dataset::argmax)
        .collect()
}
