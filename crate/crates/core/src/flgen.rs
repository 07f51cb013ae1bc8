//! Fuzzy label generation by label propagation over the cluster-weighted
//! graph.
//!
//! Starting from `U⁽⁰⁾ = Y`, the update `U⁽ᵗ⁾ = αPU⁽ᵗ⁻¹⁾ + (1−α)Y` is applied
//! until the largest entry change drops below `tol`. Because the spectral
//! radius of `αP` is below one the iteration has the unique fixed point
//! `(1−α)(I − αP)⁻¹Y`, which [`fixed_point_oracle`] computes directly.
//!
//! Output memberships are clamped to [0, 1] by default; rows are never
//! renormalised.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMatrix, FuzzyLabelMatrix, LogicalLabelMatrix};
use crate::error::{Error, Result};
use crate::fcm::{fcm_fit_with, FcmConfig};
use crate::graph::{build_weight_graph, GraphConfig, WeightGraph};

/// Largest system the dense oracle accepts.
pub const ORACLE_MAX_N: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub clip: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            alpha: 0.5,
            tol: 1e-6,
            max_iter: 1000,
            clip: true,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Everything needed to turn logical labels into fuzzy labels.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FlGenConfig {
    pub fcm: FcmConfig,
    pub graph: GraphConfig,
    pub propagation: PropagationConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlGenOutput {
    /// Memberships, clamped to [0, 1] when clipping is on.
    pub memberships: Array2<f64>,
    pub iterations: usize,
    /// False when `max_iter` was reached before the change fell below `tol`.
    pub converged: bool,
    pub last_change: f64,
    pub kernel_sigma: Option<f64>,
    pub fcm_clusters: usize,
}

impl FlGenOutput {
    pub fn fuzzy(&self) -> Result<FuzzyLabelMatrix> {
        FuzzyLabelMatrix::new(self.memberships.clone())
    }
}

/// One application of `αPU + (1−α)Y`.
pub fn propagate_step(
    graph: &WeightGraph,
    u_prev: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    alpha: f64,
) -> Result<Array2<f64>> {
    let n = graph.len();
    if u_prev.nrows() != n || y.dim() != u_prev.dim() {
        return Err(Error::Shape(format!(
            "graph has {n} vertices, U is {:?}, Y is {:?}",
            u_prev.dim(),
            y.dim()
        )));
    }
    let mut next = graph.propagation.dot(&u_prev);
    next.zip_mut_with(&y, |p, &yv| *p = alpha * *p + (1.0 - alpha) * yv);
    Ok(next)
}

/// Iterates the propagation update on a prebuilt graph.
pub fn propagate(
    graph: &WeightGraph,
    y: &LogicalLabelMatrix,
    config: &PropagationConfig,
) -> Result<FlGenOutput> {
    config.validate()?;
    let y = y.to_f64();
    let mut u = y.clone();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    while iterations < config.max_iter {
        let next = propagate_step(graph, u.view(), y.view(), config.alpha)?;
        iterations += 1;
        last_change = next
            .iter()
            .zip(u.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        u = next;
        if last_change < config.tol {
            converged = true;
            break;
        }
    }
    if config.clip {
        u.mapv_inplace(|v| v.clamp(0.0, 1.0));
    }
    Ok(FlGenOutput {
        memberships: u,
        iterations,
        converged,
        last_change,
        kernel_sigma: graph.kernel_sigma,
        fcm_clusters: 0,
    })
}

/// Runs FCM, builds the cluster-weighted graph and propagates `logical`.
/// `features` should already be on a common scale.
pub fn generate(
    features: &FeatureMatrix,
    logical: &LogicalLabelMatrix,
    config: &FlGenConfig,
) -> Result<FlGenOutput> {
    if features.nrows() != logical.nrows() {
        return Err(Error::Shape(format!(
            "{} feature rows, {} label rows",
            features.nrows(),
            logical.nrows()
        )));
    }
    config.propagation.validate()?;
    let k = config.fcm.k.unwrap_or(logical.ncols());
    let fcm = fcm_fit_with(features, k, &config.fcm)?;
    let graph = build_weight_graph(features, fcm.membership.view(), &config.graph)?;
    let mut out = propagate(&graph, logical, &config.propagation)?;
    out.fcm_clusters = k;
    Ok(out)
}

pub fn flgen_lp(dataset: &Dataset, config: &FlGenConfig) -> Result<FlGenOutput> {
    generate(dataset.features(), dataset.logical(), config)
}

/// Direct solution of `(I − αP) U = (1−α) Y`. Test-only reference for the
/// iterative generator.
pub fn fixed_point_oracle(graph: &WeightGraph, y: ArrayView2<'_, f64>, alpha: f64) -> Result<Array2<f64>> {
    let n = graph.len();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "dense oracle limited to {ORACLE_MAX_N} vertices, got {n}"
        )));
    }
    if y.nrows() != n {
        return Err(Error::Shape(format!("graph has {n} vertices, Y has {} rows", y.nrows())));
    }
    let l = y.ncols();
    let p = &graph.propagation;
    let system = DMatrix::from_fn(n, n, |i, j| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - alpha * p[[i, j]]
    });
    let rhs = DMatrix::from_fn(n, l, |i, j| (1.0 - alpha) * y[[i, j]]);
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("I - alpha P is singular".into()))?;
    Ok(Array2::from_shape_fn((n, l), |(i, j)| solution[(i, j)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_propagation, Normalization};
    use ndarray::array;

    fn two_node() -> WeightGraph {
        build_propagation(array![[0.0, 1.0], [1.0, 0.0]], Normalization::Symmetric).unwrap()
    }

    #[test]
    fn single_step_by_hand() {
        // P U = [[0,1],[1,0]] I = [[0,1],[1,0]]; 0.5 * that + 0.5 * I
        let g = two_node();
        let y = Array2::<f64>::eye(2);
        let u1 = propagate_step(&g, y.view(), y.view(), 0.5).unwrap();
        assert_eq!(u1, array![[0.5, 0.5], [0.5, 0.5]]);
        let u2 = propagate_step(&g, u1.view(), y.view(), 0.5).unwrap();
        assert_eq!(u2, array![[0.75, 0.25], [0.25, 0.75]]);
    }

    #[test]
    fn alpha_zero_returns_y_and_isolated_graph_scales_y() {
        let g = two_node();
        let y = array![[1.0, 0.0], [0.0, 1.0]];
        let junk = array![[0.3, 0.9], [0.2, 0.4]];
        assert_eq!(propagate_step(&g, junk.view(), y.view(), 0.0).unwrap(), y);

        let isolated = WeightGraph {
            weights: Array2::zeros((2, 2)),
            degree: ndarray::Array1::zeros(2),
            propagation: Array2::zeros((2, 2)),
            kernel_sigma: None,
        };
        assert_eq!(propagate_step(&isolated, junk.view(), y.view(), 0.3).unwrap(), y.mapv(|v| 0.7 * v));
    }

    #[test]
    fn two_node_fixed_point() {
        let g = two_node();
        let y = LogicalLabelMatrix::new(array![[1u8, 0], [0, 1]]).unwrap();
        let out = propagate(&g, &y, &PropagationConfig::default()).unwrap();
        assert!(out.converged);
        let expected = array![[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for (a, b) in out.memberships.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-5);
        }
        let oracle = fixed_point_oracle(&g, y.to_f64().view(), 0.5).unwrap();
        for (a, b) in oracle.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_with_zero_propagation_is_scaled_y() {
        let g = WeightGraph {
            weights: Array2::zeros((3, 3)),
            degree: ndarray::Array1::zeros(3),
            propagation: Array2::zeros((3, 3)),
            kernel_sigma: None,
        };
        let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        assert_eq!(fixed_point_oracle(&g, y.view(), 0.5).unwrap(), y.mapv(|v| 0.5 * v));
    }

    #[test]
    fn zero_label_column_stays_zero() {
        let x = FeatureMatrix::new(array![[0.0, 0.0], [0.1, 0.0], [1.0, 1.0], [1.1, 0.9]]).unwrap();
        let y = LogicalLabelMatrix::new(array![[1u8, 0, 0], [1, 0, 0], [0, 0, 1], [0, 0, 1]]).unwrap();
        let out = generate(&x, &y, &FlGenConfig::default()).unwrap();
        assert!(out.memberships.column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_convergence_is_flagged_not_an_error() {
        let g = two_node();
        let y = LogicalLabelMatrix::new(array![[1u8, 0], [0, 1]]).unwrap();
        let cfg = PropagationConfig {
            max_iter: 3,
            ..PropagationConfig::default()
        };
        let out = propagate(&g, &y, &cfg).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn alpha_outside_open_interval_is_rejected() {
        let g = two_node();
        let y = LogicalLabelMatrix::new(array![[1u8, 0], [0, 1]]).unwrap();
        for alpha in [0.0, 1.0, -0.2] {
            let cfg = PropagationConfig {
                alpha,
                ..PropagationConfig::default()
            };
            assert!(propagate(&g, &y, &cfg).is_err());
        }
    }
}
