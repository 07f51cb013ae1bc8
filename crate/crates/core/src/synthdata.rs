//! Artificial Gaussian-cluster datasets with known ("true") fuzzy labels.
//!
//! Cluster centers are drawn uniformly from the unit cube and each cluster's
//! samples come from `N(c_k, φ²(I + ρA_k))` with `A_k` a random symmetric
//! positive definite matrix scaled to unit spectral norm.
//!
//! * Single-label: the only nonzero membership of a sample is for its own
//!   cluster, the reciprocal of its distance to that center, rescaled per
//!   column by the column maximum so values land in (0, 1].
//! * Multi-label: samples are additionally perturbed with isotropic Gaussian
//!   noise and get a Gaussian-kernel membership to every center plus a
//!   constant offset, clamped to [0, 1]. Logical labels are memberships ≥ 0.5.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureMatrix, FuzzyLabelMatrix, LabelMode, LogicalLabelMatrix};
use crate::error::{Error, Result};

/// Threshold turning true multi-label memberships into true logical labels.
pub const TRUE_LOGICAL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_total: usize,
    pub k_clusters: usize,
    pub dims: usize,
    /// Overall covariance scale φ.
    pub phi: f64,
    /// Weight ρ ∈ [0, 1] of the random correlation term.
    pub rho: f64,
    /// Std of the additive feature noise, also the membership kernel width
    /// (multi-label only).
    pub noise_sigma: f64,
    /// Constant added to every multi-label membership before clamping.
    pub alpha_offset: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn single_label_default(seed: u64) -> Self {
        SynthConfig {
            n_total: 1500,
            k_clusters: 3,
            dims: 5,
            phi: 0.25,
            rho: 0.5,
            noise_sigma: 0.0,
            alpha_offset: 0.0,
            seed,
        }
    }

    pub fn multi_label_default(seed: u64) -> Self {
        SynthConfig {
            n_total: 2601,
            k_clusters: 3,
            dims: 3,
            phi: 0.25,
            rho: 0.5,
            noise_sigma: 0.5,
            alpha_offset: 0.05,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_clusters == 0 || self.dims == 0 {
            return Err(Error::InvalidParameter("k_clusters and dims must be positive".into()));
        }
        if self.n_total < self.k_clusters {
            return Err(Error::InvalidParameter(format!(
                "n_total {} is smaller than k_clusters {}",
                self.n_total, self.k_clusters
            )));
        }
        if !(self.phi > 0.0 && self.phi.is_finite()) {
            return Err(Error::InvalidParameter(format!("phi must be > 0, got {}", self.phi)));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {}", self.rho)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise_sigma must be >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !self.alpha_offset.is_finite() {
            return Err(Error::InvalidParameter("alpha_offset must be finite".into()));
        }
        Ok(())
    }

    /// Equal split, remainder going to the earliest clusters.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let base = self.n_total / self.k_clusters;
        let extra = self.n_total % self.k_clusters;
        (0..self.k_clusters).map(|k| base + usize::from(k < extra)).collect()
    }
}

fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// `φ²(I + ρA)` with `A = BBᵀ / ‖BBᵀ‖₂` for a standard normal `B`.
pub fn make_covariance(dims: usize, phi: f64, rho: f64, rng: &mut impl Rng) -> Result<Array2<f64>> {
    if dims == 0 {
        return Err(Error::InvalidParameter("dims must be at least 1".into()));
    }
    let b = standard_normal_matrix(dims, dims, rng);
    let gram = &b * b.transpose();
    let spectral = gram
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v));
    let a = if spectral > 0.0 {
        gram / spectral
    } else {
        DMatrix::identity(dims, dims)
    };
    let phi2 = phi * phi;
    Ok(Array2::from_shape_fn((dims, dims), |(i, j)| {
        let identity = if i == j { 1.0 } else { 0.0 };
        phi2 * (identity + rho * a[(i, j)])
    }))
}

fn sample_gaussian(
    mean: &[f64],
    covariance: &Array2<f64>,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    let d = mean.len();
    let cov = DMatrix::from_fn(d, d, |i, j| covariance[[i, j]]);
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
    let l = chol.l();
    let mu = DVector::from_column_slice(mean);
    Ok((0..count)
        .map(|_| {
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            (&mu + &l * z).iter().copied().collect()
        })
        .collect())
}

fn euclidean(a: &[f64], b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Raw single-label membership: the reciprocal distance to the own center,
/// infinite for a sample sitting exactly on it.
pub fn reciprocal_membership(x: &[f64], center: ArrayView1<'_, f64>) -> f64 {
    1.0 / euclidean(x, center)
}

/// Multi-label membership `exp(-‖x - c‖² / 2σ²) + α`, clamped to [0, 1].
pub fn gaussian_membership(x: &[f64], center: ArrayView1<'_, f64>, sigma: f64, alpha: f64) -> f64 {
    let d2: f64 = x.iter().zip(center.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    let kernel = if sigma > 0.0 {
        (-d2 / (2.0 * sigma * sigma)).exp()
    } else if d2 == 0.0 {
        1.0
    } else {
        0.0
    };
    (kernel + alpha).clamp(0.0, 1.0)
}

struct Clusters {
    centers: Array2<f64>,
    samples: Vec<Vec<f64>>,
    cluster_of: Vec<usize>,
}

fn draw_clusters(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Clusters> {
    let (k, d) = (config.k_clusters, config.dims);
    let centers = Array2::from_shape_fn((k, d), |_| rng.random::<f64>());
    let mut samples = Vec::with_capacity(config.n_total);
    let mut cluster_of = Vec::with_capacity(config.n_total);
    for (c, size) in config.cluster_sizes().into_iter().enumerate() {
        let cov = make_covariance(d, config.phi, config.rho, rng)?;
        let center: Vec<f64> = centers.row(c).to_vec();
        samples.extend(sample_gaussian(&center, &cov, size, rng)?);
        cluster_of.extend(std::iter::repeat_n(c, size));
    }
    Ok(Clusters {
        centers,
        samples,
        cluster_of,
    })
}

fn to_features(samples: &[Vec<f64>], dims: usize) -> Result<FeatureMatrix> {
    let flat: Vec<f64> = samples.iter().flatten().copied().collect();
    FeatureMatrix::new(
        Array2::from_shape_vec((samples.len(), dims), flat).map_err(|e| Error::Shape(e.to_string()))?,
    )
}

/// Generated dataset together with the cluster centers it was drawn around.
#[derive(Debug, Clone)]
pub struct SyntheticSet {
    pub dataset: Dataset,
    pub centers: Array2<f64>,
}

pub fn gen_single_label(config: &SynthConfig) -> Result<Dataset> {
    Ok(gen_single_label_with_centers(config)?.dataset)
}

pub fn gen_single_label_with_centers(config: &SynthConfig) -> Result<SyntheticSet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let clusters = draw_clusters(config, &mut rng)?;
    let (n, k) = (clusters.samples.len(), config.k_clusters);

    let raw: Vec<f64> = clusters
        .samples
        .iter()
        .zip(&clusters.cluster_of)
        .map(|(x, &c)| reciprocal_membership(x, clusters.centers.row(c)))
        .collect();
    let mut column_max = vec![0.0_f64; k];
    for (&r, &c) in raw.iter().zip(&clusters.cluster_of) {
        if r.is_finite() {
            column_max[c] = column_max[c].max(r);
        }
    }
    let mut fuzzy = Array2::zeros((n, k));
    for (i, (&r, &c)) in raw.iter().zip(&clusters.cluster_of).enumerate() {
        fuzzy[[i, c]] = if r.is_finite() && column_max[c] > 0.0 {
            r / column_max[c]
        } else {
            1.0
        };
    }

    let dataset = Dataset::new(
        "artificial-single",
        LabelMode::Single,
        to_features(&clusters.samples, config.dims)?,
        LogicalLabelMatrix::from_classes(&clusters.cluster_of, k)?,
        Some(FuzzyLabelMatrix::new(fuzzy)?),
    )?;
    Ok(SyntheticSet {
        dataset,
        centers: clusters.centers,
    })
}

pub fn gen_multi_label(config: &SynthConfig) -> Result<Dataset> {
    Ok(gen_multi_label_with_centers(config)?.dataset)
}

pub fn gen_multi_label_with_centers(config: &SynthConfig) -> Result<SyntheticSet> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut clusters = draw_clusters(config, &mut rng)?;
    for x in clusters.samples.iter_mut() {
        for v in x.iter_mut() {
            let eps: f64 = rng.sample(StandardNormal);
            *v += config.noise_sigma * eps;
        }
    }
    let (n, k) = (clusters.samples.len(), config.k_clusters);
    let fuzzy = Array2::from_shape_fn((n, k), |(i, j)| {
        gaussian_membership(
            &clusters.samples[i],
            clusters.centers.row(j),
            config.noise_sigma,
            config.alpha_offset,
        )
    });
    let logical = fuzzy.mapv(|u| u8::from(u >= TRUE_LOGICAL_THRESHOLD));

    let dataset = Dataset::new(
        "artificial-multi",
        LabelMode::Multi,
        to_features(&clusters.samples, config.dims)?,
        LogicalLabelMatrix::new(logical)?,
        Some(FuzzyLabelMatrix::new(fuzzy)?),
    )?;
    Ok(SyntheticSet {
        dataset,
        centers: clusters.centers,
    })
}
