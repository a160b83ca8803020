//! Within-domain affinity graphs using an adaptive-bandwidth decay kernel,
//! and their row-stochastic normalization into diffusion operators.

use ndarray::{Array1, Array2};

use crate::dataio::DomainDataset;
use crate::error::{Error, Result};

/// Symmetric within-domain affinity matrix built by [`alpha_decay_kernel`].
///
/// Entries lie in `[0, 1]` with the diagonal exactly 1; distant pairs may
/// underflow to exactly zero in floating point.
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    values: Array2<f64>,
    alpha: f64,
    k: usize,
}

impl AffinityMatrix {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Row-stochastic random-walk operator `P = D^{-1} W` with the row sums of
/// the affinity kept as `degrees` (they determine the stationary law).
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    values: Array2<f64>,
    degrees: Array1<f64>,
}

impl DiffusionOperator {
    /// Build from explicit transition values and degrees, validating that
    /// rows are stochastic. Mostly useful for tests and hand-built chains.
    pub fn from_parts(values: Array2<f64>, degrees: Array1<f64>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n || degrees.len() != n {
            return Err(Error::ShapeMismatch {
                context: "diffusion operator parts",
                expected: format!("{n} x {n} with {n} degrees"),
                actual: format!("{} x {} with {}", values.nrows(), values.ncols(), degrees.len()),
            });
        }
        for i in 0..n {
            if degrees[i] <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "degree {i} must be positive"
                )));
            }
            let row_sum: f64 = values.row(i).sum();
            if (row_sum - 1.0).abs() > 1e-12 || values.row(i).iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} is not stochastic (sum {row_sum})"
                )));
            }
        }
        Ok(Self { values, degrees })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn degrees(&self) -> &Array1<f64> {
        &self.degrees
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

fn pairwise_distances(features: &Array2<f64>) -> Array2<f64> {
    let n = features.nrows();
    let mut dist = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = features
                .row(i)
                .iter()
                .zip(features.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    dist
}

/// Per-sample adaptive bandwidths: the Euclidean distance from each sample
/// to its k-th nearest *other* sample. Ties count separately, so the k-th
/// order statistic of the sorted distance list is taken as printed.
pub fn knn_bandwidths(dataset: &DomainDataset, k: usize) -> Result<Array1<f64>> {
    let n = dataset.n_samples();
    if k == 0 || k > n.saturating_sub(1) {
        return Err(Error::NeighborCountOutOfRange {
            k,
            max: n.saturating_sub(1),
            n,
        });
    }
    let dist = pairwise_distances(dataset.features());
    bandwidths_from_distances(&dist, k)
}

fn bandwidths_from_distances(dist: &Array2<f64>, k: usize) -> Result<Array1<f64>> {
    let n = dist.nrows();
    let mut sigma = Array1::zeros(n);
    for i in 0..n {
        let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[[i, j]]).collect();
        others.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        let s = others[k - 1];
        if s <= 0.0 {
            return Err(Error::ZeroBandwidth { row: i, k });
        }
        sigma[i] = s;
    }
    Ok(sigma)
}

/// Build the adaptive-bandwidth decay kernel
/// `W(i,j) = exp(-(d_ij/sigma_i)^alpha)/2 + exp(-(d_ij/sigma_j)^alpha)/2`,
/// symmetric by construction with unit diagonal.
pub fn alpha_decay_kernel(dataset: &DomainDataset, alpha: f64, k: usize) -> Result<AffinityMatrix> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    let n = dataset.n_samples();
    if k == 0 || k > n.saturating_sub(1) {
        return Err(Error::NeighborCountOutOfRange {
            k,
            max: n.saturating_sub(1),
            n,
        });
    }
    let dist = pairwise_distances(dataset.features());
    let sigma = bandwidths_from_distances(&dist, k)?;

    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        values[[i, i]] = 1.0;
        for j in (i + 1)..n {
            let d = dist[[i, j]];
            let w = 0.5 * (-(d / sigma[i]).powf(alpha)).exp()
                + 0.5 * (-(d / sigma[j]).powf(alpha)).exp();
            values[[i, j]] = w;
            values[[j, i]] = w;
        }
    }
    Ok(AffinityMatrix { values, alpha, k })
}

/// Row-normalize an affinity into the random-walk diffusion operator
/// `P = D^{-1} W`, recording the degrees.
pub fn diffusion_operator(affinity: &AffinityMatrix) -> DiffusionOperator {
    let n = affinity.n();
    let degrees: Array1<f64> = affinity.values().rows().into_iter().map(|r| r.sum()).collect();
    let mut values = affinity.values().clone();
    for i in 0..n {
        // degrees >= 1 thanks to the unit diagonal
        let inv = 1.0 / degrees[i];
        for j in 0..n {
            values[[i, j]] *= inv;
        }
    }
    DiffusionOperator { values, degrees }
}
