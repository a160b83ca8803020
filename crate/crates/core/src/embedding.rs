//! Joint cross-domain affinity assembly and shared representations: the
//! spectral embedding of the joint graph and the barycentric projection
//! into the target ambient space.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::dataio::DomainDataset;
use crate::error::{Error, Result};
use crate::graph::AffinityMatrix;
use crate::transport::Coupling;

/// Which matrix fills the off-diagonal blocks of the joint affinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffdiagMode {
    /// `(1 - mu) (W_x T + T W_y)`: coupling smoothed by both kernels.
    Wxy,
    /// `(1 - mu) T`: the raw coupling (ablation variant).
    T,
}

impl std::fmt::Display for OffdiagMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OffdiagMode::Wxy => write!(f, "wxy"),
            OffdiagMode::T => write!(f, "t"),
        }
    }
}

impl std::str::FromStr for OffdiagMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wxy" => Ok(OffdiagMode::Wxy),
            "t" => Ok(OffdiagMode::T),
            other => Err(Error::InvalidParameter(format!(
                "unknown off-diagonal mode '{other}' (expected 'wxy' or 't')"
            ))),
        }
    }
}

/// Symmetric nonnegative `(n+m) x (n+m)` affinity mixing within-domain
/// kernels (weight `mu`) with coupling-induced cross-domain similarities
/// (weight `1 - mu`).
#[derive(Debug, Clone)]
pub struct JointAffinity {
    values: Array2<f64>,
    mu: f64,
    offdiag_mode: OffdiagMode,
    split: usize,
}

impl JointAffinity {
    /// Wrap an explicit joint matrix, validating symmetry and nonnegativity.
    pub fn from_parts(
        values: Array2<f64>,
        mu: f64,
        offdiag_mode: OffdiagMode,
        split: usize,
    ) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n || split == 0 || split >= n {
            return Err(Error::ShapeMismatch {
                context: "joint affinity",
                expected: format!("square with 0 < split < {n}"),
                actual: format!("{} x {}, split {split}", values.nrows(), values.ncols()),
            });
        }
        for i in 0..n {
            for j in i..n {
                let v = values[[i, j]];
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "joint affinity entry ({i}, {j}) = {v} is negative or non-finite"
                    )));
                }
                if (v - values[[j, i]]).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!(
                        "joint affinity is asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            values,
            mu,
            offdiag_mode,
            split,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn offdiag_mode(&self) -> OffdiagMode {
        self.offdiag_mode
    }

    /// Index of the first target row (= source sample count).
    pub fn split(&self) -> usize {
        self.split
    }

    pub fn n_total(&self) -> usize {
        self.values.nrows()
    }
}

/// Shared coordinates from the joint-graph spectral embedding.
#[derive(Debug, Clone)]
pub struct SharedEmbedding {
    coordinates: Array2<f64>,
    eigenvalues: Array1<f64>,
    domain_split: usize,
}

impl SharedEmbedding {
    pub fn coordinates(&self) -> &Array2<f64> {
        &self.coordinates
    }

    /// Retained Laplacian eigenvalues, ascending, trivial one excluded.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn domain_split(&self) -> usize {
        self.domain_split
    }

    pub fn dim(&self) -> usize {
        self.coordinates.ncols()
    }

    pub fn source_coords(&self) -> ndarray::ArrayView2<'_, f64> {
        self.coordinates.slice(ndarray::s![..self.domain_split, ..])
    }

    pub fn target_coords(&self) -> ndarray::ArrayView2<'_, f64> {
        self.coordinates.slice(ndarray::s![self.domain_split.., ..])
    }
}

/// Assemble the joint affinity: diagonal blocks `mu W_x`, `mu W_y`,
/// off-diagonal block per [`OffdiagMode`] (its transpose fills the lower
/// block, so the result is symmetric by construction).
pub fn joint_affinity(
    source_kernel: &AffinityMatrix,
    target_kernel: &AffinityMatrix,
    coupling: &Coupling,
    mu: f64,
    mode: OffdiagMode,
) -> Result<JointAffinity> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in [0, 1], got {mu}"
        )));
    }
    let n = source_kernel.n();
    let m = target_kernel.n();
    let (tn, tm) = coupling.dim();
    if tn != n || tm != m {
        return Err(Error::ShapeMismatch {
            context: "coupling vs kernels",
            expected: format!("{n} x {m}"),
            actual: format!("{tn} x {tm}"),
        });
    }

    let cross = match mode {
        OffdiagMode::Wxy => {
            let wxt = source_kernel.values().dot(coupling.values());
            let twy = coupling.values().dot(target_kernel.values());
            (wxt + twy) * (1.0 - mu)
        }
        OffdiagMode::T => coupling.values() * (1.0 - mu),
    };

    let total = n + m;
    let mut values = Array2::zeros((total, total));
    for i in 0..n {
        for j in 0..n {
            values[[i, j]] = mu * source_kernel.values()[[i, j]];
        }
    }
    for i in 0..m {
        for j in 0..m {
            values[[n + i, n + j]] = mu * target_kernel.values()[[i, j]];
        }
    }
    for i in 0..n {
        for j in 0..m {
            values[[i, n + j]] = cross[[i, j]];
            values[[n + j, i]] = cross[[i, j]];
        }
    }
    Ok(JointAffinity {
        values,
        mu,
        offdiag_mode: mode,
        split: n,
    })
}

fn connected_components(values: &Array2<f64>) -> usize {
    let n = values.nrows();
    let mut component = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = count;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if j != i && values[[i, j]] > 0.0 && component[j] == usize::MAX {
                    component[j] = count;
                    stack.push(j);
                }
            }
        }
        count += 1;
    }
    count
}

/// Spectral embedding of the joint graph: eigenvectors of the symmetric
/// normalized Laplacian for the `d` smallest nonzero eigenvalues,
/// back-transformed by `Deg^{-1/2}` (random-walk convention), each column
/// signed so its largest-magnitude entry is positive.
pub fn spectral_embedding(joint: &JointAffinity, d: usize) -> Result<SharedEmbedding> {
    let total = joint.n_total();
    if d == 0 || d > total - 1 {
        return Err(Error::EmbeddingDimOutOfRange { d, max: total - 1 });
    }
    let components = connected_components(&joint.values);
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }

    let degrees: Array1<f64> = joint
        .values
        .rows()
        .into_iter()
        .map(|row| row.sum())
        .collect();
    // a connected graph on >= 2 nodes has positive degrees, but guard anyway
    if let Some(i) = degrees.iter().position(|&deg| deg <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "joint affinity row {i} has zero degree"
        )));
    }
    let inv_sqrt = degrees.mapv(|deg| 1.0 / deg.sqrt());

    let mut laplacian = Array2::from_shape_fn((total, total), |(i, j)| {
        -inv_sqrt[i] * joint.values[[i, j]] * inv_sqrt[j]
    });
    for i in 0..total {
        laplacian[[i, i]] += 1.0;
    }
    // enforce exact symmetry before the eigensolve
    for i in 0..total {
        for j in (i + 1)..total {
            let s = 0.5 * (laplacian[[i, j]] + laplacian[[j, i]]);
            laplacian[[i, j]] = s;
            laplacian[[j, i]] = s;
        }
    }

    let (eigvals, eigvecs) = laplacian
        .eigh(UPLO::Lower)
        .map_err(|e| Error::SingularSystem {
            detail: format!("eigendecomposition failed: {e}"),
        })?;

    let mut coordinates = Array2::zeros((total, d));
    let mut eigenvalues = Array1::zeros(d);
    for c in 0..d {
        let src = c + 1; // skip the trivial eigenpair
        eigenvalues[c] = eigvals[src];
        let mut column: Vec<f64> = (0..total)
            .map(|i| inv_sqrt[i] * eigvecs[[i, src]])
            .collect();
        // deterministic sign: largest-magnitude entry made positive
        let mut arg_max = 0;
        for (i, v) in column.iter().enumerate() {
            if v.abs() > column[arg_max].abs() {
                arg_max = i;
            }
        }
        if column[arg_max] < 0.0 {
            for v in column.iter_mut() {
                *v = -*v;
            }
        }
        for (i, v) in column.into_iter().enumerate() {
            coordinates[[i, c]] = v;
        }
    }

    Ok(SharedEmbedding {
        coordinates,
        eigenvalues,
        domain_split: joint.split,
    })
}

/// Map each source sample to the coupling-weighted average of target
/// samples: `x_i -> sum_j T_ij y_j / sum_j T_ij`.
pub fn barycentric_projection(coupling: &Coupling, target: &DomainDataset) -> Result<Array2<f64>> {
    let (n, m) = coupling.dim();
    if m != target.n_samples() {
        return Err(Error::ShapeMismatch {
            context: "coupling columns vs target rows",
            expected: target.n_samples().to_string(),
            actual: m.to_string(),
        });
    }
    let q = target.n_features();
    let mut projected = coupling.values().dot(target.features());
    for i in 0..n {
        let row_mass = coupling.values().row(i).sum();
        if row_mass <= 0.0 {
            return Err(Error::ZeroCouplingRow { row: i });
        }
        for j in 0..q {
            projected[[i, j]] /= row_mass;
        }
    }
    Ok(projected)
}
