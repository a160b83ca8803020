//! Dataset ingestion, synthetic benchmark generation, and output
//! serialization.
//!
//! A [`DomainDataset`] is a dense feature matrix with optional per-row class
//! labels; a [`PairSet`] carries ground-truth correspondences used only for
//! evaluation. Everything here is deterministic: generators are pure
//! functions of their parameters and seed, and writers emit enough digits to
//! round-trip `f64` exactly.

mod csv_io;
mod synth;

pub use csv_io::{
    export_joint_distance, load_domain_csv, read_embedding, read_pairs_csv, write_coupling,
    write_domain_csv, write_embedding, write_metrics, write_pairs_csv,
};
pub use synth::{generate_blobs_pair, generate_helix_pair};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A feature matrix for one domain plus optional per-row class labels.
///
/// Rows are samples, columns are features. A label of `None` means the row
/// is unlabeled; label tokens are compared by exact string equality after
/// trimming whitespace (done once, at construction).
#[derive(Debug, Clone, PartialEq)]
pub struct DomainDataset {
    features: Array2<f64>,
    labels: Vec<Option<String>>,
    name: String,
}

impl DomainDataset {
    pub fn new(
        features: Array2<f64>,
        labels: Vec<Option<String>>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let name = name.into();
        let (n, p) = features.dim();
        if n == 0 || p == 0 {
            return Err(Error::EmptyDataset { name });
        }
        if labels.len() != n {
            return Err(Error::ShapeMismatch {
                context: "label count vs feature rows",
                expected: n.to_string(),
                actual: labels.len().to_string(),
            });
        }
        for ((i, j), v) in features.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature {
                    name,
                    row: i,
                    col: j,
                });
            }
        }
        let labels = labels
            .into_iter()
            .map(|l| {
                l.and_then(|s| {
                    let t = s.trim();
                    if t.is_empty() {
                        None
                    } else {
                        Some(t.to_string())
                    }
                })
            })
            .collect();
        Ok(Self {
            features,
            labels,
            name,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of rows carrying a label.
    pub fn n_labeled(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// New dataset with only a seeded random fraction of the labels kept;
    /// the rest become unlabeled. `fraction` is the share of currently
    /// labeled rows that stays labeled (rounded to the nearest count).
    pub fn mask_labels(&self, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidParameter(format!(
                "label fraction must be in [0, 1], got {fraction}"
            )));
        }
        let labeled: Vec<usize> = (0..self.n_samples())
            .filter(|&i| self.labels[i].is_some())
            .collect();
        let keep = (fraction * labeled.len() as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled = labeled;
        shuffled.shuffle(&mut rng);
        let kept: std::collections::HashSet<usize> = shuffled.into_iter().take(keep).collect();
        let labels = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, l)| if kept.contains(&i) { l.clone() } else { None })
            .collect();
        Self::new(self.features.clone(), labels, self.name.clone())
    }
}

/// Ground-truth correspondences `(source row, target row)`, evaluation-only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSet {
    pairs: Vec<(usize, usize)>,
}

impl PairSet {
    /// Validates ranges against the two dataset sizes and rejects duplicate
    /// indices on either side.
    pub fn new(pairs: Vec<(usize, usize)>, n_source: usize, n_target: usize) -> Result<Self> {
        let mut seen_source = vec![false; n_source];
        let mut seen_target = vec![false; n_target];
        for &(s, t) in &pairs {
            if s >= n_source || t >= n_target {
                return Err(Error::PairOutOfRange {
                    source_index: s,
                    target_index: t,
                    n: n_source,
                    m: n_target,
                });
            }
            if seen_source[s] {
                return Err(Error::DuplicatePairIndex {
                    side: "source",
                    index: s,
                });
            }
            if seen_target[t] {
                return Err(Error::DuplicatePairIndex {
                    side: "target",
                    index: t,
                });
            }
            seen_source[s] = true;
            seen_target[t] = true;
        }
        Ok(Self { pairs })
    }

    /// The identity pairing `(i, i)` for `n` samples.
    pub fn identity(n: usize) -> Self {
        Self {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}
