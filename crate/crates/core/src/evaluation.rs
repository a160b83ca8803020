//! Alignment quality metrics: fraction of samples closer than the true
//! match (0 = perfect, about 0.5 = random) and k-NN label transfer accuracy
//! from the labeled source onto the target.

use std::collections::BTreeMap;

use ndarray::ArrayView2;

use crate::dataio::PairSet;
use crate::error::{Error, Result};

/// Which representation the metrics were computed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSpace {
    /// Shared spectral coordinates of the joint graph.
    Spectral,
    /// Target ambient space after barycentric projection.
    Ambient,
}

impl std::fmt::Display for EvalSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalSpace::Spectral => write!(f, "spectral"),
            EvalSpace::Ambient => write!(f, "ambient"),
        }
    }
}

/// Sample counts backing each metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvaluatedCounts {
    /// Per-sample fractions averaged by the match metric (both directions).
    pub foscttm_samples: usize,
    /// Target rows with known true labels scored by label transfer.
    pub label_transfer_targets: usize,
}

/// Bundle of alignment scores over one representation.
#[derive(Debug, Clone)]
pub struct MetricReport {
    pub foscttm: f64,
    pub label_transfer: BTreeMap<usize, f64>,
    pub space: EvalSpace,
    pub n_evaluated: EvaluatedCounts,
}

impl MetricReport {
    /// Flatten to a metric-name -> number map for serialization.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        map.insert("foscttm".to_string(), self.foscttm);
        for (k, acc) in &self.label_transfer {
            map.insert(format!("acc_{k}"), *acc);
        }
        map
    }
}

fn squared_distance(a: ArrayView2<f64>, i: usize, b: ArrayView2<f64>, j: usize) -> f64 {
    a.row(i)
        .iter()
        .zip(b.row(j).iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Fraction of samples closer than the true match, averaged over both
/// directions and all pairs. Counts strictly closer samples, so a perfect
/// alignment scores exactly zero even with duplicated points.
pub fn foscttm(
    source_coords: ArrayView2<f64>,
    target_coords: ArrayView2<f64>,
    pairs: &PairSet,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyPairSet);
    }
    if source_coords.ncols() != target_coords.ncols() {
        return Err(Error::ShapeMismatch {
            context: "coordinate dimensions",
            expected: source_coords.ncols().to_string(),
            actual: target_coords.ncols().to_string(),
        });
    }
    let n = source_coords.nrows();
    let m = target_coords.nrows();
    for &(s, t) in pairs.pairs() {
        if s >= n || t >= m {
            return Err(Error::PairOutOfRange {
                source_index: s,
                target_index: t,
                n,
                m,
            });
        }
    }

    let mut total = 0.0;
    for &(s, t) in pairs.pairs() {
        let true_sq = squared_distance(source_coords, s, target_coords, t);
        let closer_targets = (0..m)
            .filter(|&j| squared_distance(source_coords, s, target_coords, j) < true_sq)
            .count();
        let closer_sources = (0..n)
            .filter(|&i| squared_distance(source_coords, i, target_coords, t) < true_sq)
            .count();
        total += closer_targets as f64 / m as f64;
        total += closer_sources as f64 / n as f64;
    }
    Ok(total / (2 * pairs.len()) as f64)
}

/// Classify each labeled target sample by the majority label of its `k`
/// nearest source samples. Distance ties break toward the lower source
/// index; majority ties break toward the label of the nearer neighbor.
pub fn label_transfer(
    source_coords: ArrayView2<f64>,
    source_labels: &[Option<String>],
    target_coords: ArrayView2<f64>,
    target_true_labels: &[Option<String>],
    k: usize,
) -> Result<f64> {
    let n = source_coords.nrows();
    if source_labels.len() != n {
        return Err(Error::ShapeMismatch {
            context: "source labels vs coordinates",
            expected: n.to_string(),
            actual: source_labels.len().to_string(),
        });
    }
    if target_true_labels.len() != target_coords.nrows() {
        return Err(Error::ShapeMismatch {
            context: "target labels vs coordinates",
            expected: target_coords.nrows().to_string(),
            actual: target_true_labels.len().to_string(),
        });
    }
    if source_coords.ncols() != target_coords.ncols() {
        return Err(Error::ShapeMismatch {
            context: "coordinate dimensions",
            expected: source_coords.ncols().to_string(),
            actual: target_coords.ncols().to_string(),
        });
    }
    if source_labels.iter().any(|l| l.is_none()) {
        return Err(Error::InvalidParameter(
            "label transfer requires every source row to be labeled".to_string(),
        ));
    }
    if k == 0 || k > n {
        return Err(Error::NeighborCountOutOfRange { k, max: n, n });
    }

    let evaluable: Vec<usize> = (0..target_true_labels.len())
        .filter(|&j| target_true_labels[j].is_some())
        .collect();
    if evaluable.is_empty() {
        return Err(Error::NoEvaluableTargets);
    }

    let mut correct = 0usize;
    for &j in &evaluable {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let da = squared_distance(source_coords, a, target_coords, j);
            let db = squared_distance(source_coords, b, target_coords, j);
            da.partial_cmp(&db)
                .expect("finite distances")
                .then(a.cmp(&b))
        });
        let neighbors = &order[..k];

        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in neighbors {
            *counts
                .entry(source_labels[i].as_deref().expect("checked labeled"))
                .or_insert(0) += 1;
        }
        let top = *counts.values().max().expect("k >= 1");
        let predicted = neighbors
            .iter()
            .map(|&i| source_labels[i].as_deref().expect("checked labeled"))
            .find(|label| counts[label] == top)
            .expect("some neighbor carries a top label");

        if predicted == target_true_labels[j].as_deref().expect("evaluable") {
            correct += 1;
        }
    }
    Ok(correct as f64 / evaluable.len() as f64)
}

/// Compute both metrics over one shared representation.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    source_coords: ArrayView2<f64>,
    target_coords: ArrayView2<f64>,
    pairs: &PairSet,
    source_labels: &[Option<String>],
    target_true_labels: &[Option<String>],
    ks: &[usize],
    space: EvalSpace,
) -> Result<MetricReport> {
    let score = foscttm(source_coords, target_coords, pairs)?;
    let mut label_scores = BTreeMap::new();
    for &k in ks {
        let acc = label_transfer(
            source_coords,
            source_labels,
            target_coords,
            target_true_labels,
            k,
        )?;
        label_scores.insert(k, acc);
    }
    let targets = target_true_labels.iter().filter(|l| l.is_some()).count();
    Ok(MetricReport {
        foscttm: score,
        label_transfer: label_scores,
        space,
        n_evaluated: EvaluatedCounts {
            foscttm_samples: 2 * pairs.len(),
            label_transfer_targets: targets,
        },
    })
}
