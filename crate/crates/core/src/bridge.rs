//! Bridge between domains: aggregate per-domain diffusion similarities into
//! shared label-profile coordinates and compare them with cosine distances.
//!
//! Label profiles are the only cross-domain currency; they live in the same
//! `|C|`-dimensional space for both domains no matter how different the
//! ambient feature spaces are.

use ndarray::{Array1, Array2};

use crate::diffusion::DptSimilarity;
use crate::error::{Error, Result};

const PROFILE_NORM_TOL: f64 = 1e-12;

/// Per-sample aggregation of diffusion similarity over each shared class,
/// normalized by the class priors.
#[derive(Debug, Clone)]
pub struct LabelProfile {
    values: Array2<f64>,
    class_order: Vec<String>,
    priors: Array1<f64>,
}

impl LabelProfile {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn class_order(&self) -> &[String] {
        &self.class_order
    }

    pub fn priors(&self) -> &Array1<f64> {
        &self.priors
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }
}

/// Inter-domain cosine distance matrix between label profiles; entries in
/// `[0, 2]` since profiles may have negative components.
#[derive(Debug, Clone)]
pub struct CrossCost {
    values: Array2<f64>,
}

impl CrossCost {
    /// Wrap a raw cost matrix, validating the cosine-distance range.
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        for ((i, j), &v) in values.indexed_iter() {
            if !v.is_finite() || !(0.0..=2.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "cost ({i}, {j}) = {v} outside [0, 2]"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }
}

/// Classes present among labeled samples of *both* domains, sorted
/// lexicographically. At least two are required; with a single class every
/// profile collapses to a scaled row sum, which is identically zero.
pub fn shared_classes(
    source_labels: &[Option<String>],
    target_labels: &[Option<String>],
) -> Result<Vec<String>> {
    let present = |labels: &[Option<String>]| -> std::collections::BTreeSet<String> {
        labels.iter().filter_map(|l| l.clone()).collect()
    };
    let source_set = present(source_labels);
    if source_set.is_empty() {
        return Err(Error::NoLabeledSamples {
            domain: "source".to_string(),
        });
    }
    let target_set = present(target_labels);
    if target_set.is_empty() {
        return Err(Error::NoLabeledSamples {
            domain: "target".to_string(),
        });
    }
    let shared: Vec<String> = source_set.intersection(&target_set).cloned().collect();
    match shared.len() {
        0 => Err(Error::NoSharedClasses),
        1 => Err(Error::SingleSharedClass {
            class: shared[0].clone(),
        }),
        _ => Ok(shared),
    }
}

/// Estimated prior probability of each shared class among this domain's
/// labeled samples (restricted to classes in `classes`).
pub fn class_priors(labels: &[Option<String>], classes: &[String]) -> Result<Array1<f64>> {
    let mut counts = vec![0usize; classes.len()];
    let mut total = 0usize;
    let mut outside = 0usize;
    for label in labels.iter().flatten() {
        match classes.iter().position(|c| c == label) {
            Some(idx) => {
                counts[idx] += 1;
                total += 1;
            }
            None => outside += 1,
        }
    }
    if outside > 0 {
        log::warn!(
            "{outside} labeled samples carry classes outside the shared set and are treated as unlabeled for bridging"
        );
    }
    for (idx, &count) in counts.iter().enumerate() {
        if count == 0 {
            return Err(Error::ClassMissingInDomain {
                class: classes[idx].clone(),
                domain: "this".to_string(),
            });
        }
    }
    Ok(Array1::from_iter(
        counts.iter().map(|&c| c as f64 / total as f64),
    ))
}

/// Aggregate the diffusion similarity of every sample over each class:
/// `profile(i, c) = sum_{j in I_c} M(i, j) / prior(c)`, where `I_c` indexes
/// labeled samples of class `c`. Rows are computed for all samples, labeled
/// or not.
pub fn label_profile(
    similarity: &DptSimilarity,
    labels: &[Option<String>],
    classes: &[String],
    priors: &Array1<f64>,
) -> Result<LabelProfile> {
    let n = similarity.n();
    if labels.len() != n {
        return Err(Error::ShapeMismatch {
            context: "labels vs similarity size",
            expected: n.to_string(),
            actual: labels.len().to_string(),
        });
    }
    if priors.len() != classes.len() {
        return Err(Error::ShapeMismatch {
            context: "priors vs class count",
            expected: classes.len().to_string(),
            actual: priors.len().to_string(),
        });
    }
    let class_index: std::collections::HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(idx, c)| (c.as_str(), idx))
        .collect();

    let m = similarity.values();
    let mut values = Array2::zeros((n, classes.len()));
    for j in 0..n {
        if let Some(label) = &labels[j] {
            if let Some(&c) = class_index.get(label.as_str()) {
                for i in 0..n {
                    values[[i, c]] += m[[i, j]];
                }
            }
        }
    }
    for c in 0..classes.len() {
        let inv = 1.0 / priors[c];
        for i in 0..n {
            values[[i, c]] *= inv;
        }
    }

    for i in 0..n {
        let norm = values.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < PROFILE_NORM_TOL {
            return Err(Error::DegenerateProfile { row: i, norm });
        }
    }
    Ok(LabelProfile {
        values,
        class_order: classes.to_vec(),
        priors: priors.clone(),
    })
}

/// Cosine distances between every source profile row and every target
/// profile row, clamped into `[0, 2]` against roundoff.
pub fn cosine_cost(source: &LabelProfile, target: &LabelProfile) -> Result<CrossCost> {
    if source.class_order != target.class_order {
        return Err(Error::ClassOrderMismatch);
    }
    let norms = |profile: &LabelProfile, domain: &str| -> Result<Array1<f64>> {
        let mut out = Array1::zeros(profile.n());
        for i in 0..profile.n() {
            let norm = profile.values.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < PROFILE_NORM_TOL {
                return Err(Error::ZeroNormProfileRow {
                    domain: domain.to_string(),
                    row: i,
                });
            }
            out[i] = norm;
        }
        Ok(out)
    };
    let source_norms = norms(source, "source")?;
    let target_norms = norms(target, "target")?;

    // dot products via one matrix product over the class axis
    let dots = source.values.dot(&target.values.t());
    let mut values = Array2::zeros(dots.dim());
    for ((i, j), &dot) in dots.indexed_iter() {
        let cosine = dot / (source_norms[i] * target_norms[j]);
        values[[i, j]] = (1.0 - cosine).clamp(0.0, 2.0);
    }
    Ok(CrossCost { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn labels(tokens: &[&str]) -> Vec<Option<String>> {
        tokens
            .iter()
            .map(|t| {
                if t.is_empty() {
                    None
                } else {
                    Some(t.to_string())
                }
            })
            .collect()
    }

    fn profile_from(values: Array2<f64>, classes: &[&str]) -> LabelProfile {
        LabelProfile {
            values,
            class_order: classes.iter().map(|c| c.to_string()).collect(),
            priors: Array1::from_elem(classes.len(), 1.0 / classes.len() as f64),
        }
    }

    #[test]
    fn shared_classes_is_sorted_intersection() {
        let lx = labels(&["A", "B", "C"]);
        let ly = labels(&["D", "C", "B"]);
        assert_eq!(shared_classes(&lx, &ly).unwrap(), vec!["B", "C"]);
    }

    #[test]
    fn shared_classes_degenerate_cases() {
        let single = shared_classes(&labels(&["A", "A"]), &labels(&["A"]));
        assert!(matches!(single, Err(Error::SingleSharedClass { .. })));
        let disjoint = shared_classes(&labels(&["A"]), &labels(&["B"]));
        assert!(matches!(disjoint, Err(Error::NoSharedClasses)));
        let unlabeled = shared_classes(&labels(&["", ""]), &labels(&["B"]));
        assert!(matches!(unlabeled, Err(Error::NoLabeledSamples { .. })));
    }

    #[test]
    fn priors_count_labeled_subset() {
        let classes = vec!["A".to_string(), "B".to_string()];
        let mut ten = vec!["A"; 5];
        ten.extend(vec!["B"; 5]);
        let balanced = class_priors(&labels(&ten), &classes).unwrap();
        assert_eq!(balanced.to_vec(), vec![0.5, 0.5]);

        let mut eleven = vec!["A"; 9];
        eleven.push("B");
        let skewed = class_priors(&labels(&eleven), &classes).unwrap();
        assert_abs_diff_eq!(skewed[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(skewed[1], 0.1, epsilon = 1e-15);

        // 100 rows, 50 labeled: 30 A + 20 B
        let mut partial = vec![""; 50];
        partial.extend(vec!["A"; 30]);
        partial.extend(vec!["B"; 20]);
        let priors = class_priors(&labels(&partial), &classes).unwrap();
        assert_abs_diff_eq!(priors[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(priors[1], 0.4, epsilon = 1e-15);
    }

    #[test]
    fn priors_require_every_class() {
        let classes = vec!["A".to_string(), "B".to_string()];
        let err = class_priors(&labels(&["A", "A"]), &classes).unwrap_err();
        assert!(matches!(err, Error::ClassMissingInDomain { .. }));
    }

    #[test]
    fn profile_hand_computed() {
        let m = DptSimilarity::from_values(array![
            [1.0 / 9.0, -1.0 / 9.0],
            [-5.0 / 9.0, 5.0 / 9.0]
        ]);
        let classes = vec!["A".to_string(), "B".to_string()];
        let priors = array![0.5, 0.5];
        let profile = label_profile(&m, &labels(&["A", "B"]), &classes, &priors).unwrap();
        let expected = array![
            [2.0 / 9.0, -2.0 / 9.0],
            [-10.0 / 9.0, 10.0 / 9.0]
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(profile.values()[[i, j]], expected[[i, j]], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unlabeled_rows_still_get_profiles() {
        let m = DptSimilarity::from_values(array![
            [0.5, -0.25, -0.25],
            [-0.25, 0.5, -0.25],
            [-0.25, -0.25, 0.5]
        ]);
        let classes = vec!["A".to_string(), "B".to_string()];
        let priors = array![0.5, 0.5];
        // row 2 unlabeled; aggregation runs over labeled columns only
        let profile = label_profile(&m, &labels(&["A", "B", ""]), &classes, &priors).unwrap();
        assert_eq!(profile.n(), 3);
        assert_abs_diff_eq!(profile.values()[[2, 0]], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(profile.values()[[2, 1]], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn cosine_cost_parallel_antiparallel_orthogonal() {
        let source = profile_from(array![[1.0, 0.0], [3.0, 4.0]], &["A", "B"]);
        let target = profile_from(array![[2.0, 0.0], [-1.5, -2.0], [0.0, 5.0]], &["A", "B"]);
        let cost = cosine_cost(&source, &target).unwrap();
        // parallel rows
        assert_abs_diff_eq!(cost.values()[[0, 0]], 0.0, epsilon = 1e-12);
        // antiparallel rows
        assert_abs_diff_eq!(cost.values()[[1, 1]], 2.0, epsilon = 1e-12);
        // orthogonal rows: (1,0) vs (0,1)
        assert_abs_diff_eq!(cost.values()[[0, 2]], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_cost_rejects_mismatched_class_order() {
        let source = profile_from(array![[1.0, 0.0]], &["A", "B"]);
        let target = profile_from(array![[1.0, 0.0]], &["B", "A"]);
        assert!(matches!(
            cosine_cost(&source, &target),
            Err(Error::ClassOrderMismatch)
        ));
    }

    #[test]
    fn prior_normalization_survives_class_resampling() {
        // Brute-force oracle: aggregate over a label multiset in which every
        // class-0 sample is counted twice, with priors recomputed over the
        // extended multiset. Prior normalization rescales every profile row
        // by a common factor, so the cosine cost must not move.
        use crate::dataio::generate_blobs_pair;
        use crate::diffusion::{dpt_similarity, stationary_distribution};
        use crate::graph::{alpha_decay_kernel, diffusion_operator};

        let (x, y, _) = generate_blobs_pair(30, 3, 4, 4, 2.0, 12).unwrap();
        let classes = shared_classes(x.labels(), y.labels()).unwrap();
        let mut profiles = Vec::new();
        let mut doubled_profiles = Vec::new();
        for ds in [&x, &y] {
            let p = diffusion_operator(&alpha_decay_kernel(ds, 2.0, 5).unwrap());
            let phi0 = stationary_distribution(&p).unwrap();
            let m = dpt_similarity(&p, &phi0).unwrap();
            let priors = class_priors(ds.labels(), &classes).unwrap();
            profiles.push(label_profile(&m, ds.labels(), &classes, &priors).unwrap());

            // oracle: duplicate class-0 indices in the aggregation multiset
            let n = ds.n_samples();
            let mut multiset: Vec<(usize, usize)> = Vec::new();
            for (j, label) in ds.labels().iter().enumerate() {
                let label = label.as_deref().unwrap();
                let c = classes.iter().position(|x| x == label).unwrap();
                multiset.push((j, c));
                if c == 0 {
                    multiset.push((j, c));
                }
            }
            let total = multiset.len() as f64;
            let mut counts = vec![0usize; classes.len()];
            for &(_, c) in &multiset {
                counts[c] += 1;
            }
            let mut values = Array2::zeros((n, classes.len()));
            for &(j, c) in &multiset {
                for i in 0..n {
                    values[[i, c]] += m.values()[[i, j]];
                }
            }
            for c in 0..classes.len() {
                let prior = counts[c] as f64 / total;
                for i in 0..n {
                    values[[i, c]] /= prior;
                }
            }
            doubled_profiles.push(LabelProfile {
                values,
                class_order: classes.clone(),
                priors: Array1::from_iter(counts.iter().map(|&c| c as f64 / total)),
            });
        }

        let base = cosine_cost(&profiles[0], &profiles[1]).unwrap();
        let doubled = cosine_cost(&doubled_profiles[0], &doubled_profiles[1]).unwrap();
        for ((i, j), &v) in base.values().indexed_iter() {
            assert_abs_diff_eq!(v, doubled.values()[[i, j]], epsilon = 1e-9);
        }
    }

    #[test]
    fn cost_invariant_under_row_scaling() {
        let source = profile_from(array![[1.0, -2.0], [0.5, 0.25]], &["A", "B"]);
        let target = profile_from(array![[2.0, 1.0], [-1.0, 3.0]], &["A", "B"]);
        let base = cosine_cost(&source, &target).unwrap();
        let mut scaled_values = source.values.clone();
        for j in 0..2 {
            scaled_values[[0, j]] *= 17.5;
        }
        let scaled = cosine_cost(&profile_from(scaled_values, &["A", "B"]), &target).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(
                base.values()[[0, j]],
                scaled.values()[[0, j]],
                epsilon = 1e-12
            );
        }
    }
}
