//! Stationary distribution of the diffusion operator and the
//! time-aggregated similarity matrix summing the deflated operator over all
//! walk lengths.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Factorize, Solve};

use crate::error::{Error, Result};
use crate::graph::DiffusionOperator;

const RESIDUAL_TOL: f64 = 1e-10;
const ROW_SUM_TOL: f64 = 1e-8;

/// Stationary law of the random walk; for operators normalized from a
/// symmetric affinity this is the degree distribution.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    phi0: Array1<f64>,
}

impl StationaryDistribution {
    pub fn phi0(&self) -> &Array1<f64> {
        &self.phi0
    }

    pub fn n(&self) -> usize {
        self.phi0.len()
    }
}

/// Aggregated diffusion similarity over every walk length; rows sum to zero
/// and entries may be negative.
#[derive(Debug, Clone)]
pub struct DptSimilarity {
    values: Array2<f64>,
}

impl DptSimilarity {
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    #[cfg(test)]
    pub(crate) fn from_values(values: Array2<f64>) -> Self {
        Self { values }
    }
}

/// Compute the stationary distribution from the recorded degrees,
/// `phi0(i) = deg(i) / sum(deg)`, and verify it is a left fixed point of
/// the operator before returning.
pub fn stationary_distribution(operator: &DiffusionOperator) -> Result<StationaryDistribution> {
    let total: f64 = operator.degrees().sum();
    let phi0 = operator.degrees() / total;
    // left-eigenvector residual ||phi0^T P - phi0^T||_inf
    let projected = phi0.dot(operator.values());
    let residual = projected
        .iter()
        .zip(phi0.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > RESIDUAL_TOL {
        return Err(Error::StationaryResidual {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }
    Ok(StationaryDistribution { phi0 })
}

/// Aggregate transition probabilities over every walk length:
/// `M = (I - (P - 1 phi0^T))^{-1} - I`, computed by factorizing
/// `A = I - P + 1 phi0^T` and solving against the identity.
///
/// A disconnected graph makes `A` singular; this surfaces either as a
/// factorization failure or as a violation of the zero-row-sum invariant,
/// both reported as [`Error::SingularSystem`].
pub fn dpt_similarity(
    operator: &DiffusionOperator,
    stationary: &StationaryDistribution,
) -> Result<DptSimilarity> {
    let n = operator.n();
    if stationary.n() != n {
        return Err(Error::ShapeMismatch {
            context: "operator vs stationary distribution",
            expected: n.to_string(),
            actual: stationary.n().to_string(),
        });
    }
    let phi0 = stationary.phi0();

    // A = I - P + 1 phi0^T
    let mut a = Array2::from_shape_fn((n, n), |(_, j)| phi0[j]);
    a -= operator.values();
    for i in 0..n {
        a[[i, i]] += 1.0;
    }

    let lu = a.factorize().map_err(|e| Error::SingularSystem {
        detail: format!("factorization failed: {e}"),
    })?;

    let mut values = Array2::zeros((n, n));
    let mut rhs = Array1::zeros(n);
    for j in 0..n {
        rhs.fill(0.0);
        rhs[j] = 1.0;
        let col = lu.solve(&rhs).map_err(|e| Error::SingularSystem {
            detail: format!("solve failed: {e}"),
        })?;
        values.column_mut(j).assign(&col);
    }
    for i in 0..n {
        values[[i, i]] -= 1.0;
    }

    // each series term has zero row sums, so M must too; a blow-up here
    // means A was numerically singular (disconnected graph)
    for i in 0..n {
        let row_sum: f64 = values.row(i).sum();
        if row_sum.abs() > ROW_SUM_TOL || !row_sum.is_finite() {
            return Err(Error::SingularSystem {
                detail: format!("row {i} of the aggregated similarity sums to {row_sum:.3e}"),
            });
        }
    }
    Ok(DptSimilarity { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::DomainDataset;
    use crate::graph::{alpha_decay_kernel, diffusion_operator};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_operator(n: usize, seed: u64) -> DiffusionOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features = Array2::from_shape_fn((n, 3), |_| rng.random_range(0.0..1.0));
        let ds = DomainDataset::new(features, vec![None; n], "t").unwrap();
        diffusion_operator(&alpha_decay_kernel(&ds, 2.0, (n / 3).max(2)).unwrap())
    }

    fn deflated(p: &Array2<f64>, phi0: &Array1<f64>) -> Array2<f64> {
        let n = p.nrows();
        let mut d = p.clone();
        for i in 0..n {
            for j in 0..n {
                d[[i, j]] -= phi0[j];
            }
        }
        d
    }

    /// Independent oracle: partial sum of the deflated operator powers.
    fn truncated_series(p: &Array2<f64>, phi0: &Array1<f64>, t_max: usize) -> Array2<f64> {
        let d = deflated(p, phi0);
        let mut term = d.clone();
        let mut acc = d.clone();
        for _ in 2..=t_max {
            term = term.dot(&d);
            acc += &term;
        }
        acc
    }

    #[test]
    fn stationary_uniform_for_constant_degree() {
        let w = array![[1.0, 0.3, 0.3], [0.3, 1.0, 0.3], [0.3, 0.3, 1.0]];
        let degrees = array![1.6, 1.6, 1.6];
        let p = DiffusionOperator::from_parts(w / 1.6, degrees).unwrap();
        let phi0 = stationary_distribution(&p).unwrap();
        for &v in phi0.phi0() {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn stationary_2x2_closed_form() {
        let p = DiffusionOperator::from_parts(
            array![[1.0 / 1.5, 0.5 / 1.5], [0.5 / 1.5, 1.0 / 1.5]],
            array![1.5, 1.5],
        )
        .unwrap();
        let phi0 = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(phi0.phi0()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(phi0.phi0()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn stationary_matches_power_iteration() {
        let p = random_operator(30, 17);
        let phi0 = stationary_distribution(&p).unwrap();
        // dominant left eigenvector by power iteration on P^T
        let mut v = Array1::from_elem(30, 1.0 / 30.0);
        for _ in 0..5000 {
            v = v.dot(p.values());
            let s = v.sum();
            v /= s;
        }
        for i in 0..30 {
            assert_abs_diff_eq!(phi0.phi0()[i], v[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn single_state_chain() {
        let p = DiffusionOperator::from_parts(array![[1.0]], array![1.0]).unwrap();
        let phi0 = stationary_distribution(&p).unwrap();
        let m = dpt_similarity(&p, &phi0).unwrap();
        assert_eq!(m.values()[[0, 0]], 0.0);
    }

    #[test]
    fn hand_computed_2x2_chain() {
        // reversible chain with degrees (5, 1)
        let p = DiffusionOperator::from_parts(
            array![[0.9, 0.1], [0.5, 0.5]],
            array![5.0, 1.0],
        )
        .unwrap();
        let phi0 = stationary_distribution(&p).unwrap();
        assert_abs_diff_eq!(phi0.phi0()[0], 5.0 / 6.0, epsilon = 1e-15);
        let m = dpt_similarity(&p, &phi0).unwrap();
        let expected = array![
            [1.0 / 9.0, -1.0 / 9.0],
            [-5.0 / 9.0, 5.0 / 9.0]
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m.values()[[i, j]], expected[[i, j]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn matches_truncated_series() {
        let p = random_operator(10, 99);
        let phi0 = stationary_distribution(&p).unwrap();
        let m = dpt_similarity(&p, &phi0).unwrap();
        let oracle = truncated_series(p.values(), phi0.phi0(), 500);
        for i in 0..10 {
            for j in 0..10 {
                assert_abs_diff_eq!(m.values()[[i, j]], oracle[[i, j]], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn deflated_power_identity() {
        // (P - 1 phi0^T)^t = P^t - 1 phi0^T for t >= 1
        let p = random_operator(8, 4);
        let phi0 = stationary_distribution(&p).unwrap();
        let d = deflated(p.values(), phi0.phi0());
        let mut d_pow = d.clone();
        let mut p_pow = p.values().clone();
        for _t in 1..=5 {
            let expected = deflated(&p_pow, phi0.phi0());
            for i in 0..8 {
                for j in 0..8 {
                    assert_abs_diff_eq!(d_pow[[i, j]], expected[[i, j]], epsilon = 1e-10);
                }
            }
            d_pow = d_pow.dot(&d);
            p_pow = p_pow.dot(p.values());
        }
    }

    #[test]
    fn rows_sum_to_zero() {
        let p = random_operator(25, 7);
        let phi0 = stationary_distribution(&p).unwrap();
        let m = dpt_similarity(&p, &phi0).unwrap();
        for i in 0..25 {
            assert_abs_diff_eq!(m.values().row(i).sum(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn permutation_equivariance() {
        let p = random_operator(12, 21);
        let phi0 = stationary_distribution(&p).unwrap();
        let m = dpt_similarity(&p, &phi0).unwrap();

        // rotate the sample order by 5
        let n = 12;
        let perm: Vec<usize> = (0..n).map(|i| (i + 5) % n).collect();
        let mut pv = Array2::zeros((n, n));
        let mut deg = Array1::zeros(n);
        for i in 0..n {
            deg[i] = p.degrees()[perm[i]];
            for j in 0..n {
                pv[[i, j]] = p.values()[[perm[i], perm[j]]];
            }
        }
        let p2 = DiffusionOperator::from_parts(pv, deg).unwrap();
        let phi2 = stationary_distribution(&p2).unwrap();
        let m2 = dpt_similarity(&p2, &phi2).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(
                    m2.values()[[i, j]],
                    m.values()[[perm[i], perm[j]]],
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn disconnected_graph_is_singular() {
        // two disjoint 2-cliques
        let c = 0.5;
        let row = [1.0 / 1.5, 0.5 / 1.5];
        let p = DiffusionOperator::from_parts(
            array![
                [row[0], row[1], 0.0, 0.0],
                [row[1], row[0], 0.0, 0.0],
                [0.0, 0.0, row[0], row[1]],
                [0.0, 0.0, row[1], row[0]]
            ],
            array![1.0 + c, 1.0 + c, 1.0 + c, 1.0 + c],
        )
        .unwrap();
        let phi0 = stationary_distribution(&p).unwrap();
        let err = dpt_similarity(&p, &phi0).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }), "{err}");
    }
}
