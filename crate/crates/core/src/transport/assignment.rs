//! Exact linear assignment by the shortest-augmenting-path method with dual
//! potentials, O(n^3). Ties are broken by scan order, so the returned
//! permutation is deterministic (first found).

use ndarray::Array2;

use super::Coupling;
use crate::bridge::CrossCost;
use crate::error::{Error, Result};

/// Minimize `<T, D>` over permutation matrices for a square cost. The
/// coupling has unit masses: exactly one 1 per row and per column.
pub fn exact_assignment(cost: &CrossCost) -> Result<Coupling> {
    let (n, m) = cost.dim();
    if n != m {
        return Err(Error::NonSquareCost { n, m });
    }
    let row_of_col = solve_lap(cost.values(), n);

    let mut values = Array2::zeros((n, n));
    for (j, &i) in row_of_col.iter().enumerate() {
        values[[i, j]] = 1.0;
    }
    Ok(Coupling::new(values, 0.0, true, 0))
}

/// Shortest augmenting path with potentials (1-indexed internally; index 0
/// is the virtual unmatched slot). Returns `row_of_col`.
fn solve_lap(cost: &Array2<f64>, n: usize) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        // unwind the augmenting path
        while j0 != 0 {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
        }
    }

    (1..=n).map(|j| matched_row[j] - 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cost_from(values: Array2<f64>) -> CrossCost {
        CrossCost::from_values(values).unwrap()
    }

    /// Exhaustive minimum over all permutations (test oracle).
    fn brute_force_cost(cost: &Array2<f64>) -> f64 {
        let n = cost.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, cost, &mut best);
        best
    }

    fn permute(perm: &mut Vec<usize>, k: usize, cost: &Array2<f64>, best: &mut f64) {
        let n = perm.len();
        if k == n {
            let total: f64 = (0..n).map(|i| cost[[i, perm[i]]]).sum();
            if total < *best {
                *best = total;
            }
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            permute(perm, k + 1, cost, best);
            perm.swap(k, i);
        }
    }

    #[test]
    fn zero_diagonal_recovers_identity() {
        let mut values = Array2::from_elem((4, 4), 1.5);
        for i in 0..4 {
            values[[i, i]] = 0.0;
        }
        let coupling = exact_assignment(&cost_from(values)).unwrap();
        for i in 0..4 {
            assert_eq!(coupling.values()[[i, i]], 1.0);
        }
        assert_eq!(coupling.values().sum(), 4.0);
    }

    #[test]
    fn matches_brute_force_on_random_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.random_range(2..=7);
            let values = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..2.0));
            let coupling = exact_assignment(&cost_from(values.clone())).unwrap();
            let cost = coupling.transport_cost(&values);
            let oracle = brute_force_cost(&values);
            assert_abs_diff_eq!(cost, oracle, epsilon = 1e-10);
            // valid permutation: one unit entry per row and column
            for i in 0..n {
                assert_abs_diff_eq!(coupling.values().row(i).sum(), 1.0, epsilon = 0.0);
                assert_abs_diff_eq!(coupling.values().column(i).sum(), 1.0, epsilon = 0.0);
            }
        }
    }

    #[test]
    fn constant_cost_returns_valid_permutation() {
        let values = Array2::from_elem((5, 5), 0.7);
        let coupling = exact_assignment(&cost_from(values.clone())).unwrap();
        assert_abs_diff_eq!(coupling.transport_cost(&values), 3.5, epsilon = 1e-12);
        for i in 0..5 {
            assert_eq!(coupling.values().row(i).sum(), 1.0);
            assert_eq!(coupling.values().column(i).sum(), 1.0);
        }
    }

    #[test]
    fn rejects_non_square() {
        let values = Array2::from_elem((2, 3), 0.5);
        assert!(matches!(
            exact_assignment(&cost_from(values)),
            Err(Error::NonSquareCost { n: 2, m: 3 })
        ));
    }

    #[test]
    fn cost_shift_moves_total_by_n_times_constant() {
        // dyadic entries keep every sum exact in floating point
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.random_range(2..=6);
            let values =
                Array2::from_shape_fn((n, n), |_| rng.random_range(0..64) as f64 / 64.0);
            let shift = 0.5;
            let shifted = &values + shift;
            let base = exact_assignment(&cost_from(values.clone())).unwrap();
            let moved = exact_assignment(&cost_from(shifted.clone())).unwrap();
            let base_cost = base.transport_cost(&values);
            let moved_cost = moved.transport_cost(&shifted);
            assert_eq!(moved_cost, base_cost + n as f64 * shift);
            // and the shifted optimum is still optimal for the original cost
            assert_eq!(moved.transport_cost(&values), base_cost);
        }
    }

    #[test]
    fn example_3x3() {
        let values = array![
            [0.2, 1.0, 1.0],
            [1.0, 1.0, 0.1],
            [1.0, 0.3, 1.0]
        ];
        let coupling = exact_assignment(&cost_from(values.clone())).unwrap();
        assert_eq!(coupling.values()[[0, 0]], 1.0);
        assert_eq!(coupling.values()[[1, 2]], 1.0);
        assert_eq!(coupling.values()[[2, 1]], 1.0);
        assert_abs_diff_eq!(coupling.transport_cost(&values), 0.6, epsilon = 1e-12);
    }
}
