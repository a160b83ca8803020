//! Solve for the coupling between domains from the cross cost: exact linear
//! assignment at `epsilon = 0`, entropic scaling iterations at
//! `epsilon > 0`, with mass rebalancing for unequal sample counts.

mod assignment;
mod sinkhorn;

pub use assignment::exact_assignment;
pub use sinkhorn::{sinkhorn, DEFAULT_MAX_ITER, DEFAULT_TOL};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Feasible marginals for the coupling polytope. Totals match on both sides
/// and every entry is positive.
#[derive(Debug, Clone)]
pub struct MassVectors {
    a: Array1<f64>,
    b: Array1<f64>,
}

impl MassVectors {
    pub fn new(a: Array1<f64>, b: Array1<f64>) -> Result<Self> {
        for (side, v) in [("source", &a), ("target", &b)] {
            if let Some(index) = v.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::NonPositiveMass { side, index });
            }
        }
        let sum_a = a.sum();
        let sum_b = b.sum();
        if (sum_a - sum_b).abs() > 1e-10 {
            return Err(Error::InfeasibleMasses { sum_a, sum_b });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Array1<f64> {
        &self.a
    }

    pub fn b(&self) -> &Array1<f64> {
        &self.b
    }
}

/// Uniform masses with the rebalancing `b = a * n / m`: total mass is `n`
/// on both sides, so hard couplings keep entries of order one.
pub fn uniform_masses(n: usize, m: usize) -> Result<MassVectors> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "mass vectors need at least one sample per side".to_string(),
        ));
    }
    let a = Array1::from_elem(n, 1.0);
    let b = Array1::from_elem(m, n as f64 / m as f64);
    MassVectors::new(a, b)
}

/// Nonnegative transport plan with prescribed marginals.
#[derive(Debug, Clone)]
pub struct Coupling {
    values: Array2<f64>,
    epsilon: f64,
    converged: bool,
    iterations: usize,
}

impl Coupling {
    pub(crate) fn new(
        values: Array2<f64>,
        epsilon: f64,
        converged: bool,
        iterations: usize,
    ) -> Self {
        Self {
            values,
            epsilon,
            converged,
            iterations,
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn dim(&self) -> (usize, usize) {
        self.values.dim()
    }

    /// Transport cost `<T, D>` against a cost matrix of matching shape.
    pub fn transport_cost(&self, cost: &Array2<f64>) -> f64 {
        self.values
            .iter()
            .zip(cost.iter())
            .map(|(t, d)| t * d)
            .sum()
    }

    /// Largest deviation of the row/column sums from the prescribed masses.
    pub fn marginal_violation(&self, masses: &MassVectors) -> f64 {
        let (n, m) = self.values.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((self.values.row(i).sum() - masses.a[i]).abs());
        }
        for j in 0..m {
            worst = worst.max((self.values.column(j).sum() - masses.b[j]).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_masses_balanced() {
        let masses = uniform_masses(5, 5).unwrap();
        assert_eq!(masses.a().to_vec(), vec![1.0; 5]);
        assert_eq!(masses.b().to_vec(), vec![1.0; 5]);
    }

    #[test]
    fn uniform_masses_rebalanced() {
        let masses = uniform_masses(4, 2).unwrap();
        assert_eq!(masses.b().to_vec(), vec![2.0, 2.0]);
        let masses = uniform_masses(2, 4).unwrap();
        assert_eq!(masses.b().to_vec(), vec![0.5; 4]);
        assert_abs_diff_eq!(masses.a().sum(), masses.b().sum(), epsilon = 1e-12);
    }

    #[test]
    fn mass_validation() {
        let err = MassVectors::new(Array1::from_vec(vec![1.0, -1.0]), Array1::from_vec(vec![0.0]));
        assert!(matches!(err, Err(Error::NonPositiveMass { .. })));
        let err = MassVectors::new(Array1::from_vec(vec![1.0]), Array1::from_vec(vec![2.0]));
        assert!(matches!(err, Err(Error::InfeasibleMasses { .. })));
    }
}
