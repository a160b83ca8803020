//! Entropic transport by alternating marginal scaling. Runs on the Gibbs
//! kernel directly when the exponent range is safe, and in the log domain
//! (potentials plus log-sum-exp) when `min(D)/epsilon` is large enough that
//! naive exponentiation would underflow everywhere.

use ndarray::{Array1, Array2};

use super::{Coupling, MassVectors};
use crate::bridge::CrossCost;
use crate::error::{Error, Result};

/// Default stopping tolerance on the largest marginal violation.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default iteration cap.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Exponent threshold beyond which the whole kernel underflows and the
/// iteration moves to the log domain.
const LOG_DOMAIN_THRESHOLD: f64 = 30.0;

/// Solve the entropic transport problem with cost `D` and the given
/// marginals, returning `T = diag(u) exp(-D/epsilon) diag(v)` scaled until
/// the largest marginal violation drops below `tol` or `max_iter` passes.
/// Non-convergence is flagged on the coupling, not fatal.
pub fn sinkhorn(
    cost: &CrossCost,
    masses: &MassVectors,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Coupling> {
    sinkhorn_impl(cost, masses, epsilon, tol, max_iter, None)
}

pub(crate) fn sinkhorn_impl(
    cost: &CrossCost,
    masses: &MassVectors,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<Coupling> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be > 0 for entropic transport, got {epsilon}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".to_string()));
    }
    let (n, m) = cost.dim();
    if masses.a().len() != n || masses.b().len() != m {
        return Err(Error::ShapeMismatch {
            context: "masses vs cost matrix",
            expected: format!("{n} and {m}"),
            actual: format!("{} and {}", masses.a().len(), masses.b().len()),
        });
    }

    let min_cost = cost.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let log_domain = min_cost / epsilon > LOG_DOMAIN_THRESHOLD;

    let (values, converged, iterations) = if log_domain {
        run_log_domain(cost, masses, epsilon, tol, max_iter, trace.as_deref_mut())
    } else {
        run_scaling(cost, masses, epsilon, tol, max_iter, trace.as_deref_mut())?
    };
    Ok(Coupling::new(values, epsilon, converged, iterations))
}

fn marginal_violation(t: &Array2<f64>, masses: &MassVectors) -> f64 {
    let (n, m) = t.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        worst = worst.max((t.row(i).sum() - masses.a()[i]).abs());
    }
    for j in 0..m {
        worst = worst.max((t.column(j).sum() - masses.b()[j]).abs());
    }
    worst
}

/// Plain scaling on the Gibbs kernel. Errors if a full row or column of the
/// kernel rounds to zero, or if the scalings blow up, both of which mean
/// `epsilon` is too small for this cost range.
fn run_scaling(
    cost: &CrossCost,
    masses: &MassVectors,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<(Array2<f64>, bool, usize)> {
    let (n, m) = cost.dim();
    let kernel = cost.values().mapv(|d| (-d / epsilon).exp());
    for i in 0..n {
        if kernel.row(i).sum() == 0.0 {
            return Err(Error::KernelUnderflow {
                what: format!("row {i}"),
            });
        }
    }
    for j in 0..m {
        if kernel.column(j).sum() == 0.0 {
            return Err(Error::KernelUnderflow {
                what: format!("column {j}"),
            });
        }
    }

    let mut u = Array1::from_elem(n, 1.0);
    let mut v = Array1::from_elem(m, 1.0);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let kv = kernel.dot(&v);
        for i in 0..n {
            u[i] = masses.a()[i] / kv[i];
        }
        let ktu = kernel.t().dot(&u);
        for j in 0..m {
            v[j] = masses.b()[j] / ktu[j];
        }
        iterations += 1;
        if u.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::KernelUnderflow {
                what: "scaling vectors (iteration diverged)".to_string(),
            });
        }
        let t = assemble(&kernel, &u, &v);
        let violation = marginal_violation(&t, masses);
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(violation);
        }
        if violation < tol {
            converged = true;
            return Ok((t, converged, iterations));
        }
    }
    let t = assemble(&kernel, &u, &v);
    Ok((t, converged, iterations))
}

fn assemble(kernel: &Array2<f64>, u: &Array1<f64>, v: &Array1<f64>) -> Array2<f64> {
    let (n, m) = kernel.dim();
    Array2::from_shape_fn((n, m), |(i, j)| u[i] * kernel[[i, j]] * v[j])
}

/// Log-domain iteration on the dual potentials; immune to kernel underflow.
fn run_log_domain(
    cost: &CrossCost,
    masses: &MassVectors,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> (Array2<f64>, bool, usize) {
    let (n, m) = cost.dim();
    let d = cost.values();
    let log_a = masses.a().mapv(f64::ln);
    let log_b = masses.b().mapv(f64::ln);
    let mut f = Array1::<f64>::zeros(n);
    let mut g = Array1::<f64>::zeros(m);
    let mut scratch = vec![0.0f64; n.max(m)];

    let mut iterations = 0;
    let mut converged = false;
    let mut t = Array2::zeros((n, m));
    while iterations < max_iter {
        for i in 0..n {
            for (j, slot) in scratch.iter_mut().take(m).enumerate() {
                *slot = (g[j] - d[[i, j]]) / epsilon;
            }
            f[i] = epsilon * (log_a[i] - log_sum_exp(&scratch[..m]));
        }
        for j in 0..m {
            for (i, slot) in scratch.iter_mut().take(n).enumerate() {
                *slot = (f[i] - d[[i, j]]) / epsilon;
            }
            g[j] = epsilon * (log_b[j] - log_sum_exp(&scratch[..n]));
        }
        iterations += 1;
        for i in 0..n {
            for j in 0..m {
                t[[i, j]] = ((f[i] + g[j] - d[[i, j]]) / epsilon).exp();
            }
        }
        let violation = marginal_violation(&t, masses);
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(violation);
        }
        if violation < tol {
            converged = true;
            break;
        }
    }
    (t, converged, iterations)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}
