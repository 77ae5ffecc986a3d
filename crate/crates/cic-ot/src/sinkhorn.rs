//! Entropy-regularized transport via Sinkhorn iterations in the log domain.

use crate::error::{Error, Result};
use crate::exact::{cost_matrix, TransportPlan};
use crate::measure::EmpiricalMeasure;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Outcome of a Sinkhorn solve. Non-convergence is reported, not fatal.
#[derive(Debug, Clone)]
pub struct SinkhornResult {
    pub plan: TransportPlan,
    /// Unregularized transport cost `<plan, C>` of the returned plan.
    pub cost: f64,
    pub iterations: usize,
    pub marginal_violation: f64,
    pub converged: bool,
}

/// Minimizes `<pi, C> + lambda * Omega(pi)` over couplings of the two
/// measures, where `Omega` is the (negative) entropy of the plan.
///
/// Runs in the log domain (log-sum-exp updates) so small `lambda` does not
/// underflow. Stops when the worst marginal violation drops below `tol` or
/// after `max_iter` sweeps.
pub fn sinkhorn_plan(
    source: &EmpiricalMeasure,
    target: &EmpiricalMeasure,
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> Result<SinkhornResult> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            left: source.dim(),
            right: target.dim(),
        });
    }
    let n = source.len();
    let m = target.len();
    let cost = cost_matrix(source, target);
    let log_a: Vec<f64> = source.weights().iter().map(|w| w.max(f64::MIN_POSITIVE).ln()).collect();
    let log_b: Vec<f64> = target.weights().iter().map(|w| w.max(f64::MIN_POSITIVE).ln()).collect();

    // Potentials of pi_ij = exp((f_i + g_j - c_ij) / lambda).
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut scratch = vec![0.0; n.max(m)];

    let mut iterations = 0;
    let mut violation = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // g-update makes the column marginals exact.
        for j in 0..m {
            for (i, s) in scratch[..n].iter_mut().enumerate() {
                *s = (f[i] - cost[i * m + j]) / lambda;
            }
            g[j] = lambda * (log_b[j] - log_sum_exp(&scratch[..n]));
        }
        // f-update makes the row marginals exact; columns then carry the
        // residual we measure.
        for i in 0..n {
            let row = &cost[i * m..(i + 1) * m];
            for ((s, &gj), &c) in scratch[..m].iter_mut().zip(&g).zip(row) {
                *s = (gj - c) / lambda;
            }
            f[i] = lambda * (log_a[i] - log_sum_exp(&scratch[..m]));
        }
        // Column violation of the current plan.
        let mut col = vec![0.0; m];
        for i in 0..n {
            let row = &cost[i * m..(i + 1) * m];
            for ((cj, &gj), &c) in col.iter_mut().zip(&g).zip(row) {
                *cj += ((f[i] + gj - c) / lambda).exp();
            }
        }
        violation = col
            .iter()
            .zip(target.weights())
            .map(|(s, w)| (s - w).abs())
            .fold(0.0, f64::max);
        if violation < tol {
            converged = true;
            break;
        }
    }

    let mut coupling = vec![0.0; n * m];
    let mut total_cost = 0.0;
    for i in 0..n {
        for j in 0..m {
            let c = cost[i * m + j];
            let p = ((f[i] + g[j] - c) / lambda).exp();
            coupling[i * m + j] = p;
            total_cost += p * c;
        }
    }
    let plan = TransportPlan::from_parts(
        coupling,
        source.weights().to_vec(),
        target.weights().to_vec(),
    );

    Ok(SinkhornResult {
        plan,
        cost: total_cost,
        iterations,
        marginal_violation: violation,
        converged,
    })
}

/// Sinkhorn with the library defaults for tolerance and iteration budget.
pub fn sinkhorn_plan_default(
    source: &EmpiricalMeasure,
    target: &EmpiricalMeasure,
    lambda: f64,
) -> Result<SinkhornResult> {
    sinkhorn_plan(source, target, lambda, DEFAULT_MAX_ITER, DEFAULT_TOL)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}
