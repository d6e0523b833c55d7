//! Coordinator-side updates: the licensed (w) block, the auxiliary copy Z
//! and the scaled duals Λ. The coordinator holds the licensed-band prices
//! and budgets and the throughput thresholds; it never sees the links'
//! α-side prices or access budgets.

use super::projection::{project_budget, project_budget_aggregate, project_halfspace};
use super::SolveError;

/// Minimizer of `−gradᵀu + (γ/2)‖u − z + λ‖²` over `{u ≥ 0, Σ_l u_kl ≤ b_k}`
/// (and `Σ u ≤ aggregate` when given), with blocks of `n_services` per link.
pub fn w_subproblem(
    z: &[f64],
    lambda: &[f64],
    gamma: f64,
    budgets: &[f64],
    aggregate: Option<f64>,
    grad: &[f64],
    n_services: usize,
) -> Result<Vec<f64>, SolveError> {
    if !(gamma > 0.0) {
        return Err(SolveError::InvalidInput(format!("penalty must be > 0, got {gamma}")));
    }
    let shifted: Vec<f64> = (0..z.len())
        .map(|i| z[i] - lambda[i] + grad[i] / gamma)
        .collect();
    if n_services == 0 {
        return Ok(shifted);
    }
    Ok(match aggregate {
        Some(a) => project_budget_aggregate(&shifted, n_services, budgets, a),
        None => shifted
            .chunks(n_services)
            .zip(budgets)
            .flat_map(|(c, &b)| project_budget(c, b))
            .collect(),
    })
}

/// Project `X + Λ` onto `{u + β·α ≥ h}` pair by pair.
/// Returns `(z_alpha, z_u)`.
#[allow(clippy::too_many_arguments)]
pub fn z_projection(
    x_alpha: &[f64],
    x_u: &[f64],
    lambda_alpha: &[f64],
    lambda_u: &[f64],
    h: &[f64],
    beta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut za = Vec::with_capacity(h.len());
    let mut zu = Vec::with_capacity(h.len());
    for i in 0..h.len() {
        let (a, u) = project_halfspace(x_alpha[i] + lambda_alpha[i], x_u[i] + lambda_u[i], beta, h[i]);
        za.push(a);
        zu.push(u);
    }
    (za, zu)
}

/// Scaled dual ascent `Λ + X − Z`.
pub fn dual_update(lambda: &[f64], x: &[f64], z: &[f64]) -> Vec<f64> {
    (0..lambda.len()).map(|i| lambda[i] + x[i] - z[i]).collect()
}

#[derive(Debug, Clone)]
pub struct Coordinator {
    grad_u: Vec<f64>,
    budgets: Vec<f64>,
    aggregate: Option<f64>,
    h: Vec<f64>,
    beta: f64,
    n_services: usize,
}

impl Coordinator {
    pub fn new(
        grad_u: Vec<f64>,
        budgets: Vec<f64>,
        aggregate: Option<f64>,
        h: Vec<f64>,
        beta: f64,
        n_services: usize,
    ) -> Self {
        Coordinator {
            grad_u,
            budgets,
            aggregate,
            h,
            beta,
            n_services,
        }
    }

    pub fn w_update(&self, z_u: &[f64], lambda_u: &[f64], gamma: f64) -> Result<Vec<f64>, SolveError> {
        w_subproblem(z_u, lambda_u, gamma, &self.budgets, self.aggregate, &self.grad_u, self.n_services)
    }

    pub fn z_update(
        &self,
        x_alpha: &[f64],
        x_u: &[f64],
        lambda_alpha: &[f64],
        lambda_u: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        z_projection(x_alpha, x_u, lambda_alpha, lambda_u, &self.h, self.beta)
    }
}
