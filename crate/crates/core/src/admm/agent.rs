//! Link-side α update. An agent sees only its own prices, rate and access
//! budget; it exchanges the α block and receives its `(Z, Λ)` blocks.

use super::projection::project_capped_simplex;
use super::SolveError;

/// Minimizer of `−gradᵀα + (γ/2)‖α − z + λ‖²` over
/// `{Σα = xi_budget, 0 ≤ α ≤ 1}`: the projection of `z − λ + grad/γ`.
pub fn alpha_subproblem(
    z: &[f64],
    lambda: &[f64],
    gamma: f64,
    xi_budget: f64,
    grad: &[f64],
) -> Result<Vec<f64>, SolveError> {
    if !(gamma > 0.0) {
        return Err(SolveError::InvalidInput(format!("penalty must be > 0, got {gamma}")));
    }
    if !(0.0..=1.0).contains(&xi_budget) {
        return Err(SolveError::InvalidInput(format!(
            "access budget {xi_budget} outside [0, 1]"
        )));
    }
    let shifted: Vec<f64> = (0..z.len())
        .map(|i| z[i] - lambda[i] + grad[i] / gamma)
        .collect();
    Ok(project_capped_simplex(&shifted, xi_budget, 1.0))
}

#[derive(Debug, Clone)]
pub struct LinkAgent {
    /// Gradient of the unlicensed utility in α (β · c).
    grad: Vec<f64>,
    xi: f64,
}

impl LinkAgent {
    pub fn new(grad: Vec<f64>, xi: f64) -> Self {
        LinkAgent { grad, xi }
    }

    pub fn update(&self, z: &[f64], lambda: &[f64], gamma: f64) -> Result<Vec<f64>, SolveError> {
        alpha_subproblem(z, lambda, gamma, self.xi, &self.grad)
    }
}
