//! Recover a point satisfying every constraint from a near-feasible one by
//! alternating projections between the per-link sets and the throughput
//! halfspaces.

use super::coordinator::z_projection;
use super::problem::Normalized;
use super::projection::{project_budget, project_budget_aggregate, project_capped_simplex};

/// Projection onto the α-simplices and licensed budget sets.
pub fn project_x(n: &Normalized, a: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let y = n.n_services;
    if y == 0 {
        return (Vec::new(), Vec::new());
    }
    let pa: Vec<f64> = a
        .chunks(y)
        .zip(&n.xi)
        .flat_map(|(c, &xi)| project_capped_simplex(c, xi, 1.0))
        .collect();
    let pu = match n.aggregate {
        Some(agg) => project_budget_aggregate(u, y, &n.budget, agg),
        None => u
            .chunks(y)
            .zip(&n.budget)
            .flat_map(|(c, &b)| project_budget(c, b))
            .collect(),
    };
    (pa, pu)
}

pub const REPAIR_TOL: f64 = 1e-12;

/// Point in the per-link sets whose throughput shortfall is at most
/// [`REPAIR_TOL`] (or as small as `max_rounds` rounds achieve).
pub fn repair(n: &Normalized, a: &[f64], u: &[f64], max_rounds: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut pa, mut pu) = project_x(n, a, u);
    let zeros = vec![0.0; n.len()];
    for _ in 0..max_rounds {
        if n.throughput_violation(&pa, &pu) <= REPAIR_TOL {
            break;
        }
        let (za, zu) = z_projection(&pa, &pu, &zeros, &zeros, &n.h, n.beta);
        let (na, nu) = project_x(n, &za, &zu);
        pa = na;
        pu = nu;
    }
    (pa, pu)
}
