//! Exact centralized solve with a simplex LP solver, used as the reference
//! for the distributed solvers.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::problem::{Infeasibility, Normalized, SlicingProblem};
use super::solution::SlicingSolution;
use super::{ConstraintFamily, SolveError};

/// Feasibility tolerance for the closed-form pre-check, normalized units.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Closed-form feasibility test mapped to a solver error.
pub fn diagnose(p: &SlicingProblem, n: &Normalized) -> Result<(), SolveError> {
    match n.feasibility(FEASIBILITY_TOL) {
        Ok(()) => Ok(()),
        Err(Infeasibility::Throughput {
            link_index,
            need,
            budget,
        }) => Err(SolveError::Infeasible {
            family: ConstraintFamily::Throughput,
            link: Some(p.links[link_index].id),
            detail: format!(
                "link {} needs {:.6e} Hz of licensed bandwidth beyond its unlicensed share, budget is {:.6e} Hz",
                p.links[link_index].id,
                need * n.bw_ref,
                budget * n.bw_ref
            ),
        }),
        Err(Infeasibility::Aggregate { need, budget }) => Err(SolveError::Infeasible {
            family: ConstraintFamily::AggregateBudget,
            link: None,
            detail: format!(
                "links need {:.6e} Hz of licensed bandwidth in total, {:.6e} Hz exist",
                need * n.bw_ref,
                budget * n.bw_ref
            ),
        }),
    }
}

/// Optimal vertex of the slicing LP.
pub fn solve_lp_oracle(p: &SlicingProblem) -> Result<SlicingSolution, SolveError> {
    p.validate()?;
    let n = p.normalized();
    diagnose(p, &n)?;
    let y = n.n_services;
    let len = n.len();
    if len == 0 {
        return Ok(SlicingSolution::from_normalized(p, &n, &[], &[]));
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let a: Vec<_> = (0..len).map(|i| lp.add_var(n.beta * n.c[i], (0.0, 1.0))).collect();
    let u: Vec<_> = (0..len).map(|i| lp.add_var(n.c[i], (0.0, f64::INFINITY))).collect();
    for k in 0..n.n_links {
        let idx = k * y..(k + 1) * y;
        let sum_a: Vec<_> = idx.clone().map(|i| (a[i], 1.0)).collect();
        lp.add_constraint(sum_a.as_slice(), ComparisonOp::Eq, n.xi[k]);
        let sum_u: Vec<_> = idx.clone().map(|i| (u[i], 1.0)).collect();
        lp.add_constraint(sum_u.as_slice(), ComparisonOp::Le, n.budget[k]);
        for i in idx {
            if n.h[i] > 0.0 {
                lp.add_constraint([(u[i], 1.0), (a[i], n.beta)].as_slice(), ComparisonOp::Ge, n.h[i]);
            }
        }
    }
    if let Some(agg) = n.aggregate {
        let all: Vec<_> = u.iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(all.as_slice(), ComparisonOp::Le, agg);
    }
    let outcome = lp.solve().map_err(|e| match e {
        microlp::Error::Infeasible => SolveError::Infeasible {
            family: ConstraintFamily::Unknown,
            link: None,
            detail: "simplex reports no feasible point".into(),
        },
        other => SolveError::Numerical(other.to_string()),
    })?;
    let sol = outcome
        .into_solution()
        .map_err(|_| SolveError::Numerical("LP solve interrupted".into()))?;
    let av: Vec<f64> = a.iter().map(|&v| sol.var_value(v).clamp(0.0, 1.0)).collect();
    let uv: Vec<f64> = u.iter().map(|&v| sol.var_value(v).max(0.0)).collect();
    Ok(SlicingSolution::from_normalized(p, &n, &av, &uv))
}
