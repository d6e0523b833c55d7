use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Objective of the current primal iterate, currency per second.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Largest constraint violation of the primal iterate, normalized units.
    pub max_violation: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub solver: String,
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn new(solver: &str) -> Self {
        ConvergenceTrace {
            solver: solver.to_string(),
            records: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,objective,primal_residual,dual_residual,max_violation\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.6e},{:.6e},{:.6e}",
                r.iteration, r.objective, r.primal_residual, r.dual_residual, r.max_violation
            );
        }
        s
    }

    /// Two-column `iteration,objective` series.
    pub fn objective_series_csv(&self) -> String {
        let mut s = String::from("iteration,objective\n");
        for r in &self.records {
            let _ = writeln!(s, "{},{:.12e}", r.iteration, r.objective);
        }
        s
    }

    /// First iteration whose iterate is within `tol` relative objective gap
    /// of `optimum` and violates no constraint by more than `tol`.
    pub fn iterations_to_gap(&self, optimum: f64, tol: f64) -> Option<usize> {
        let scale = optimum.abs().max(f64::MIN_POSITIVE);
        self.records
            .iter()
            .find(|r| (r.objective - optimum).abs() / scale <= tol && r.max_violation <= tol)
            .map(|r| r.iteration)
    }
}
