//! Dual decomposition baseline: the throughput constraints are priced by
//! multipliers μ ≥ 0, every link solves its linear subproblem at a vertex,
//! and μ moves along the negative constraint residual. Primal iterates are
//! ergodic averages of the subproblem solutions.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::lp::diagnose;
use super::problem::{Normalized, SlicingProblem};
use super::repair::repair;
use super::solution::SlicingSolution;
use super::solver::{SolveOutcome, SolveStatus};
use super::trace::{ConvergenceTrace, TraceRecord};
use super::SolveError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "a0", rename_all = "snake_case")]
pub enum StepRule {
    /// `a_t = a0`.
    Constant(f64),
    /// `a_t = a0 / sqrt(t)`.
    DiminishingSqrt(f64),
    /// `a_t = a0 / t`.
    Harmonic(f64),
}

impl StepRule {
    pub fn step(&self, t: usize) -> f64 {
        let t = t.max(1) as f64;
        match *self {
            StepRule::Constant(a) => a,
            StepRule::DiminishingSqrt(a) => a / t.sqrt(),
            StepRule::Harmonic(a) => a / t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientSettings {
    pub step: StepRule,
    pub max_iter: usize,
    /// Stop once the best dual bound and the repaired averaged primal are
    /// within this relative gap.
    pub tol: f64,
    /// Check the gap every this many iterations.
    pub check_every: usize,
    pub record_trace: bool,
}

impl Default for SubgradientSettings {
    fn default() -> Self {
        SubgradientSettings {
            step: StepRule::DiminishingSqrt(1.0),
            max_iter: 20_000,
            tol: 1e-4,
            check_every: 25,
            record_trace: true,
        }
    }
}

/// Vertex maximizer of the Lagrangian for prices `coef = c + μ`.
fn primal_step(n: &Normalized, coef: &[f64], a: &mut [f64], u: &mut [f64]) {
    let y = n.n_services;
    a.fill(0.0);
    u.fill(0.0);
    let mut best_u: Vec<(f64, usize)> = Vec::with_capacity(n.n_links);
    for k in 0..n.n_links {
        let block = &coef[k * y..(k + 1) * y];
        let arg = (0..y).fold(0, |b, l| if block[l] > block[b] { l } else { b });
        a[k * y + arg] = n.xi[k];
        best_u.push((block[arg], k * y + arg));
    }
    match n.aggregate {
        None => {
            for (k, &(_, i)) in best_u.iter().enumerate() {
                u[i] = n.budget[k];
            }
        }
        Some(agg) => {
            let mut order: Vec<usize> = (0..n.n_links).collect();
            order.sort_by(|&x, &z| best_u[z].0.total_cmp(&best_u[x].0).then(x.cmp(&z)));
            let mut left = agg;
            for k in order {
                let take = n.budget[k].min(left).max(0.0);
                u[best_u[k].1] = take;
                left -= take;
            }
        }
    }
}

/// Solve with projected dual subgradient steps.
pub fn solve_subgradient(
    p: &SlicingProblem,
    settings: &SubgradientSettings,
) -> Result<SolveOutcome, SolveError> {
    p.validate()?;
    let n = p.normalized();
    diagnose(p, &n)?;
    let start = Instant::now();
    let len = n.len();
    let mut mu = vec![0.0; len];
    let mut a = vec![0.0; len];
    let mut u = vec![0.0; len];
    let mut avg_a = vec![0.0; len];
    let mut avg_u = vec![0.0; len];
    let mut coef = vec![0.0; len];
    let mut best_dual = f64::INFINITY;
    let mut trace = ConvergenceTrace::new("subgradient");
    let mut status = SolveStatus::MaxIterations;
    let mut t = 0;
    while t < settings.max_iter {
        t += 1;
        for i in 0..len {
            coef[i] = n.c[i] + mu[i];
        }
        primal_step(&n, &coef, &mut a, &mut u);
        // Dual function value at μ: max over X of c·x + μ·(x − h).
        let dual: f64 = (0..len)
            .map(|i| coef[i] * (u[i] + n.beta * a[i]) - mu[i] * n.h[i])
            .sum::<f64>()
            * n.obj_scale;
        best_dual = best_dual.min(dual);
        let w = 1.0 / t as f64;
        for i in 0..len {
            avg_a[i] += (a[i] - avg_a[i]) * w;
            avg_u[i] += (u[i] - avg_u[i]) * w;
        }
        let step = settings.step.step(t);
        let mut dual_change = 0.0;
        for i in 0..len {
            let g = u[i] + n.beta * a[i] - n.h[i];
            let next = (mu[i] - step * g).max(0.0);
            dual_change += (next - mu[i]) * (next - mu[i]);
            mu[i] = next;
        }
        if settings.record_trace {
            let shortfall: f64 = (0..len)
                .map(|i| (n.h[i] - avg_u[i] - n.beta * avg_a[i]).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt();
            trace.records.push(TraceRecord {
                iteration: t,
                objective: n.objective(&avg_a, &avg_u),
                primal_residual: shortfall,
                dual_residual: dual_change.sqrt(),
                max_violation: n.throughput_violation(&avg_a, &avg_u),
            });
        }
        if settings.check_every > 0 && t % settings.check_every == 0 {
            let (ra, ru) = repair(&n, &avg_a, &avg_u, 10_000);
            if n.throughput_violation(&ra, &ru) <= 1e-9 {
                let primal = n.objective(&ra, &ru);
                if best_dual - primal <= settings.tol * best_dual.abs().max(f64::MIN_POSITIVE) {
                    status = SolveStatus::Converged;
                    break;
                }
            }
        }
    }
    let (ra, ru) = repair(&n, &avg_a, &avg_u, 100_000);
    Ok(SolveOutcome {
        solution: SlicingSolution::from_normalized(p, &n, &ra, &ru),
        trace,
        status,
        iterations: t,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
