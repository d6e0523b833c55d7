//! Distributed ADMM with partial variable splitting.
//!
//! The primal blocks are the per-link α vectors (updated by
//! [`LinkAgent`]s) and the licensed block u (updated by the
//! [`Coordinator`]); Z is a copy of both constrained to the throughput
//! halfspaces and Λ the scaled duals. Maximization of the welfare is
//! written as minimization of its negation, so each subproblem moves the
//! shifted point `Z − Λ` along `+gradient / γ` before projecting.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::agent::LinkAgent;
use super::coordinator::{dual_update, Coordinator};
use super::lp::diagnose;
use super::problem::SlicingProblem;
use super::repair::repair;
use super::solution::SlicingSolution;
use super::trace::{ConvergenceTrace, TraceRecord};
use super::SolveError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmSettings {
    /// Penalty γ of the augmented Lagrangian (normalized units).
    pub gamma: f64,
    /// Residual balancing: double γ when the primal residual exceeds ten
    /// times the dual residual, halve it in the opposite case.
    pub adaptive: bool,
    /// Absolute residual tolerance; `None` uses `1e-6 · sqrt(dimension)`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub record_trace: bool,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            gamma: 1.0,
            adaptive: false,
            tol: None,
            max_iter: 200_000,
            record_trace: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// The iteration limit was reached; the returned point is the repaired
    /// last iterate.
    MaxIterations,
}

/// ADMM iterate: primal blocks X = (α, u), copy Z, scaled duals Λ.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x_alpha: Vec<f64>,
    pub x_u: Vec<f64>,
    pub z_alpha: Vec<f64>,
    pub z_u: Vec<f64>,
    pub lambda_alpha: Vec<f64>,
    pub lambda_u: Vec<f64>,
    pub gamma: f64,
    pub iteration: usize,
    /// (primal, dual) residual per iteration.
    pub residuals: Vec<(f64, f64)>,
}

impl AdmmState {
    pub fn zeros(len: usize, gamma: f64) -> Self {
        AdmmState {
            x_alpha: vec![0.0; len],
            x_u: vec![0.0; len],
            z_alpha: vec![0.0; len],
            z_u: vec![0.0; len],
            lambda_alpha: vec![0.0; len],
            lambda_u: vec![0.0; len],
            gamma,
            iteration: 0,
            residuals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub solution: SlicingSolution,
    pub trace: ConvergenceTrace,
    pub status: SolveStatus,
    pub iterations: usize,
    pub elapsed_s: f64,
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

/// Solve the slicing problem with the distributed ADMM iteration.
pub fn solve_admm(p: &SlicingProblem, settings: &AdmmSettings) -> Result<SolveOutcome, SolveError> {
    if !(settings.gamma > 0.0 && settings.gamma.is_finite()) {
        return Err(SolveError::InvalidInput(format!(
            "penalty must be > 0, got {}",
            settings.gamma
        )));
    }
    p.validate()?;
    let n = p.normalized();
    diagnose(p, &n)?;
    let start = Instant::now();
    let y = n.n_services;
    let len = n.len();
    let tol = settings.tol.unwrap_or(1e-6 * ((2 * len).max(1) as f64).sqrt());

    let agents: Vec<LinkAgent> = (0..n.n_links)
        .map(|k| {
            LinkAgent::new(
                n.c[k * y..(k + 1) * y].iter().map(|c| n.beta * c).collect(),
                n.xi[k],
            )
        })
        .collect();
    let coordinator = Coordinator::new(
        n.c.clone(),
        n.budget.clone(),
        n.aggregate,
        n.h.clone(),
        n.beta,
        y,
    );

    let mut st = AdmmState::zeros(len, settings.gamma);
    let mut trace = ConvergenceTrace::new("admm");
    let mut status = SolveStatus::MaxIterations;
    while st.iteration < settings.max_iter {
        st.iteration += 1;
        let mut xa = Vec::with_capacity(len);
        for (k, agent) in agents.iter().enumerate() {
            let r = k * y..(k + 1) * y;
            xa.extend(agent.update(&st.z_alpha[r.clone()], &st.lambda_alpha[r], st.gamma)?);
        }
        let xu = coordinator.w_update(&st.z_u, &st.lambda_u, st.gamma)?;
        let (za, zu) = coordinator.z_update(&xa, &xu, &st.lambda_alpha, &st.lambda_u);
        st.lambda_alpha = dual_update(&st.lambda_alpha, &xa, &za);
        st.lambda_u = dual_update(&st.lambda_u, &xu, &zu);
        let primal = (norm_diff(&xa, &za) + norm_diff(&xu, &zu)).sqrt();
        let dual = st.gamma * (norm_diff(&za, &st.z_alpha) + norm_diff(&zu, &st.z_u)).sqrt();
        st.x_alpha = xa;
        st.x_u = xu;
        st.z_alpha = za;
        st.z_u = zu;
        st.residuals.push((primal, dual));
        if settings.record_trace {
            trace.records.push(TraceRecord {
                iteration: st.iteration,
                objective: n.objective(&st.x_alpha, &st.x_u),
                primal_residual: primal,
                dual_residual: dual,
                max_violation: n.throughput_violation(&st.x_alpha, &st.x_u),
            });
        }
        if primal <= tol && dual <= tol {
            status = SolveStatus::Converged;
            break;
        }
        if settings.adaptive && st.iteration % 10 == 0 {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                st.gamma *= factor;
                for v in st.lambda_alpha.iter_mut().chain(st.lambda_u.iter_mut()) {
                    *v /= factor;
                }
            }
        }
    }
    let (a, u) = repair(&n, &st.z_alpha, &st.z_u, 100_000);
    Ok(SolveOutcome {
        solution: SlicingSolution::from_normalized(p, &n, &a, &u),
        trace,
        status,
        iterations: st.iteration,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
