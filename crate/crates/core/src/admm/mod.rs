//! Joint licensed/unlicensed slicing: problem model, distributed ADMM
//! solver, exact LP oracle and a dual-subgradient baseline.

pub mod agent;
pub mod coordinator;
mod lp;
pub mod problem;
pub mod projection;
pub mod repair;
mod solution;
mod solver;
mod subgradient;
pub mod synth;
mod trace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agent::{alpha_subproblem, LinkAgent};
pub use coordinator::{dual_update, w_subproblem, z_projection, Coordinator};
pub use lp::{diagnose, solve_lp_oracle};
pub use problem::{
    build_problem, BudgetMode, LinkSpec, MnoTerms, Normalized, ProblemError, SlicingProblem,
    Variant,
};
pub use solution::{LinkAllocation, SliceSummary, SlicingSolution};
pub use solver::{solve_admm, AdmmSettings, AdmmState, SolveOutcome, SolveStatus};
pub use subgradient::{solve_subgradient, StepRule, SubgradientSettings};
pub use synth::{random_problem, RandomProblemSpec};
pub use trace::{ConvergenceTrace, TraceRecord};

use crate::scenario::LinkId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintFamily {
    /// A link cannot reach its minimum throughput within its budgets.
    Throughput,
    /// The links together need more licensed bandwidth than exists.
    AggregateBudget,
    /// Reported by the simplex solver without a closed-form diagnosis.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("infeasible ({family:?}): {detail}")]
    Infeasible {
        family: ConstraintFamily,
        link: Option<LinkId>,
        detail: String,
    },
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
