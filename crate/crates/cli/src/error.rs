//! Error categories and exit codes.

use std::fmt;

use serde::Serialize;
use slicenet_core::admm::{ProblemError, SolveError};
use slicenet_core::coexist::{SimError, TableError};
use slicenet_core::game::GameError;
use slicenet_core::mboe::MboeError;
use slicenet_core::scenario::ScenarioError;

use crate::topology::TopologyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Usage,
    Io,
    Parse,
    Invalid,
    Infeasible,
    Numerical,
    Table,
    Internal,
}

impl Category {
    pub fn exit_code(self) -> i32 {
        match self {
            Category::Internal => 1,
            Category::Usage => 2,
            Category::Io => 3,
            Category::Parse => 4,
            Category::Invalid => 5,
            Category::Infeasible => 6,
            Category::Numerical => 7,
            Category::Table => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::new(Category::Io, format!("{}: {e}", path.display()))
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.category, self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        let c = match &e {
            ScenarioError::Io { .. } => Category::Io,
            ScenarioError::Parse(_) => Category::Parse,
            ScenarioError::Validation { .. } => Category::Invalid,
        };
        CliError::new(c, e.to_string())
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        let c = match &e {
            TableError::Io { .. } => Category::Io,
            _ => Category::Table,
        };
        CliError::new(c, e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::new(Category::Invalid, e.to_string())
    }
}

impl From<MboeError> for CliError {
    fn from(e: MboeError) -> Self {
        let c = match &e {
            MboeError::TableMiss { .. } => Category::Table,
            _ => Category::Invalid,
        };
        CliError::new(c, e.to_string())
    }
}

impl From<ProblemError> for CliError {
    fn from(e: ProblemError) -> Self {
        CliError::new(Category::Invalid, e.to_string())
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        let c = match &e {
            SolveError::Infeasible { .. } => Category::Infeasible,
            SolveError::Numerical(_) => Category::Numerical,
            SolveError::InvalidInput(_) | SolveError::Problem(_) => Category::Invalid,
        };
        CliError::new(c, e.to_string())
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Solve(s) => s.into(),
            other => CliError::new(Category::Invalid, other.to_string()),
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        CliError::new(Category::Invalid, e.to_string())
    }
}
