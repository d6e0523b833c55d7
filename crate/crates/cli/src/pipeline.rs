//! Shared steps: tables, access estimates, problems and solvers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slicenet_core::admm::{
    build_problem, solve_admm, solve_lp_oracle, solve_subgradient, AdmmSettings, ConvergenceTrace,
    SlicingProblem, SolveError, SolveOutcome, SolveStatus, SubgradientSettings, Variant,
};
use slicenet_core::coexist::{measure_table, AccessProbabilityTable, SimConfig, TABLE_FORMAT};
use slicenet_core::mboe::canon::enumerate_connected;
use slicenet_core::mboe::{link_access, ContentionGraph, EstimateOptions};
use slicenet_core::scenario::LinkId;
use slicenet_core::{MnoId, Scenario};

use crate::error::CliError;

/// Largest subgraph an automatically generated table covers.
pub const AUTO_TABLE_MAX_SIZE: usize = 6;

/// Every connected labeled graph up to `max_size` vertices, simulated.
pub fn build_table(max_size: usize, cfg: &SimConfig) -> Result<AccessProbabilityTable, CliError> {
    let family = enumerate_connected(max_size);
    log::info!("simulating {} graphs of up to {max_size} vertices", family.len());
    let mut t = measure_table(&family, cfg)?;
    t.max_size = max_size;
    Ok(t)
}

/// Size of the largest contention component, capped for table building.
pub fn needed_table_size(scenario: &Scenario) -> usize {
    let g = ContentionGraph::from_scenario(scenario);
    g.components()
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(1)
        .clamp(1, AUTO_TABLE_MAX_SIZE)
}

/// Content hash identifying a table built from `(max_size, cfg)`.
pub fn table_hash(max_size: usize, cfg: &SimConfig) -> String {
    let mut h = Sha256::new();
    h.update(TABLE_FORMAT.as_bytes());
    h.update(max_size.to_le_bytes());
    h.update(serde_json::to_vec(cfg).expect("config serializes"));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Load the cached table for `(max_size, cfg)` from `cache_dir`, building
/// and storing it on a miss.
pub fn cached_table(
    cache_dir: &Path,
    max_size: usize,
    cfg: &SimConfig,
) -> Result<AccessProbabilityTable, CliError> {
    let path = cache_dir.join(format!("table-{}.json", &table_hash(max_size, cfg)[..16]));
    if path.exists() {
        log::info!("using cached table {}", path.display());
        return Ok(AccessProbabilityTable::load(&path)?);
    }
    let t = build_table(max_size, cfg)?;
    std::fs::create_dir_all(cache_dir).map_err(|e| CliError::io(cache_dir, e))?;
    t.save(&path)?;
    Ok(t)
}

/// ξ̂ per link.
pub fn estimate_links(
    scenario: &Scenario,
    table: &AccessProbabilityTable,
    removed: &BTreeSet<MnoId>,
) -> Result<BTreeMap<LinkId, f64>, CliError> {
    let graph = ContentionGraph::from_scenario(scenario);
    Ok(link_access(scenario, &graph, table, removed, &EstimateOptions::default())?)
}

pub fn problem_for(
    scenario: &Scenario,
    table: &AccessProbabilityTable,
    variant: Variant,
) -> Result<SlicingProblem, CliError> {
    let xi = estimate_links(scenario, table, &BTreeSet::new())?;
    Ok(build_problem(scenario, &xi, variant)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Admm,
    Lp,
    Subgrad,
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "admm" => Ok(SolverKind::Admm),
            "lp" => Ok(SolverKind::Lp),
            "subgrad" | "subgradient" => Ok(SolverKind::Subgrad),
            other => Err(format!("unknown solver {other:?} (admm, lp, subgrad)")),
        }
    }
}

/// Solve with `kind`. The LP oracle reports a single-iteration outcome
/// with an empty trace.
pub fn solve(
    problem: &SlicingProblem,
    kind: SolverKind,
    admm: &AdmmSettings,
    subgrad: &SubgradientSettings,
) -> Result<SolveOutcome, SolveError> {
    match kind {
        SolverKind::Admm => solve_admm(problem, admm),
        SolverKind::Subgrad => solve_subgradient(problem, subgrad),
        SolverKind::Lp => {
            let start = std::time::Instant::now();
            let solution = solve_lp_oracle(problem)?;
            Ok(SolveOutcome {
                solution,
                trace: ConvergenceTrace::default(),
                status: SolveStatus::Converged,
                iterations: 1,
                elapsed_s: start.elapsed().as_secs_f64(),
            })
        }
    }
}

/// `path` relative to `base` unless absolute.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
