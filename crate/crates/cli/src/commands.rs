//! Subcommand bodies. Each returns the structured text it prints.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Serialize;
use slicenet_core::admm::{AdmmSettings, SolveStatus, SubgradientSettings, TraceRecord, Variant};
use slicenet_core::coexist::{run_coexistence, AccessProbabilityTable, BackoffPolicy, SimConfig};
use slicenet_core::game::{check_core, default_division, CoreReport, DivisionRule, SlicingAgreement};
use slicenet_core::mboe::{estimate_for_mno, value_of_rights, ContentionGraph, EstimateOptions, VertexEstimate, VorReport};
use slicenet_core::scenario::LinkId;
use slicenet_core::{MnoId, NodeId, Scenario};

use crate::error::{Category, CliError};
use crate::experiment::{run_experiment, write_experiment, ExperimentPlan};
use crate::pipeline::{build_table, estimate_links, problem_for, solve, SolverKind};
use crate::topology::{generate_topology, TopologyKind, TopologyParams};

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

pub fn sim(scenario: &Path, duration_s: f64, seed: u64, backoff: BackoffPolicy) -> Result<String, CliError> {
    let s = Scenario::load(scenario)?;
    let cfg = SimConfig {
        duration_s,
        seed,
        backoff,
        ..SimConfig::default()
    };
    cfg.validate()?;
    Ok(json(&run_coexistence(&s, &cfg)?))
}

pub fn table(max_size: usize, duration_s: f64, seed: u64, out: &Path) -> Result<String, CliError> {
    if max_size == 0 || max_size > slicenet_core::mboe::canon::MAX_CANON_VERTICES {
        return Err(CliError::new(
            Category::Invalid,
            format!("max size {max_size} outside 1..={}", slicenet_core::mboe::canon::MAX_CANON_VERTICES),
        ));
    }
    let cfg = SimConfig {
        duration_s,
        seed,
        ..SimConfig::default()
    };
    cfg.validate()?;
    let t = build_table(max_size, &cfg)?;
    t.save(out)?;
    Ok(format!("{} entries written to {}\n", t.entries.len(), out.display()))
}

#[derive(Serialize)]
struct MboeOutput {
    removed: Vec<MnoId>,
    /// ξ̂ per link.
    links: BTreeMap<LinkId, f64>,
    /// Per-MNO vertex estimates with their provenance.
    vertices: BTreeMap<MnoId, BTreeMap<NodeId, VertexEstimate>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    value_of_rights: Vec<VorReport>,
}

pub fn mboe(scenario: &Path, table: &Path, removed: &BTreeSet<MnoId>) -> Result<String, CliError> {
    let s = Scenario::load(scenario)?;
    let t = AccessProbabilityTable::load(table)?;
    if let Some(m) = removed.iter().find(|m| s.mno(**m).is_none()) {
        return Err(CliError::new(Category::Invalid, format!("unknown MNO {m} in --remove")));
    }
    let graph = ContentionGraph::from_scenario(&s);
    let opts = EstimateOptions::default();
    let mut vertices = BTreeMap::new();
    let mut vor = Vec::new();
    for m in &s.mnos {
        if removed.contains(&m.id) || s.links_of(m.id).next().is_none() {
            continue;
        }
        vertices.insert(m.id, estimate_for_mno(&graph, m.id, removed, &t, &opts)?);
        if !removed.is_empty() {
            vor.push(value_of_rights(&s, &t, m.id, removed, &opts)?);
        }
    }
    Ok(json(&MboeOutput {
        removed: removed.iter().copied().collect(),
        links: estimate_links(&s, &t, removed)?,
        vertices,
        value_of_rights: vor,
    }))
}

#[derive(Serialize)]
struct SolveOutput {
    variant: Variant,
    solver: SolverKind,
    status: SolveStatus,
    iterations: usize,
    objective: f64,
    solution: slicenet_core::admm::SlicingSolution,
    trace: Vec<TraceRecord>,
}

pub struct SolveArgs<'a> {
    pub scenario: &'a Path,
    pub table: &'a Path,
    pub variant: Variant,
    pub solver: SolverKind,
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    /// Two-column convergence series written here when set.
    pub trace: Option<&'a Path>,
}

pub fn solve_cmd(a: &SolveArgs) -> Result<String, CliError> {
    let s = Scenario::load(a.scenario)?;
    let t = AccessProbabilityTable::load(a.table)?;
    let p = problem_for(&s, &t, a.variant)?;
    let mut admm = AdmmSettings::default();
    if let Some(g) = a.gamma {
        admm.gamma = g;
    }
    admm.tol = a.tol;
    let mut sub = SubgradientSettings::default();
    if let Some(tol) = a.tol {
        sub.tol = tol;
    }
    let out = solve(&p, a.solver, &admm, &sub)?;
    log::info!("{:?} finished in {:.3} s", a.solver, out.elapsed_s);
    if let Some(path) = a.trace {
        std::fs::write(path, out.trace.objective_series_csv()).map_err(|e| CliError::io(path, e))?;
    }
    Ok(json(&SolveOutput {
        variant: a.variant,
        solver: a.solver,
        status: out.status,
        iterations: out.iterations,
        objective: out.solution.objective,
        solution: out.solution,
        trace: out.trace.records,
    }))
}

#[derive(Serialize)]
struct GameOutput {
    division: DivisionRule,
    agreement: SlicingAgreement,
    report: CoreReport,
}

pub fn game(scenario: &Path, table: &Path, division: DivisionRule) -> Result<String, CliError> {
    let s = Scenario::load(scenario)?;
    let t = AccessProbabilityTable::load(table)?;
    let p = problem_for(&s, &t, Variant::S3)?;
    let sol = slicenet_core::admm::solve_lp_oracle(&p)?;
    let agreement = default_division(&p, &sol, division)?;
    let report = check_core(&agreement, &p)?;
    Ok(json(&GameOutput {
        division,
        agreement,
        report,
    }))
}

/// Run a plan, writing into `out` or the plan's output directory.
pub fn experiment(plan: &Path, out: Option<&Path>) -> Result<String, CliError> {
    let mut plan = ExperimentPlan::load(plan)?;
    if let Some(o) = out {
        plan.output_dir = o.to_path_buf();
    }
    let result = run_experiment(&plan)?;
    write_experiment(&plan, &result, &plan.output_dir)?;
    let failed = result.rows.iter().filter(|r| r.status != crate::experiment::CellStatus::Ok).count();
    Ok(format!(
        "{} rows ({failed} failed) written to {}\n",
        result.rows.len(),
        plan.output_dir.display()
    ))
}

pub fn gen(kind: TopologyKind, params: &TopologyParams, seed: u64) -> Result<String, CliError> {
    Ok(generate_topology(kind, params, seed)?.to_toml_string())
}
