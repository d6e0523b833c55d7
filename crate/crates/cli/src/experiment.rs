//! Experiment plans: sweeps over density, cell size or minimum QoS, one
//! row per (sweep value, seed, variant).

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use slicenet_core::admm::{
    solve_admm, solve_lp_oracle, solve_subgradient, AdmmSettings, SlicingProblem,
    SlicingSolution, SolveError, SubgradientSettings, Variant,
};
use slicenet_core::coexist::{AccessProbabilityTable, SimConfig};
use slicenet_core::{Scenario, ServiceId};

use crate::error::{Category, CliError};
use crate::pipeline::{cached_table, needed_table_size, problem_for, resolve};
use crate::report::write_report;
use crate::topology::{generate_topology, TopologyKind, TopologyParams};

/// Largest constraint violation a stored solution may show on reload.
pub const RELOAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Base stations per MNO.
    Density,
    CellSize,
    /// η of one service, bit/s.
    MinQos,
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::Density => "density",
            SweepAxis::CellSize => "cell_size",
            SweepAxis::MinQos => "min_qos",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub kind: TopologyKind,
    #[serde(default)]
    pub params: TopologyParams,
}

/// Simulation settings of an automatically built table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableSpec {
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for TableSpec {
    fn default() -> Self {
        TableSpec {
            duration_s: 10.0,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub gamma: f64,
    pub adaptive: bool,
    pub max_iter: usize,
    /// Run the subgradient baseline as well.
    pub subgradient: bool,
    /// Relative gap for the iterations-to-tolerance columns.
    pub gap_tol: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            gamma: 1.0,
            adaptive: false,
            max_iter: 200_000,
            subgradient: true,
            gap_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Base scenario file. Exactly one of `scenario` and `topology`.
    #[serde(default)]
    pub scenario: Option<PathBuf>,
    #[serde(default)]
    pub topology: Option<TopologySpec>,
    pub variants: Vec<Variant>,
    pub sweep: Sweep,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Access table file; built and cached under `output_dir/cache` when
    /// absent.
    #[serde(default)]
    pub table: Option<PathBuf>,
    #[serde(default)]
    pub table_sim: TableSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Service whose η the min-QoS sweep sets.
    #[serde(default = "default_service")]
    pub min_qos_service: ServiceId,
}

fn default_seeds() -> Vec<u64> {
    vec![1]
}

fn default_service() -> ServiceId {
    1
}

impl ExperimentPlan {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let plan: Self = toml::from_str(text).map_err(|e| CliError::new(Category::Parse, e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    /// Load a plan; relative paths in it are taken from the plan's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut plan = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        plan.scenario = plan.scenario.map(|p| resolve(base, &p));
        plan.table = plan.table.map(|p| resolve(base, &p));
        plan.output_dir = resolve(base, &plan.output_dir);
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |s: String| Err(CliError::new(Category::Invalid, s));
        if self.variants.is_empty() {
            return bad("plan needs at least one variant".into());
        }
        if self.scenario.is_some() == self.topology.is_some() {
            return bad("plan needs exactly one of `scenario` and `topology`".into());
        }
        if self.seeds.is_empty() {
            return bad("plan needs at least one seed".into());
        }
        if let Some(v) = self.sweep.values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return bad(format!("sweep value {v} must be positive"));
        }
        match self.sweep.axis {
            SweepAxis::Density | SweepAxis::CellSize if self.topology.is_none() => {
                return bad(format!("a {} sweep needs a `topology` section", self.sweep.axis));
            }
            SweepAxis::Density => {
                if let Some(v) = self.sweep.values.iter().find(|v| v.fract() != 0.0) {
                    return bad(format!("density value {v} must be a whole number of sites"));
                }
            }
            _ => {}
        }
        if !(self.solver.gamma > 0.0 && self.solver.gap_tol > 0.0) {
            return bad("solver gamma and gap_tol must be > 0".into());
        }
        if !(self.table_sim.duration_s > 0.0) {
            return bad("table_sim.duration_s must be > 0".into());
        }
        Ok(())
    }

    /// Scenario of one (sweep value, seed) cell.
    pub fn cell_scenario(&self, value: f64, seed: u64) -> Result<Scenario, CliError> {
        let scenario = match (&self.scenario, &self.topology) {
            (Some(path), _) => Scenario::load(path)?,
            (None, Some(t)) => {
                let mut params = t.params.clone();
                match self.sweep.axis {
                    SweepAxis::Density => params.sites_per_mno = value as u32,
                    SweepAxis::CellSize => params.cell_size_m = value,
                    SweepAxis::MinQos => {}
                }
                generate_topology(t.kind, &params, seed)?
            }
            (None, None) => unreachable!("validated plan"),
        };
        Ok(match self.sweep.axis {
            SweepAxis::MinQos => scenario.with_min_throughput(self.min_qos_service, value),
            _ => scenario,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Infeasible,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceTraffic {
    pub service: ServiceId,
    pub licensed_bps: f64,
    pub unlicensed_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    /// Artifact name of the cell.
    pub cell: String,
    pub sweep_value: f64,
    pub variant: Variant,
    pub seed: u64,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub message: String,
    pub links_total: usize,
    /// Links whose minimum throughputs the variant can meet.
    pub links_admitted: usize,
    /// Admitted traffic per service and band.
    pub traffic: Vec<ServiceTraffic>,
    /// Σ η over admitted (link, service) pairs.
    pub required_bps: f64,
    pub objective_lp: Option<f64>,
    pub objective_admm: Option<f64>,
    pub admm_iterations: Option<usize>,
    pub admm_iterations_to_gap: Option<usize>,
    pub subgradient_iterations_to_gap: Option<usize>,
}

impl ResultRow {
    pub fn total_traffic(&self) -> f64 {
        self.traffic.iter().map(|t| t.licensed_bps + t.unlicensed_bps).sum()
    }
}

/// Stored per cell so rows can be re-validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellArtifact {
    pub problem: SlicingProblem,
    pub solution: SlicingSolution,
}

#[derive(Debug, Clone, Default)]
pub struct CellOutput {
    pub artifact: Option<CellArtifact>,
    /// Two-column `iteration,objective` series per solver.
    pub traces: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub outputs: Vec<CellOutput>,
}

pub fn cell_name(axis: SweepAxis, value: f64, variant: Variant, seed: u64) -> String {
    format!("{axis}-{value}-{variant}-seed{seed}")
}

fn traffic_of(problem: &SlicingProblem, sol: &SlicingSolution) -> Vec<ServiceTraffic> {
    let rates: Vec<f64> = problem.links.iter().map(|l| l.rate_bps_per_hz).collect();
    sol.admitted_traffic(problem.unlicensed_bandwidth_hz, &rates)
        .into_iter()
        .zip(&problem.services)
        .map(|((licensed_bps, unlicensed_bps), &service)| ServiceTraffic {
            service,
            licensed_bps,
            unlicensed_bps,
        })
        .collect()
}

fn required_bps(problem: &SlicingProblem) -> f64 {
    problem
        .links
        .iter()
        .map(|l| {
            problem
                .mno(l.owner)
                .map_or(0.0, |m| m.min_throughput_bps.iter().sum::<f64>())
        })
        .sum()
}

/// Drop links whose thresholds cannot be met until the rest is feasible.
fn admit(mut p: SlicingProblem) -> Result<(SlicingProblem, SlicingSolution), SolveError> {
    loop {
        if p.links.is_empty() {
            return Err(SolveError::InvalidInput("no link admitted".into()));
        }
        match solve_lp_oracle(&p) {
            Ok(s) => return Ok((p, s)),
            Err(SolveError::Infeasible { link: Some(id), .. }) => {
                log::debug!("rejecting link {id}");
                p.links.retain(|l| l.id != id);
            }
            Err(e) => return Err(e),
        }
    }
}

fn run_cell(
    plan: &ExperimentPlan,
    base: &SlicingProblem,
    value: f64,
    seed: u64,
    variant: Variant,
) -> (ResultRow, CellOutput) {
    let mut row = ResultRow {
        cell: cell_name(plan.sweep.axis, value, variant, seed),
        sweep_value: value,
        variant,
        seed,
        status: CellStatus::Ok,
        message: String::new(),
        links_total: base.links.len(),
        links_admitted: 0,
        traffic: base
            .services
            .iter()
            .map(|&service| ServiceTraffic {
                service,
                licensed_bps: 0.0,
                unlicensed_bps: 0.0,
            })
            .collect(),
        required_bps: 0.0,
        objective_lp: None,
        objective_admm: None,
        admm_iterations: None,
        admm_iterations_to_gap: None,
        subgradient_iterations_to_gap: None,
    };
    let mut out = CellOutput::default();
    let (p, lp) = match admit(base.with_variant(variant)) {
        Ok(x) => x,
        Err(SolveError::InvalidInput(_)) => {
            // Nothing admitted: a valid, empty allocation.
            row.objective_lp = Some(0.0);
            row.objective_admm = Some(0.0);
            return (row, out);
        }
        Err(e @ SolveError::Infeasible { .. }) => {
            row.status = CellStatus::Infeasible;
            row.message = e.to_string();
            return (row, out);
        }
        Err(e) => {
            row.status = CellStatus::Error;
            row.message = e.to_string();
            return (row, out);
        }
    };
    row.links_admitted = p.links.len();
    row.required_bps = required_bps(&p);
    row.objective_lp = Some(lp.objective);
    let admm_settings = AdmmSettings {
        gamma: plan.solver.gamma,
        adaptive: plan.solver.adaptive,
        max_iter: plan.solver.max_iter,
        ..AdmmSettings::default()
    };
    let admm = match solve_admm(&p, &admm_settings) {
        Ok(a) => a,
        Err(e) => {
            row.status = CellStatus::Error;
            row.message = e.to_string();
            return (row, out);
        }
    };
    row.objective_admm = Some(admm.solution.objective);
    row.admm_iterations = Some(admm.iterations);
    row.admm_iterations_to_gap = admm.trace.iterations_to_gap(lp.objective, plan.solver.gap_tol);
    row.traffic = traffic_of(&p, &admm.solution);
    out.traces.push(("admm".into(), admm.trace.objective_series_csv()));
    if plan.solver.subgradient {
        match solve_subgradient(&p, &SubgradientSettings::default()) {
            Ok(s) => {
                row.subgradient_iterations_to_gap = s.trace.iterations_to_gap(lp.objective, plan.solver.gap_tol);
                out.traces.push(("subgradient".into(), s.trace.objective_series_csv()));
            }
            Err(e) => log::warn!("{}: subgradient failed: {e}", row.cell),
        }
    }
    out.artifact = Some(CellArtifact {
        problem: p,
        solution: admm.solution,
    });
    (row, out)
}

/// The table for `plan`: its file, or an automatically built one covering
/// the largest contention component of any cell (at most 6 vertices).
fn plan_table(plan: &ExperimentPlan, scenarios: &[Scenario]) -> Result<AccessProbabilityTable, CliError> {
    if let Some(path) = &plan.table {
        return Ok(AccessProbabilityTable::load(path)?);
    }
    let size = scenarios.iter().map(needed_table_size).max().unwrap_or(1);
    let cfg = SimConfig {
        duration_s: plan.table_sim.duration_s,
        seed: plan.table_sim.seed,
        ..SimConfig::default()
    };
    cached_table(&plan.output_dir.join("cache"), size, &cfg)
}

/// Run every cell of `plan`. Cells that fail are recorded in their rows.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult, CliError> {
    plan.validate()?;
    let mut points = Vec::new();
    for &value in &plan.sweep.values {
        for &seed in &plan.seeds {
            points.push((value, seed, plan.cell_scenario(value, seed)));
        }
    }
    if points.is_empty() {
        return Ok(ExperimentResult {
            rows: Vec::new(),
            outputs: Vec::new(),
        });
    }
    let built: Vec<Scenario> = points.iter().filter_map(|(_, _, s)| s.as_ref().ok().cloned()).collect();
    let table = plan_table(plan, &built)?;

    let jobs: Vec<(f64, u64, Variant, Result<SlicingProblem, CliError>)> = points
        .into_iter()
        .flat_map(|(value, seed, scenario)| {
            let base = scenario.and_then(|s| problem_for(&s, &table, Variant::S3));
            plan.variants
                .iter()
                .map(move |&v| (value, seed, v, base.clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    let results: Vec<(ResultRow, CellOutput)> = jobs
        .par_iter()
        .map(|(value, seed, variant, base)| match base {
            Ok(p) => run_cell(plan, p, *value, *seed, *variant),
            Err(e) => (
                ResultRow {
                    cell: cell_name(plan.sweep.axis, *value, *variant, *seed),
                    sweep_value: *value,
                    variant: *variant,
                    seed: *seed,
                    status: CellStatus::Error,
                    message: e.to_string(),
                    links_total: 0,
                    links_admitted: 0,
                    traffic: Vec::new(),
                    required_bps: 0.0,
                    objective_lp: None,
                    objective_admm: None,
                    admm_iterations: None,
                    admm_iterations_to_gap: None,
                    subgradient_iterations_to_gap: None,
                },
                CellOutput::default(),
            ),
        })
        .collect();
    let (rows, outputs) = results.into_iter().unzip();
    Ok(ExperimentResult { rows, outputs })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Write rows, cell artifacts, traces and report series under `dir`.
pub fn write_experiment(plan: &ExperimentPlan, result: &ExperimentResult, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let json = serde_json::to_string_pretty(&result.rows).expect("rows serialize");
    write(&dir.join("results.json"), &json)?;
    for (row, out) in result.rows.iter().zip(&result.outputs) {
        if let Some(a) = &out.artifact {
            let text = serde_json::to_string_pretty(a).expect("artifact serializes");
            write(&dir.join("cells").join(format!("{}.json", row.cell)), &text)?;
        }
        for (solver, series) in &out.traces {
            write(&dir.join("traces").join(format!("{}-{solver}.csv", row.cell)), series)?;
        }
    }
    write_report(&plan.variants, plan.sweep.axis, &result.rows, dir)
}

/// Read `results.json` from `dir` and re-validate every stored solution.
pub fn load_results(dir: &Path) -> Result<Vec<ResultRow>, CliError> {
    let path = dir.join("results.json");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let rows: Vec<ResultRow> =
        serde_json::from_str(&text).map_err(|e| CliError::new(Category::Parse, e.to_string()))?;
    for row in rows.iter().filter(|r| r.status == CellStatus::Ok && r.links_admitted > 0) {
        let path = dir.join("cells").join(format!("{}.json", row.cell));
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let a: CellArtifact =
            serde_json::from_str(&text).map_err(|e| CliError::new(Category::Parse, e.to_string()))?;
        let bad = |s: String| Err(CliError::new(Category::Invalid, format!("{}: {s}", row.cell)));
        a.problem.validate()?;
        let v = a.solution.max_violation(&a.problem);
        if v > RELOAD_TOL {
            return bad(format!("stored solution violates constraints by {v:.3e}"));
        }
        let recomputed = traffic_of(&a.problem, &a.solution);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
        let same = recomputed.len() == row.traffic.len()
            && recomputed.iter().zip(&row.traffic).all(|(x, y)| {
                x.service == y.service
                    && close(x.licensed_bps, y.licensed_bps)
                    && close(x.unlicensed_bps, y.unlicensed_bps)
            });
        if !same {
            return bad("row traffic does not match the stored solution".into());
        }
        if row.total_traffic() < row.required_bps * (1.0 - RELOAD_TOL) {
            return bad(format!(
                "admitted traffic {} below the required {}",
                row.total_traffic(),
                row.required_bps
            ));
        }
    }
    Ok(rows)
}
