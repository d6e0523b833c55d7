use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::graph::ContentionGraph;
use super::mis::{clique_number, prune_to_mis, DEFAULT_MIS_BOUND};
use super::MboeError;
use crate::coexist::AccessProbabilityTable;
use crate::scenario::{LinkId, MnoId, NodeId, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneMode {
    /// Look a component up as is when the table covers its size; prune
    /// only larger components.
    Oversized,
    /// Always prune to the union of maximum independent sets first.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub prune: PruneMode,
    /// Largest component handed to exact independent-set enumeration.
    pub mis_bound: usize,
    /// On a table miss or an oversized component, use `1/ω` of the
    /// component instead of failing.
    pub fallback: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            prune: PruneMode::Oversized,
            mis_bound: DEFAULT_MIS_BOUND,
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    /// Read from the entry of the vertex's pruned component.
    Table { key: String },
    /// The vertex is in no maximum independent set; read from the entry of
    /// the vertex joined with the pruned components it senses.
    Pruned { key: String },
    /// Clique-number reciprocal of the vertex's component.
    Fallback { reason: String, clique_number: usize },
}

impl Provenance {
    pub fn is_flagged(&self) -> bool {
        !matches!(self, Provenance::Table { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexEstimate {
    pub node: NodeId,
    pub xi: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccessEstimate {
    pub vertices: BTreeMap<NodeId, VertexEstimate>,
}

impl AccessEstimate {
    pub fn xi(&self, node: NodeId) -> Option<f64> {
        self.vertices.get(&node).map(|v| v.xi)
    }
}

fn lookup(
    g: &ContentionGraph,
    table: &AccessProbabilityTable,
    opts: &EstimateOptions,
) -> Result<Result<(String, Vec<f64>), String>, MboeError> {
    let missing = |key: String| -> Result<Result<(String, Vec<f64>), String>, MboeError> {
        if opts.fallback {
            Ok(Err(key))
        } else {
            Err(MboeError::TableMiss { key })
        }
    };
    if g.len() > table.max_size || g.len() > super::canon::MAX_CANON_VERTICES {
        return missing(format!("<component of {} vertices>", g.len()));
    }
    let lg = g.to_labeled();
    match table.lookup(&lg) {
        Ok(v) => Ok(Ok((super::canon::canonical_key(&lg), v))),
        Err(key) => missing(key),
    }
}

fn fallback(g: &ContentionGraph, reason: String) -> (f64, Provenance) {
    let w = clique_number(g).max(1);
    (
        1.0 / w as f64,
        Provenance::Fallback {
            reason,
            clique_number: w,
        },
    )
}

/// Estimate ξ for every vertex of `graph`.
pub fn estimate_access(
    graph: &ContentionGraph,
    table: &AccessProbabilityTable,
    opts: &EstimateOptions,
) -> Result<AccessEstimate, MboeError> {
    let mut out = BTreeMap::new();
    for comp in graph.components() {
        let cg = graph.induced(&comp);
        if cg.len() > opts.mis_bound {
            if !opts.fallback {
                return Err(MboeError::SizeBound {
                    vertices: cg.len(),
                    bound: opts.mis_bound,
                });
            }
            let (xi, prov) = fallback(&cg, format!("component of {} vertices", cg.len()));
            for v in cg.vertices() {
                out.insert(
                    v.id,
                    VertexEstimate {
                        node: v.id,
                        xi,
                        provenance: prov.clone(),
                    },
                );
            }
            continue;
        }
        if opts.prune == PruneMode::Oversized && cg.len() <= table.max_size {
            let lg = cg.to_labeled();
            if let Ok(values) = table.lookup(&lg) {
                let key = super::canon::canonical_key(&lg);
                for (v, xi) in cg.vertices().iter().zip(values) {
                    out.insert(
                        v.id,
                        VertexEstimate {
                            node: v.id,
                            xi,
                            provenance: Provenance::Table { key: key.clone() },
                        },
                    );
                }
                continue;
            }
        }
        let pruned = prune_to_mis(&cg, opts.mis_bound)?;
        let pruned_comps = pruned.components();
        // Component index (into pruned_comps) of every kept vertex id.
        let mut comp_of: BTreeMap<NodeId, usize> = BTreeMap::new();
        for (ci, pc) in pruned_comps.iter().enumerate() {
            let sub = pruned.induced(pc);
            for v in sub.vertices() {
                comp_of.insert(v.id, ci);
            }
            match lookup(&sub, table, opts)? {
                Ok((key, values)) => {
                    for (v, xi) in sub.vertices().iter().zip(values) {
                        out.insert(
                            v.id,
                            VertexEstimate {
                                node: v.id,
                                xi,
                                provenance: Provenance::Table { key: key.clone() },
                            },
                        );
                    }
                }
                Err(key) => {
                    let (xi, prov) = fallback(&sub, format!("table miss {key}"));
                    for v in sub.vertices() {
                        out.insert(
                            v.id,
                            VertexEstimate {
                                node: v.id,
                                xi,
                                provenance: prov.clone(),
                            },
                        );
                    }
                }
            }
        }
        for i in 0..cg.len() {
            let id = cg.vertex(i).id;
            if comp_of.contains_key(&id) {
                continue;
            }
            let sensed: BTreeSet<usize> = cg
                .neighbours(i)
                .iter()
                .filter_map(|&j| comp_of.get(&cg.vertex(j).id).copied())
                .collect();
            let mut keep = vec![i];
            for ci in sensed {
                for &pj in &pruned_comps[ci] {
                    let pid = pruned.vertex(pj).id;
                    keep.push(cg.index_of(pid).expect("pruned vertex in component"));
                }
            }
            let aug = cg.induced(&keep);
            let pos = aug.index_of(id).expect("vertex kept");
            let (xi, provenance) = match lookup(&aug, table, opts)? {
                Ok((key, values)) => (values[pos], Provenance::Pruned { key }),
                Err(key) => fallback(&aug, format!("table miss {key}")),
            };
            out.insert(
                id,
                VertexEstimate {
                    node: id,
                    xi,
                    provenance,
                },
            );
        }
    }
    Ok(AccessEstimate { vertices: out })
}

/// Estimates for the vertices owned by `mno`, with the MNOs in `removed`
/// withdrawn from the unlicensed band.
///
/// The counterfactual is floored at the no-removal estimate, so removing
/// contenders never lowers an estimate.
pub fn estimate_for_mno(
    graph: &ContentionGraph,
    mno: MnoId,
    removed: &BTreeSet<MnoId>,
    table: &AccessProbabilityTable,
    opts: &EstimateOptions,
) -> Result<BTreeMap<NodeId, VertexEstimate>, MboeError> {
    if removed.contains(&mno) {
        return Err(MboeError::RemovedSelf(mno));
    }
    let own = |est: AccessEstimate| -> BTreeMap<NodeId, VertexEstimate> {
        est.vertices
            .into_iter()
            .filter(|(id, _)| {
                graph
                    .index_of(*id)
                    .is_some_and(|i| graph.vertex(i).owner == Some(mno))
            })
            .collect()
    };
    let base = own(estimate_access(&graph.subgraph_for_mno(mno)?, table, opts)?);
    if removed.is_empty() {
        return Ok(base);
    }
    let reduced = graph.remove_mno(removed);
    let mut cf = own(estimate_access(&reduced.subgraph_for_mno(mno)?, table, opts)?);
    for (id, e) in cf.iter_mut() {
        if let Some(b) = base.get(id) {
            e.xi = e.xi.max(b.xi);
        }
    }
    Ok(cf)
}

/// ξ per link: the serving node's estimate split equally among the links it
/// serves. Links of removed MNOs get 0.
pub fn link_access(
    scenario: &Scenario,
    graph: &ContentionGraph,
    table: &AccessProbabilityTable,
    removed: &BTreeSet<MnoId>,
    opts: &EstimateOptions,
) -> Result<BTreeMap<LinkId, f64>, MboeError> {
    let mut out = BTreeMap::new();
    for m in &scenario.mnos {
        if removed.contains(&m.id) {
            for l in scenario.links_of(m.id) {
                out.insert(l.id, 0.0);
            }
            continue;
        }
        if scenario.links_of(m.id).next().is_none() {
            continue;
        }
        let est = estimate_for_mno(graph, m.id, removed, table, opts)?;
        for l in scenario.links_of(m.id) {
            let xi = est.get(&l.node).map_or(0.0, |e| e.xi);
            out.insert(l.id, xi / scenario.links_at_node(l.node) as f64);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VorReport {
    pub mno: MnoId,
    pub removed: Vec<MnoId>,
    /// Unlicensed utility of `mno` with every MNO present.
    pub baseline: f64,
    /// Unlicensed utility of `mno` after the removal.
    pub counterfactual: f64,
    pub gain: f64,
    /// Baseline unlicensed utility each withdrawing MNO gives up.
    pub withdrawing: BTreeMap<MnoId, f64>,
}

/// Unlicensed-band utility of `mno`: `Σ_k ξ_k · B^u · R_k · max_l ρ^(l)`.
fn unlicensed_utility(scenario: &Scenario, mno: MnoId, xi: &BTreeMap<LinkId, f64>) -> f64 {
    let best_price = scenario
        .service_ids()
        .into_iter()
        .filter_map(|s| scenario.service_terms(mno, s).map(|(_, rho)| rho))
        .fold(0.0, f64::max);
    scenario
        .links_of(mno)
        .map(|l| {
            xi.get(&l.id).copied().unwrap_or(0.0)
                * scenario.band_plan.unlicensed_bandwidth_hz
                * l.rate_bps_per_hz
                * best_price
        })
        .sum()
}

/// Value of the unlicensed-band rights of the MNOs in `removed`, seen from
/// `mno`.
pub fn value_of_rights(
    scenario: &Scenario,
    table: &AccessProbabilityTable,
    mno: MnoId,
    removed: &BTreeSet<MnoId>,
    opts: &EstimateOptions,
) -> Result<VorReport, MboeError> {
    if scenario.mno(mno).is_none() {
        return Err(MboeError::UnknownMno(mno));
    }
    if removed.contains(&mno) {
        return Err(MboeError::RemovedSelf(mno));
    }
    let graph = ContentionGraph::from_scenario(scenario);
    let full = link_access(scenario, &graph, table, &BTreeSet::new(), opts)?;
    let baseline = unlicensed_utility(scenario, mno, &full);
    let counterfactual = if removed.is_empty() {
        baseline
    } else {
        let cf = link_access(scenario, &graph, table, removed, opts)?;
        unlicensed_utility(scenario, mno, &cf)
    };
    let withdrawing = removed
        .iter()
        .map(|&j| (j, unlicensed_utility(scenario, j, &full)))
        .collect();
    Ok(VorReport {
        mno,
        removed: removed.iter().copied().collect(),
        baseline,
        counterfactual,
        gain: counterfactual - baseline,
        withdrawing,
    })
}
