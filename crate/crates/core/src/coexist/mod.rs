//! Listen-before-talk coexistence between LAA base stations and Wi-Fi APs.
//!
//! Each contender waits for the medium to stay idle for DIFS, counts down a
//! random backoff in idle slots (freezing while a sensed neighbour
//! transmits) and then holds the channel for one TXOP. Simultaneous starts
//! of sensing neighbours collide: neither TXOP counts as airtime and both
//! redraw a backoff.
//!
//! Access probability ξ is the fraction of time a node holds the channel
//! divided by the occupancy it would reach alone
//! ([`closed_form_occupancy`]), clamped to `[0, 1]`. A base station serving
//! several links splits its ξ equally among them.

mod engine;
mod table;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use engine::simulate;
pub use table::{measure_table, AccessProbabilityTable, TableError, TABLE_FORMAT};

use crate::scenario::radio::received_power_dbm;
use crate::scenario::{ContentionParams, LinkId, NodeId, NodeKind, Scenario};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation config error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrafficModel {
    /// Every contender always has a frame queued.
    Saturated,
    Poisson { frames_per_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackoffPolicy {
    /// Counter uniform in `[cw_min, cw_max]` on every draw.
    Uniform,
    /// Counter uniform in `[0, cw]`; `cw` starts at `cw_min`, doubles after a
    /// collision up to `cw_max` and resets after a success.
    BinaryExponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub duration_s: f64,
    pub seed: u64,
    pub slot_time_s: f64,
    pub traffic: TrafficModel,
    pub backoff: BackoffPolicy,
    /// Record the time share of every set of simultaneously transmitting
    /// nodes (at most 64 nodes).
    pub track_configurations: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            duration_s: 10.0,
            seed: 1,
            slot_time_s: 9e-6,
            traffic: TrafficModel::Saturated,
            backoff: BackoffPolicy::Uniform,
            track_configurations: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(SimError::Config(format!("duration {} s must be > 0", self.duration_s)));
        }
        if !(self.slot_time_s > 0.0 && self.slot_time_s.is_finite()) {
            return Err(SimError::Config(format!("slot_time {} s must be > 0", self.slot_time_s)));
        }
        if let TrafficModel::Poisson { frames_per_s } = self.traffic {
            if !(frames_per_s > 0.0 && frames_per_s.is_finite()) {
                return Err(SimError::Config(format!("arrival rate {frames_per_s} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Channel occupancy of a saturated contender with no neighbours:
/// `TXOP / (TXOP + DIFS + E[backoff]·slot)`.
pub fn closed_form_occupancy(c: &ContentionParams, slot_time_s: f64, policy: BackoffPolicy) -> f64 {
    let mean_backoff = match policy {
        BackoffPolicy::Uniform => (c.cw_min_slots as f64 + c.cw_max_slots as f64) / 2.0,
        BackoffPolicy::BinaryExponential => c.cw_min_slots as f64 / 2.0,
    };
    c.txop_s / (c.txop_s + c.difs_s + mean_backoff * slot_time_s)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeStats {
    /// Successful (non-collided) transmission time.
    pub airtime_held_s: f64,
    /// TXOPs started, collided ones included.
    pub txop_count: u64,
    pub collided_count: u64,
    pub frames_served: u64,
    /// Raw `airtime_held / duration`.
    pub occupancy: f64,
    /// Normalized access probability ξ.
    pub access_probability: f64,
    /// Sum over served frames of the wait between arrival and the start of
    /// the successful TXOP (Poisson traffic only).
    pub queueing_delay_s: f64,
    /// Sum over TXOPs of the time spent in DIFS and backoff.
    pub contention_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub duration_s: f64,
    pub nodes: Vec<NodeStats>,
    /// Time fraction per transmitting set, keyed by node bitmask.
    pub configurations: Option<BTreeMap<u64, f64>>,
}

/// Symmetric, irreflexive carrier-sense relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenseMatrix {
    n: usize,
    adj: Vec<bool>,
}

impl SenseMatrix {
    pub fn empty(n: usize) -> Self {
        SenseMatrix {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut m = Self::empty(n);
        for &(a, b) in edges {
            m.set(a, b);
        }
        m
    }

    /// Build from bitmask adjacency rows (at most 64 nodes).
    pub fn from_bitmasks(rows: &[u64]) -> Self {
        let n = rows.len();
        let mut m = Self::empty(n);
        for (a, &row) in rows.iter().enumerate() {
            for b in 0..n {
                if row >> b & 1 == 1 && a != b {
                    m.set(a, b);
                }
            }
        }
        m
    }

    pub fn set(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a * self.n + b] = true;
            self.adj[b * self.n + a] = true;
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn senses(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.n + b]
    }

    pub fn neighbours(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.senses(a, b)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&x| x).count() / 2
    }
}

/// Sense relation over the scenario's active transmitters
/// ([`Scenario::active_nodes`]), in that order.
///
/// `a` senses `b` when `tx(b) − PL(dist) ≥ cca(a)`; the relation is made
/// symmetric by OR. Co-located nodes always sense each other.
pub fn build_sense_matrix(scenario: &Scenario) -> (Vec<NodeId>, SenseMatrix) {
    let nodes = scenario.active_nodes();
    let fc = scenario.band_plan.carrier_frequency_ghz;
    let mut m = SenseMatrix::empty(nodes.len());
    for (a, na) in nodes.iter().enumerate() {
        for (b, nb) in nodes.iter().enumerate() {
            if a == b {
                continue;
            }
            let rx = received_power_dbm(nb.tx_power_dbm, na.position.distance(nb.position), fc);
            if rx >= na.cca_threshold_dbm {
                m.set(a, b);
            }
        }
    }
    (nodes.iter().map(|n| n.id).collect(), m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub link: LinkId,
    pub node: NodeId,
    /// Share of the serving node's airtime.
    pub airtime_held_s: f64,
    /// TXOPs of the serving node.
    pub txop_count: u64,
    /// Share of the serving node's ξ.
    pub access_probability: f64,
    pub queueing_delay_s: f64,
    pub contention_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeReport {
    pub node: NodeId,
    pub kind: NodeKind,
    pub stats: NodeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceReport {
    pub duration_s: f64,
    pub nodes: Vec<NodeReport>,
    pub links: Vec<LinkStats>,
}

/// Simulate every active transmitter of `scenario`.
pub fn run_coexistence(scenario: &Scenario, cfg: &SimConfig) -> Result<CoexistenceReport, SimError> {
    let (ids, sense) = build_sense_matrix(scenario);
    let params: Vec<ContentionParams> = ids
        .iter()
        .map(|&id| scenario.node(id).expect("active node exists").contention)
        .collect();
    let report = simulate(&params, &sense, cfg)?;
    let nodes: Vec<NodeReport> = ids
        .iter()
        .zip(&report.nodes)
        .map(|(&id, s)| NodeReport {
            node: id,
            kind: scenario.node(id).expect("active node exists").kind,
            stats: s.clone(),
        })
        .collect();
    let links = scenario
        .links
        .iter()
        .map(|l| {
            let share = 1.0 / scenario.links_at_node(l.node) as f64;
            let s = &nodes
                .iter()
                .find(|n| n.node == l.node)
                .expect("serving node is active")
                .stats;
            LinkStats {
                link: l.id,
                node: l.node,
                airtime_held_s: s.airtime_held_s * share,
                txop_count: s.txop_count,
                access_probability: s.access_probability * share,
                queueing_delay_s: s.queueing_delay_s * share,
                contention_time_s: s.contention_time_s * share,
            }
        })
        .collect();
    Ok(CoexistenceReport {
        duration_s: report.duration_s,
        nodes,
        links,
    })
}
