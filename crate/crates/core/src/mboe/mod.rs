//! Table-driven estimation of channel-access probabilities on contention
//! graphs.
//!
//! For an MNO the estimator takes its one-hop view of the contention graph
//! and reads each connected component's ξ from a pre-measured
//! [`AccessProbabilityTable`](crate::coexist::AccessProbabilityTable).
//! Components larger than the table are first cut down to the vertices
//! that belong to some maximum independent set; vertices removed that way
//! are looked up together with the pruned components they sense.
//! Counterfactual estimates drop the vertices of withdrawing MNOs first.

pub mod canon;
mod estimate;
mod graph;
pub mod mis;

use thiserror::Error;

pub use estimate::{
    estimate_access, estimate_for_mno, link_access, value_of_rights, AccessEstimate,
    EstimateOptions, PruneMode, Provenance, VertexEstimate, VorReport,
};
pub use graph::{ContentionGraph, Vertex};
pub use mis::{
    clique_number, independence_number_of, maximum_independent_sets, prune_to_mis, MisSet,
    DEFAULT_MIS_BOUND,
};

use crate::scenario::MnoId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MboeError {
    #[error("invalid contention graph: {0}")]
    InvalidGraph(String),
    #[error("unknown mno {0}")]
    UnknownMno(MnoId),
    #[error("graph has {vertices} vertices, exact independent-set enumeration is bounded at {bound}")]
    SizeBound { vertices: usize, bound: usize },
    #[error("no access-table entry for {key}")]
    TableMiss { key: String },
    #[error("mno {0} cannot be in its own removal set")]
    RemovedSelf(MnoId),
}
