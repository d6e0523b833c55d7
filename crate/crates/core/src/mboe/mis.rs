//! Exact maximum independent sets by branch and bound over bitmasks.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::graph::ContentionGraph;
use super::MboeError;
use crate::scenario::NodeId;

/// Default vertex-count bound for exact enumeration.
pub const DEFAULT_MIS_BOUND: usize = 20;

/// Sorted vertex ids of one maximum independent set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MisSet(pub Vec<NodeId>);

fn masks(g: &ContentionGraph) -> Vec<u64> {
    (0..g.len())
        .map(|i| g.neighbours(i).iter().fold(0u64, |m, &j| m | 1 << j))
        .collect()
}

/// Size of the largest independent set within `cand`.
fn independence_number(adj: &[u64], cand: u64, size: u32, best: &mut u32) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + cand.count_ones() <= *best {
        return;
    }
    let v = cand.trailing_zeros() as usize;
    let bit = 1u64 << v;
    independence_number(adj, cand & !bit & !adj[v], size + 1, best);
    // Excluding v only helps when some neighbour can take its place.
    if adj[v] & cand != 0 {
        independence_number(adj, cand & !bit, size, best);
    }
}

fn enumerate(adj: &[u64], cand: u64, cur: u64, target: u32, out: &mut Vec<u64>) {
    let size = cur.count_ones();
    if size == target {
        out.push(cur);
        return;
    }
    if cand == 0 || size + cand.count_ones() < target {
        return;
    }
    let v = cand.trailing_zeros() as usize;
    let bit = 1u64 << v;
    enumerate(adj, cand & !bit & !adj[v], cur | bit, target, out);
    enumerate(adj, cand & !bit, cur, target, out);
}

fn check_bound(g: &ContentionGraph, bound: usize) -> Result<(), MboeError> {
    if g.len() > bound.min(64) {
        return Err(MboeError::SizeBound {
            vertices: g.len(),
            bound: bound.min(64),
        });
    }
    Ok(())
}

/// Independence number of `g` (at most `bound` vertices).
pub fn independence_number_of(g: &ContentionGraph, bound: usize) -> Result<usize, MboeError> {
    check_bound(g, bound)?;
    let adj = masks(g);
    let all = if g.is_empty() { 0 } else { u64::MAX >> (64 - g.len()) };
    let mut best = 0;
    independence_number(&adj, all, 0, &mut best);
    Ok(best as usize)
}

/// Every independent set of maximum cardinality, sorted lexicographically by
/// vertex ids. The empty graph has the single empty set.
pub fn maximum_independent_sets(
    g: &ContentionGraph,
    bound: usize,
) -> Result<Vec<MisSet>, MboeError> {
    check_bound(g, bound)?;
    let adj = masks(g);
    let all = if g.is_empty() { 0 } else { u64::MAX >> (64 - g.len()) };
    let mut best = 0;
    independence_number(&adj, all, 0, &mut best);
    let mut found = Vec::new();
    enumerate(&adj, all, 0, best, &mut found);
    let mut sets: Vec<MisSet> = found
        .into_iter()
        .map(|m| {
            let mut ids: Vec<NodeId> = (0..g.len())
                .filter(|&i| m >> i & 1 == 1)
                .map(|i| g.vertex(i).id)
                .collect();
            ids.sort_unstable();
            MisSet(ids)
        })
        .collect();
    sets.sort();
    Ok(sets)
}

/// Induced subgraph on the union of all maximum independent sets, computed
/// per connected component (each component must respect `bound`).
pub fn prune_to_mis(g: &ContentionGraph, bound: usize) -> Result<ContentionGraph, MboeError> {
    let mut keep = BTreeSet::new();
    for comp in g.components() {
        let sub = g.induced(&comp);
        for set in maximum_independent_sets(&sub, bound)? {
            for id in set.0 {
                keep.insert(g.index_of(id).expect("vertex in graph"));
            }
        }
    }
    Ok(g.induced(&keep.into_iter().collect::<Vec<_>>()))
}

/// Clique number by simple branch and bound; suitable for sparse graphs of
/// any size.
pub fn clique_number(g: &ContentionGraph) -> usize {
    fn grow(g: &ContentionGraph, cand: &[usize], size: usize, best: &mut usize) {
        if cand.is_empty() {
            *best = (*best).max(size);
            return;
        }
        for (k, &v) in cand.iter().enumerate() {
            if size + cand.len() - k <= *best {
                return;
            }
            let next: Vec<usize> = cand[k + 1..]
                .iter()
                .copied()
                .filter(|&w| g.has_edge(v, w))
                .collect();
            grow(g, &next, size + 1, best);
        }
    }
    let all: Vec<usize> = (0..g.len()).collect();
    let mut best = 0;
    grow(g, &all, 0, &mut best);
    best
}
