use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::canon::LabeledGraph;
use super::MboeError;
use crate::coexist::build_sense_matrix;
use crate::scenario::{MnoId, NodeId, NodeKind, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: NodeId,
    pub kind: NodeKind,
    /// `None` marks a Wi-Fi access point.
    pub owner: Option<MnoId>,
}

/// Simple undirected graph of contending transmitters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentionGraph {
    vertices: Vec<Vertex>,
    adj: Vec<Vec<usize>>,
    /// MNOs known to the scenario, so per-MNO views can reject unknown ids.
    mnos: BTreeSet<MnoId>,
}

impl ContentionGraph {
    /// Build from vertices and edges given as vertex ids.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: &[(NodeId, NodeId)],
        mnos: BTreeSet<MnoId>,
    ) -> Result<Self, MboeError> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(MboeError::InvalidGraph(format!("duplicate vertex {}", v.id)));
            }
            if let Some(o) = v.owner {
                if !mnos.contains(&o) {
                    return Err(MboeError::InvalidGraph(format!(
                        "vertex {} owned by unknown mno {o}",
                        v.id
                    )));
                }
            }
        }
        let mut adj = vec![BTreeSet::new(); vertices.len()];
        for &(a, b) in edges {
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                return Err(MboeError::InvalidGraph(format!("edge ({a}, {b}) has unknown end")));
            };
            if ia == ib {
                return Err(MboeError::InvalidGraph(format!("self loop on {a}")));
            }
            if !adj[ia].insert(ib) {
                return Err(MboeError::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adj[ib].insert(ia);
        }
        Ok(ContentionGraph {
            vertices,
            adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
            mnos,
        })
    }

    /// One vertex per active transmitter, edges from the sense relation.
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let (ids, sense) = build_sense_matrix(scenario);
        let vertices = ids
            .iter()
            .map(|&id| {
                let n = scenario.node(id).expect("active node exists");
                Vertex {
                    id,
                    kind: n.kind,
                    owner: n.owner,
                }
            })
            .collect();
        ContentionGraph {
            vertices,
            adj: (0..ids.len()).map(|i| sense.neighbours(i)).collect(),
            mnos: scenario.mnos.iter().map(|m| m.id).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Vertex {
        &self.vertices[i]
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as sorted vertex-id pairs.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns {
                if a < b {
                    let (x, y) = (self.vertices[a].id, self.vertices[b].id);
                    out.push((x.min(y), x.max(y)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn mnos(&self) -> &BTreeSet<MnoId> {
        &self.mnos
    }

    /// Induced subgraph on `keep` (local indices), preserving vertex order.
    pub fn induced(&self, keep: &[usize]) -> Self {
        let mut sorted: Vec<usize> = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut map = vec![usize::MAX; self.len()];
        for (new, &old) in sorted.iter().enumerate() {
            map[old] = new;
        }
        ContentionGraph {
            vertices: sorted.iter().map(|&i| self.vertices[i]).collect(),
            adj: sorted
                .iter()
                .map(|&i| {
                    self.adj[i]
                        .iter()
                        .filter(|&&j| map[j] != usize::MAX)
                        .map(|&j| map[j])
                        .collect()
                })
                .collect(),
            mnos: self.mnos.clone(),
        }
    }

    /// Connected components as sorted local-index lists, ordered by their
    /// smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut head = 0;
            while head < comp.len() {
                let v = comp[head];
                head += 1;
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Technology-labeled bitmask form (at most 64 vertices).
    pub fn to_labeled(&self) -> LabeledGraph {
        assert!(self.len() <= 64, "labeled form supports at most 64 vertices");
        LabeledGraph {
            labels: self.vertices.iter().map(|v| v.kind).collect(),
            adj: self
                .adj
                .iter()
                .map(|ns| ns.iter().fold(0u64, |m, &j| m | 1 << j))
                .collect(),
        }
    }

    /// Vertices owned by `mno` plus every vertex they sense.
    pub fn subgraph_for_mno(&self, mno: MnoId) -> Result<Self, MboeError> {
        if !self.mnos.contains(&mno) {
            return Err(MboeError::UnknownMno(mno));
        }
        let mut keep = BTreeSet::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.owner == Some(mno) {
                keep.insert(i);
                keep.extend(self.adj[i].iter().copied());
            }
        }
        Ok(self.induced(&keep.into_iter().collect::<Vec<_>>()))
    }

    /// Induced subgraph after deleting every vertex owned by a removed MNO.
    pub fn remove_mno(&self, removed: &BTreeSet<MnoId>) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !self.vertices[i].owner.is_some_and(|o| removed.contains(&o)))
            .collect();
        self.induced(&keep)
    }
}
