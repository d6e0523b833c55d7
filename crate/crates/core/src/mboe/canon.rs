//! Canonical keys for small technology-labeled graphs.
//!
//! Vertices are ordered by (label, degree) with LAA before Wi-Fi; within
//! each class every permutation is tried and the one with the smallest
//! upper-triangle adjacency bitmap wins. The key records the degree
//! sequence, the bitmap and the label string in canonical order, e.g.
//! `d=1.2.1;a=5;l=LLW`.

use std::collections::BTreeMap;

use crate::scenario::NodeKind;

/// Largest graph the canonical form accepts (the bitmap must fit in 64 bits).
pub const MAX_CANON_VERTICES: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    pub labels: Vec<NodeKind>,
    /// Bit `j` of `adj[i]` set iff `i` and `j` are adjacent.
    pub adj: Vec<u64>,
}

impl LabeledGraph {
    pub fn new(labels: Vec<NodeKind>, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![0u64; labels.len()];
        for &(a, b) in edges {
            if a != b {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        LabeledGraph { labels, adj }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.adj[v].count_ones()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.len();
        if n <= 1 {
            return true;
        }
        let mut seen = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = self.adj[v] & !seen;
            seen |= new;
            frontier |= new;
        }
        seen.count_ones() as usize == n
    }

    /// Relabel so that new vertex `p` is old vertex `order[p]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut pos = vec![0usize; order.len()];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        let adj = order
            .iter()
            .map(|&v| {
                let mut m = 0u64;
                let mut row = self.adj[v];
                while row != 0 {
                    let j = row.trailing_zeros() as usize;
                    row &= row - 1;
                    m |= 1 << pos[j];
                }
                m
            })
            .collect();
        LabeledGraph {
            labels: order.iter().map(|&v| self.labels[v]).collect(),
            adj,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub key: String,
    /// Canonical position `p` holds input vertex `order[p]`.
    pub order: Vec<usize>,
    /// Automorphism orbit id per canonical position (smallest position in
    /// the orbit).
    pub orbit: Vec<usize>,
    /// The graph relabeled into canonical order.
    pub graph: LabeledGraph,
}

fn bitmap(g: &LabeledGraph, order: &[usize]) -> u64 {
    let n = order.len();
    let mut bits = 0u64;
    let mut k = 0;
    for p in 0..n {
        for q in p + 1..n {
            if g.adj[order[p]] >> order[q] & 1 == 1 {
                bits |= 1 << k;
            }
            k += 1;
        }
    }
    bits
}

fn class_key(g: &LabeledGraph, v: usize) -> (NodeKind, u32) {
    (g.labels[v], g.degree(v))
}

/// Visit every ordering that permutes vertices only within their class.
fn for_each_order(classes: &[Vec<usize>], f: &mut impl FnMut(&[usize])) {
    fn rec(
        classes: &[Vec<usize>],
        ci: usize,
        used: &mut Vec<bool>,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]),
    ) {
        if ci == classes.len() {
            f(cur);
            return;
        }
        let class = &classes[ci];
        if cur.len() - start == class.len() {
            let next_start = cur.len();
            rec(classes, ci + 1, used, next_start, cur, f);
            return;
        }
        for (k, &v) in class.iter().enumerate() {
            if used[k + offset(classes, ci)] {
                continue;
            }
            used[k + offset(classes, ci)] = true;
            cur.push(v);
            rec(classes, ci, used, start, cur, f);
            cur.pop();
            used[k + offset(classes, ci)] = false;
        }
    }
    fn offset(classes: &[Vec<usize>], ci: usize) -> usize {
        classes[..ci].iter().map(Vec::len).sum()
    }
    let total: usize = classes.iter().map(Vec::len).sum();
    let mut used = vec![false; total];
    let mut cur = Vec::with_capacity(total);
    rec(classes, 0, &mut used, 0, &mut cur, f);
}

/// Canonical form of `g` (at most [`MAX_CANON_VERTICES`] vertices).
pub fn canonical_form(g: &LabeledGraph) -> CanonicalForm {
    let n = g.len();
    assert!(n <= MAX_CANON_VERTICES, "canonical form supports at most {MAX_CANON_VERTICES} vertices");
    let mut by_class: BTreeMap<(NodeKind, u32), Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_class.entry(class_key(g, v)).or_default().push(v);
    }
    let classes: Vec<Vec<usize>> = by_class.into_values().collect();
    let mut best = u64::MAX;
    let mut winners: Vec<Vec<usize>> = Vec::new();
    for_each_order(&classes, &mut |order| {
        let b = bitmap(g, order);
        if b < best {
            best = b;
            winners.clear();
        }
        if b == best {
            winners.push(order.to_vec());
        }
    });
    if n == 0 {
        best = 0;
        winners = vec![Vec::new()];
    }
    let order = winners[0].clone();
    // Position q shares an orbit with p iff some winning order puts the
    // vertex at p into position q.
    let mut orbit: Vec<usize> = (0..n).collect();
    for p in 0..n {
        if orbit[p] != p {
            continue;
        }
        for w in &winners {
            let q = w.iter().position(|&v| v == order[p]).expect("permutation");
            if q > p {
                orbit[q] = orbit[q].min(p);
            }
        }
    }
    let graph = g.permuted(&order);
    let degrees: Vec<String> = (0..n).map(|p| graph.degree(p).to_string()).collect();
    let labels: String = graph.labels.iter().map(|k| k.letter()).collect();
    let key = format!("d={};a={:x};l={}", degrees.join("."), best, labels);
    CanonicalForm {
        key,
        order,
        orbit,
        graph,
    }
}

pub fn canonical_key(g: &LabeledGraph) -> String {
    canonical_form(g).key
}

/// Every connected labeled graph with `1..=max_vertices` vertices, one
/// representative per isomorphism class, in canonical order, sorted by
/// (vertex count, key).
pub fn enumerate_connected(max_vertices: usize) -> Vec<LabeledGraph> {
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect();
        let mut found: BTreeMap<String, LabeledGraph> = BTreeMap::new();
        for lte_count in (0..=n).rev() {
            let labels: Vec<NodeKind> = (0..n)
                .map(|i| if i < lte_count { NodeKind::LaaBs } else { NodeKind::WifiAp })
                .collect();
            for mask in 0u64..(1u64 << pairs.len()) {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let g = LabeledGraph::new(labels.clone(), &edges);
                if !g.is_connected() {
                    continue;
                }
                let cf = canonical_form(&g);
                found.entry(cf.key).or_insert(cf.graph);
            }
        }
        out.extend(found.into_values());
    }
    out
}
