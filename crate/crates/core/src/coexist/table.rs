//! Pre-measured access probabilities for small contention graphs.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{simulate, SenseMatrix, SimConfig, SimError};
use crate::mboe::canon::{canonical_form, LabeledGraph};
use crate::scenario::NodeKind;

pub const TABLE_FORMAT: &str = "slicenet-access-table/1";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot access table file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed table file: {0}")]
    Parse(String),
}

/// Canonical key → ξ per vertex in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessProbabilityTable {
    pub format: String,
    /// Largest graph size measured.
    pub max_size: usize,
    pub sim: SimConfig,
    pub entries: BTreeMap<String, Vec<f64>>,
}

impl AccessProbabilityTable {
    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    /// ξ per vertex of `g` in `g`'s own vertex order, or the missing key.
    pub fn lookup(&self, g: &LabeledGraph) -> Result<Vec<f64>, String> {
        if g.len() > crate::mboe::canon::MAX_CANON_VERTICES {
            return Err(format!("<graph with {} vertices>", g.len()));
        }
        let cf = canonical_form(g);
        let values = self.entries.get(&cf.key).ok_or_else(|| cf.key.clone())?;
        let mut out = vec![0.0; g.len()];
        for (p, &v) in cf.order.iter().enumerate() {
            out[v] = values[p];
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TableError> {
        let t: Self = serde_json::from_str(text).map_err(|e| TableError::Parse(e.to_string()))?;
        if t.format != TABLE_FORMAT {
            return Err(TableError::Parse(format!("unknown format tag {:?}", t.format)));
        }
        if let Some((k, v)) = t.entries.iter().find(|(_, v)| v.iter().any(|x| !(0.0..=1.0).contains(x))) {
            return Err(TableError::Parse(format!("entry {k} has values outside [0, 1]: {v:?}")));
        }
        Ok(t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TableError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TableError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Per-entry seed so each graph gets an independent stream.
pub(crate) fn entry_seed(seed: u64, key: &str) -> u64 {
    let mut z = seed ^ fnv1a(key);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Simulate every graph of `family` once and store per-vertex ξ, averaged
/// over automorphism orbits so symmetric positions get equal values.
///
/// Contenders use the default LAA or Wi-Fi channel-access parameters of
/// their label. Graphs are simulated in parallel; the result does not
/// depend on thread scheduling.
pub fn measure_table(
    family: &[LabeledGraph],
    cfg: &SimConfig,
) -> Result<AccessProbabilityTable, SimError> {
    let rows: Vec<Result<(String, Vec<f64>), SimError>> = family
        .par_iter()
        .map(|g| {
            let cf = canonical_form(g);
            let params: Vec<_> = cf
                .graph
                .labels
                .iter()
                .map(|k: &NodeKind| k.default_contention())
                .collect();
            let sense = SenseMatrix::from_bitmasks(&cf.graph.adj);
            let run_cfg = SimConfig {
                seed: entry_seed(cfg.seed, &cf.key),
                track_configurations: false,
                ..cfg.clone()
            };
            let report = simulate(&params, &sense, &run_cfg)?;
            let raw: Vec<f64> = report.nodes.iter().map(|s| s.access_probability).collect();
            let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
            for (p, &x) in raw.iter().enumerate() {
                let e = sums.entry(cf.orbit[p]).or_insert((0.0, 0));
                e.0 += x;
                e.1 += 1;
            }
            let values = (0..raw.len())
                .map(|p| {
                    let (s, c) = sums[&cf.orbit[p]];
                    s / c as f64
                })
                .collect();
            Ok((cf.key, values))
        })
        .collect();
    let mut entries = BTreeMap::new();
    for r in rows {
        let (k, v) = r?;
        entries.insert(k, v);
    }
    Ok(AccessProbabilityTable {
        format: TABLE_FORMAT.to_string(),
        max_size: family.iter().map(LabeledGraph::len).max().unwrap_or(0),
        sim: cfg.clone(),
        entries,
    })
}
