//! Seeded random slicing problems for experiments and property checks.

use std::collections::BTreeSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::problem::{BudgetMode, LinkSpec, MnoTerms, SlicingProblem, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomProblemSpec {
    pub max_mnos: usize,
    pub min_services: usize,
    pub max_services: usize,
    pub max_links: usize,
    /// Draw each support group as a random nonempty subset instead of all
    /// MNOs.
    pub random_ssg: bool,
    pub variant: Variant,
}

impl Default for RandomProblemSpec {
    fn default() -> Self {
        RandomProblemSpec {
            max_mnos: 4,
            min_services: 1,
            max_services: 3,
            max_links: 10,
            random_ssg: false,
            variant: Variant::S3,
        }
    }
}

/// A random problem that is feasible under S3.
///
/// Bands are 5 to 20 MHz licensed per MNO and 20 MHz unlicensed, rates 0.5
/// to 6 b/s/Hz, ξ in [0.05, 1], prices 0.5 to 2 per Mbit. Minimum
/// throughputs start at 0 to 8 Mbit/s and are halved until every link can
/// meet them.
pub fn random_problem(seed: u64, spec: &RandomProblemSpec) -> SlicingProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=spec.max_mnos.max(1));
    let y = rng.random_range(spec.min_services.max(1)..=spec.max_services.max(spec.min_services).max(1));
    let n_links = rng.random_range(m.min(spec.max_links).max(1)..=spec.max_links.max(1));
    let services: Vec<u32> = (1..=y as u32).collect();
    let mut mnos: Vec<MnoTerms> = (1..=m as u32)
        .map(|id| MnoTerms {
            id,
            licensed_bandwidth_hz: rng.random_range(5.0..20.0) * 1e6,
            min_throughput_bps: (0..y).map(|_| rng.random_range(0.0..8.0) * 1e6).collect(),
            price_per_bit: (0..y).map(|_| rng.random_range(0.5..2.0) * 1e-6).collect(),
        })
        .collect();
    let links = (0..n_links)
        .map(|k| LinkSpec {
            id: k as u32 + 1,
            // Every MNO gets at least one link.
            owner: if k < m { k as u32 + 1 } else { rng.random_range(1..=m as u32) },
            rate_bps_per_hz: rng.random_range(0.5..6.0),
            access_budget: rng.random_range(0.05..1.0),
        })
        .collect();
    let all: BTreeSet<u32> = (1..=m as u32).collect();
    let ssg = (0..y)
        .map(|_| {
            if !spec.random_ssg {
                return all.clone();
            }
            let mut g: BTreeSet<u32> = all.iter().copied().filter(|_| rng.random_bool(0.6)).collect();
            if g.is_empty() {
                g.insert(rng.random_range(1..=m as u32));
            }
            g
        })
        .collect();
    let mut p = SlicingProblem {
        services,
        mnos: mnos.clone(),
        links,
        unlicensed_bandwidth_hz: 20e6,
        ssg,
        variant: Variant::S3,
        budget_mode: BudgetMode::PerLink,
    };
    for _ in 0..60 {
        if p.normalized().feasibility(0.0).is_ok() {
            break;
        }
        for t in &mut mnos {
            for e in &mut t.min_throughput_bps {
                *e *= 0.5;
            }
        }
        p.mnos = mnos.clone();
    }
    p.variant = spec.variant;
    p
}
