use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::problem::{Normalized, SlicingProblem, Variant};
use crate::scenario::{LinkId, MnoId, ServiceId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkAllocation {
    pub link: LinkId,
    pub owner: MnoId,
    /// u per service, Hz.
    pub licensed_hz: Vec<f64>,
    /// α per service.
    pub access_share: Vec<f64>,
    /// `(u + α·B^u)·R` per service, bit/s.
    pub throughput_bps: Vec<f64>,
    /// π = ρ·R·u per service.
    pub licensed_utility: Vec<f64>,
    /// ν = ρ·R·α·B^u per service.
    pub unlicensed_utility: Vec<f64>,
    /// ϖ = π + ν per service.
    pub utility: Vec<f64>,
    /// d = u / w per service (0 when the slice uses no licensed bandwidth).
    pub licensed_share: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSummary {
    pub service: ServiceId,
    /// w: licensed bandwidth allocated within the slice, Hz.
    pub licensed_hz: f64,
    /// Σ ϖ over the slice.
    pub worth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingSolution {
    pub variant: Variant,
    pub services: Vec<ServiceId>,
    pub objective: f64,
    pub links: Vec<LinkAllocation>,
    pub slices: Vec<SliceSummary>,
    /// ϖ per service summed over each MNO's links.
    pub mno_utility: BTreeMap<MnoId, Vec<f64>>,
}

impl SlicingSolution {
    /// Assemble from normalized `α` and `u` (index `k · Y + l`).
    pub fn from_normalized(p: &SlicingProblem, n: &Normalized, alpha: &[f64], u: &[f64]) -> Self {
        let y = p.n_services();
        let bu = p.unlicensed_bandwidth_hz;
        let mut w = vec![0.0; y];
        for k in 0..p.links.len() {
            for l in 0..y {
                w[l] += u[k * y + l] * n.bw_ref;
            }
        }
        let mut mno_utility: BTreeMap<MnoId, Vec<f64>> =
            p.mnos.iter().map(|m| (m.id, vec![0.0; y])).collect();
        let mut worth = vec![0.0; y];
        let links = p
            .links
            .iter()
            .enumerate()
            .map(|(k, spec)| {
                let r = spec.rate_bps_per_hz;
                let mut la = LinkAllocation {
                    link: spec.id,
                    owner: spec.owner,
                    licensed_hz: Vec::with_capacity(y),
                    access_share: Vec::with_capacity(y),
                    throughput_bps: Vec::with_capacity(y),
                    licensed_utility: Vec::with_capacity(y),
                    unlicensed_utility: Vec::with_capacity(y),
                    utility: Vec::with_capacity(y),
                    licensed_share: Vec::with_capacity(y),
                };
                for l in 0..y {
                    let (_, rho) = p.terms(k, l);
                    let hz = u[k * y + l] * n.bw_ref;
                    let a = alpha[k * y + l];
                    let pi = rho * r * hz;
                    let nu = rho * r * a * bu;
                    la.licensed_hz.push(hz);
                    la.access_share.push(a);
                    la.throughput_bps.push((hz + a * bu) * r);
                    la.licensed_utility.push(pi);
                    la.unlicensed_utility.push(nu);
                    la.utility.push(pi + nu);
                    la.licensed_share.push(if w[l] > 0.0 { hz / w[l] } else { 0.0 });
                    worth[l] += pi + nu;
                    mno_utility.get_mut(&spec.owner).expect("owner")[l] += pi + nu;
                }
                la
            })
            .collect();
        SlicingSolution {
            variant: p.variant,
            services: p.services.clone(),
            objective: worth.iter().sum(),
            links,
            slices: (0..y)
                .map(|l| SliceSummary {
                    service: p.services[l],
                    licensed_hz: w[l],
                    worth: worth[l],
                })
                .collect(),
            mno_utility,
        }
    }

    /// Normalized `(α, u)` vectors of this solution for `p`.
    pub fn to_normalized(&self, n: &Normalized) -> (Vec<f64>, Vec<f64>) {
        let mut a = Vec::with_capacity(n.len());
        let mut u = Vec::with_capacity(n.len());
        for la in &self.links {
            a.extend(&la.access_share);
            u.extend(la.licensed_hz.iter().map(|hz| hz / n.bw_ref));
        }
        (a, u)
    }

    /// Largest constraint violation against `p`, in normalized units.
    pub fn max_violation(&self, p: &SlicingProblem) -> f64 {
        let n = p.normalized();
        if self.links.len() != p.links.len()
            || self.links.iter().zip(&p.links).any(|(a, b)| a.link != b.id)
        {
            return f64::INFINITY;
        }
        let (a, u) = self.to_normalized(&n);
        n.max_violation(&a, &u)
    }

    /// Total throughput per service and band: `(licensed, unlicensed)` bit/s.
    pub fn admitted_traffic(&self, unlicensed_bandwidth_hz: f64, rates: &[f64]) -> Vec<(f64, f64)> {
        let y = self.services.len();
        let mut out = vec![(0.0, 0.0); y];
        for (la, &r) in self.links.iter().zip(rates) {
            for l in 0..y {
                out[l].0 += la.licensed_hz[l] * r;
                out[l].1 += la.access_share[l] * unlicensed_bandwidth_hz * r;
            }
        }
        out
    }
}
