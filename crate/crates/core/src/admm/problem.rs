//! The slicing linear program and its normalized form.
//!
//! Decision variables per link `k` and service `l`: licensed bandwidth
//! `u_kl` (Hz) and unlicensed access share `α_kl`. The program maximizes
//!
//! ```text
//! Σ_kl ρ_l · R_k · (u_kl + α_kl · B^u)
//! s.t. Σ_l α_kl = ξ_k,  0 ≤ α_kl ≤ 1
//!      Σ_l u_kl ≤ b_k,  u_kl ≥ 0
//!      (u_kl + α_kl · B^u) · R_k ≥ η_l
//! ```
//!
//! where `b_k` is the licensed pool reachable from link `k` (see
//! [`SlicingProblem::link_budget_hz`]). Solvers work on [`Normalized`]
//! data: bandwidth in units of a reference bandwidth and objective
//! coefficients scaled to at most 1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{LinkId, MnoId, Scenario, ServiceId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Unlicensed band only: every `u` is forced to 0.
    S1,
    /// Licensed band only: every `α` is forced to 0.
    S2,
    /// Joint licensed and unlicensed slicing.
    S3,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::S1, Variant::S2, Variant::S3];
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(Variant::S1),
            "s2" => Ok(Variant::S2),
            "s3" => Ok(Variant::S3),
            other => Err(format!("unknown variant {other:?} (expected s1, s2 or s3)")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Variant::S1 => "s1",
            Variant::S2 => "s2",
            Variant::S3 => "s3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Each link's licensed allocation is bounded by the pool it can reach.
    PerLink,
    /// Additionally, all licensed allocations together are bounded by the
    /// total licensed bandwidth of the MNOs in the problem.
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("no access estimate for link {0}")]
    MissingEstimate(LinkId),
    #[error("invalid slicing problem: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub id: LinkId,
    pub owner: MnoId,
    pub rate_bps_per_hz: f64,
    /// ξ available to the link, in `[0, 1]`.
    pub access_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnoTerms {
    pub id: MnoId,
    pub licensed_bandwidth_hz: f64,
    /// η per service, in the order of [`SlicingProblem::services`].
    pub min_throughput_bps: Vec<f64>,
    /// ρ per service, in the order of [`SlicingProblem::services`].
    pub price_per_bit: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingProblem {
    pub services: Vec<ServiceId>,
    pub mnos: Vec<MnoTerms>,
    pub links: Vec<LinkSpec>,
    pub unlicensed_bandwidth_hz: f64,
    /// Support group per service, in the order of `services`.
    pub ssg: Vec<BTreeSet<MnoId>>,
    pub variant: Variant,
    pub budget_mode: BudgetMode,
}

/// Build the problem for `variant` from a scenario and per-link ξ.
pub fn build_problem(
    scenario: &Scenario,
    access: &BTreeMap<LinkId, f64>,
    variant: Variant,
) -> Result<SlicingProblem, ProblemError> {
    let services = scenario.service_ids();
    let mnos = scenario
        .mnos
        .iter()
        .map(|m| {
            let (eta, rho): (Vec<f64>, Vec<f64>) = services
                .iter()
                .map(|&s| scenario.service_terms(m.id, s).expect("validated service"))
                .unzip();
            MnoTerms {
                id: m.id,
                licensed_bandwidth_hz: m.licensed_bandwidth_hz,
                min_throughput_bps: eta,
                price_per_bit: rho,
            }
        })
        .collect();
    let links = scenario
        .links
        .iter()
        .map(|l| {
            let xi = *access.get(&l.id).ok_or(ProblemError::MissingEstimate(l.id))?;
            Ok(LinkSpec {
                id: l.id,
                owner: l.owner,
                rate_bps_per_hz: l.rate_bps_per_hz,
                access_budget: xi,
            })
        })
        .collect::<Result<Vec<_>, ProblemError>>()?;
    let ssg = services
        .iter()
        .map(|s| scenario.band_plan.ssg[s].clone())
        .collect();
    let p = SlicingProblem {
        services,
        mnos,
        links,
        unlicensed_bandwidth_hz: scenario.band_plan.unlicensed_bandwidth_hz,
        ssg,
        variant,
        budget_mode: BudgetMode::PerLink,
    };
    p.validate()?;
    Ok(p)
}

impl SlicingProblem {
    pub fn n_services(&self) -> usize {
        self.services.len()
    }

    pub fn n_vars(&self) -> usize {
        2 * self.links.len() * self.n_services()
    }

    pub fn mno(&self, id: MnoId) -> Option<&MnoTerms> {
        self.mnos.iter().find(|m| m.id == id)
    }

    /// (η, ρ) of link `k` for service position `l`.
    pub fn terms(&self, k: usize, l: usize) -> (f64, f64) {
        let m = self.mno(self.links[k].owner).expect("validated owner");
        (m.min_throughput_bps[l], m.price_per_bit[l])
    }

    /// Licensed bandwidth pooled by the support group of service position `l`.
    pub fn pool_hz(&self, l: usize) -> f64 {
        self.mnos
            .iter()
            .filter(|m| self.ssg[l].contains(&m.id))
            .map(|m| m.licensed_bandwidth_hz)
            .sum()
    }

    /// Licensed budget of link `k`: the smallest, over services, of the pool
    /// the owner reaches for that service (its own band when it is outside
    /// the support group). Zero under S1.
    pub fn link_budget_hz(&self, k: usize) -> f64 {
        if self.variant == Variant::S1 {
            return 0.0;
        }
        let owner = self.links[k].owner;
        let own = self.mno(owner).expect("validated owner").licensed_bandwidth_hz;
        (0..self.n_services())
            .map(|l| if self.ssg[l].contains(&owner) { self.pool_hz(l) } else { own })
            .fold(f64::INFINITY, f64::min)
    }

    /// Access budget ξ of link `k`; zero under S2.
    pub fn access_budget(&self, k: usize) -> f64 {
        if self.variant == Variant::S2 {
            0.0
        } else {
            self.links[k].access_budget
        }
    }

    /// Total licensed bandwidth of the MNOs in the problem (aggregate mode).
    pub fn aggregate_hz(&self) -> Option<f64> {
        match (self.budget_mode, self.variant) {
            (BudgetMode::PerLink, _) => None,
            (BudgetMode::Aggregate, Variant::S1) => Some(0.0),
            (BudgetMode::Aggregate, _) => {
                Some(self.mnos.iter().map(|m| m.licensed_bandwidth_hz).sum())
            }
        }
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        SlicingProblem {
            variant,
            ..self.clone()
        }
    }

    /// Problem seen by `coalition`: its MNOs, their links, and support
    /// groups cut down to the coalition.
    pub fn restrict_to(&self, coalition: &BTreeSet<MnoId>) -> Self {
        SlicingProblem {
            services: self.services.clone(),
            mnos: self
                .mnos
                .iter()
                .filter(|m| coalition.contains(&m.id))
                .cloned()
                .collect(),
            links: self
                .links
                .iter()
                .filter(|l| coalition.contains(&l.owner))
                .cloned()
                .collect(),
            unlicensed_bandwidth_hz: self.unlicensed_bandwidth_hz,
            ssg: self
                .ssg
                .iter()
                .map(|g| g.intersection(coalition).copied().collect())
                .collect(),
            variant: self.variant,
            budget_mode: self.budget_mode,
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let bad = |s: String| Err(ProblemError::Invalid(s));
        let y = self.n_services();
        if y == 0 {
            return bad("no services".into());
        }
        if self.ssg.len() != y {
            return bad(format!("{} support groups for {y} services", self.ssg.len()));
        }
        if !(self.unlicensed_bandwidth_hz >= 0.0 && self.unlicensed_bandwidth_hz.is_finite()) {
            return bad(format!("unlicensed bandwidth {}", self.unlicensed_bandwidth_hz));
        }
        let mut ids = BTreeSet::new();
        for m in &self.mnos {
            if !ids.insert(m.id) {
                return bad(format!("duplicate mno {}", m.id));
            }
            if !(m.licensed_bandwidth_hz >= 0.0 && m.licensed_bandwidth_hz.is_finite()) {
                return bad(format!("mno {} licensed bandwidth {}", m.id, m.licensed_bandwidth_hz));
            }
            if m.min_throughput_bps.len() != y || m.price_per_bit.len() != y {
                return bad(format!("mno {} has terms for a different service count", m.id));
            }
            if m.min_throughput_bps.iter().any(|&e| !(e >= 0.0 && e.is_finite()))
                || m.price_per_bit.iter().any(|&r| !(r >= 0.0 && r.is_finite()))
            {
                return bad(format!("mno {} has negative or non-finite η or ρ", m.id));
            }
        }
        let mut link_ids = BTreeSet::new();
        for l in &self.links {
            if !link_ids.insert(l.id) {
                return bad(format!("duplicate link {}", l.id));
            }
            if !ids.contains(&l.owner) {
                return bad(format!("link {} owned by unknown mno {}", l.id, l.owner));
            }
            if !(l.rate_bps_per_hz > 0.0 && l.rate_bps_per_hz.is_finite()) {
                return bad(format!("link {} rate {}", l.id, l.rate_bps_per_hz));
            }
            if !(0.0..=1.0).contains(&l.access_budget) {
                return bad(format!("link {} access budget {} outside [0, 1]", l.id, l.access_budget));
            }
        }
        Ok(())
    }

    pub fn normalized(&self) -> Normalized {
        Normalized::new(self)
    }
}

/// Problem data in solver units. Index `k * n_services + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub n_links: usize,
    pub n_services: usize,
    /// Hz per bandwidth unit.
    pub bw_ref: f64,
    /// Currency per second per objective unit.
    pub obj_scale: f64,
    /// Unlicensed bandwidth in units of `bw_ref`.
    pub beta: f64,
    /// Objective coefficient of `u` (that of `α` is `beta · c`).
    pub c: Vec<f64>,
    /// Throughput threshold `η / (R · bw_ref)`.
    pub h: Vec<f64>,
    pub xi: Vec<f64>,
    pub budget: Vec<f64>,
    pub aggregate: Option<f64>,
}

impl Normalized {
    pub fn new(p: &SlicingProblem) -> Self {
        let y = p.n_services();
        let n_links = p.links.len();
        let max_b = p
            .mnos
            .iter()
            .map(|m| m.licensed_bandwidth_hz)
            .fold(0.0, f64::max);
        let bw_ref = if p.unlicensed_bandwidth_hz > 0.0 {
            p.unlicensed_bandwidth_hz
        } else if max_b > 0.0 {
            max_b
        } else {
            1.0
        };
        let mut raw_c = Vec::with_capacity(n_links * y);
        let mut h = Vec::with_capacity(n_links * y);
        for k in 0..n_links {
            let r = p.links[k].rate_bps_per_hz;
            for l in 0..y {
                let (eta, rho) = p.terms(k, l);
                raw_c.push(rho * r * bw_ref);
                h.push(eta / (r * bw_ref));
            }
        }
        let max_c = raw_c.iter().copied().fold(0.0, f64::max);
        let obj_scale = if max_c > 0.0 { max_c } else { 1.0 };
        Normalized {
            n_links,
            n_services: y,
            bw_ref,
            obj_scale,
            beta: p.unlicensed_bandwidth_hz / bw_ref,
            c: raw_c.iter().map(|c| c / obj_scale).collect(),
            h,
            xi: (0..n_links).map(|k| p.access_budget(k)).collect(),
            budget: (0..n_links).map(|k| p.link_budget_hz(k) / bw_ref).collect(),
            aggregate: p.aggregate_hz().map(|a| a / bw_ref),
        }
    }

    pub fn len(&self) -> usize {
        self.n_links * self.n_services
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Objective in currency per second.
    pub fn objective(&self, alpha: &[f64], u: &[f64]) -> f64 {
        self.obj_scale
            * (0..self.len())
                .map(|i| self.c[i] * (u[i] + self.beta * alpha[i]))
                .sum::<f64>()
    }

    /// Largest throughput shortfall `h − u − βα` (0 when all are met).
    pub fn throughput_violation(&self, alpha: &[f64], u: &[f64]) -> f64 {
        (0..self.len())
            .map(|i| self.h[i] - u[i] - self.beta * alpha[i])
            .fold(0.0, f64::max)
    }

    /// Largest violation of any constraint, in normalized units.
    pub fn max_violation(&self, alpha: &[f64], u: &[f64]) -> f64 {
        let y = self.n_services;
        let mut v = self.throughput_violation(alpha, u);
        let mut total_u = 0.0;
        for k in 0..self.n_links {
            let a = &alpha[k * y..(k + 1) * y];
            let w = &u[k * y..(k + 1) * y];
            v = v.max((a.iter().sum::<f64>() - self.xi[k]).abs());
            for &x in a {
                v = v.max(-x).max(x - 1.0);
            }
            for &x in w {
                v = v.max(-x);
            }
            let s: f64 = w.iter().sum();
            total_u += s;
            v = v.max(s - self.budget[k]);
        }
        if let Some(a) = self.aggregate {
            v = v.max(total_u - a);
        }
        v.max(0.0)
    }

    /// Smallest licensed allocation link `k` needs to meet every threshold.
    pub fn min_licensed_need(&self, k: usize) -> f64 {
        let y = self.n_services;
        let h = &self.h[k * y..(k + 1) * y];
        let total: f64 = h.iter().sum();
        if self.beta <= 0.0 {
            return total;
        }
        let useful: f64 = h.iter().map(|&x| (x / self.beta).min(1.0)).sum();
        (total - self.beta * self.xi[k].min(useful)).max(0.0)
    }

    /// Exact feasibility test; `Err` names the first failing constraint.
    pub fn feasibility(&self, tol: f64) -> Result<(), Infeasibility> {
        let mut need = 0.0;
        for k in 0..self.n_links {
            let n = self.min_licensed_need(k);
            if n > self.budget[k] + tol {
                return Err(Infeasibility::Throughput {
                    link_index: k,
                    need: n,
                    budget: self.budget[k],
                });
            }
            need += n;
        }
        if let Some(a) = self.aggregate {
            if need > a + tol {
                return Err(Infeasibility::Aggregate { need, budget: a });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    Throughput {
        link_index: usize,
        need: f64,
        budget: f64,
    },
    Aggregate {
        need: f64,
        budget: f64,
    },
}
