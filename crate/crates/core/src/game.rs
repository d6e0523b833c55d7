//! Slicing agreements as a transferable-utility coalition game.
//!
//! A slice per service pools licensed bandwidth from its support group and
//! access shares from the members' links. Its worth is the utility the
//! members' links earn in it. An agreement pairs the slices with a division
//! of each slice's worth among the MNOs.
//!
//! The core test is the aggregate one: an efficient agreement is in the
//! core when its total welfare reaches the grand-coalition optimum and
//! every MNO receives at least what it earns alone. Deviations are not
//! enumerated; structures of a deviating subset range over a continuum.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::admm::{solve_lp_oracle, SlicingProblem, SlicingSolution, SolveError};
use crate::scenario::{LinkId, MnoId, ServiceId};

/// Relative tolerance of welfare and rationality comparisons.
pub const CORE_TOL: f64 = 1e-6;
/// Relative tolerance of the per-slice efficiency check.
pub const EFFICIENCY_TOL: f64 = 1e-9;
/// Constraint tolerance, normalized units, when checking an agreement.
pub const AGREEMENT_TOL: f64 = 1e-6;
/// Largest MNO count the convexity probe enumerates.
pub const MAX_PROBE_MNOS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("agreement violates the problem constraints by {violation:.3e}")]
    InfeasibleAgreement { violation: f64 },
    #[error("agreement does not match the problem: {0}")]
    Mismatch(String),
    #[error("grand-coalition welfare falls short of the standalone values by {deficit:.6e}")]
    NegativeSurplus { deficit: f64 },
    #[error("convexity probe supports at most {max} MNOs, got {got}")]
    TooManyMnos { got: usize, max: usize },
}

/// Resources one link puts into a slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkShare {
    pub link: LinkId,
    pub licensed_hz: f64,
    pub access_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub mno: MnoId,
    /// w_i: the MNO's share of the slice's licensed bandwidth, Hz. Members
    /// of the support group contribute in proportion to their bands.
    pub licensed_hz: f64,
    pub links: Vec<LinkShare>,
}

impl Contribution {
    pub fn is_nonzero(&self) -> bool {
        self.licensed_hz > 0.0
            || self
                .links
                .iter()
                .any(|l| l.licensed_hz > 0.0 || l.access_share > 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub service: ServiceId,
    /// One entry per MNO of the problem, in problem order.
    pub contributions: Vec<Contribution>,
}

impl Slice {
    /// MNOs with a nonzero contribution.
    pub fn support(&self) -> BTreeSet<MnoId> {
        self.contributions
            .iter()
            .filter(|c| c.is_nonzero())
            .map(|c| c.mno)
            .collect()
    }
}

/// Division rule for the surplus over standalone values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisionRule {
    /// Equal shares of the surplus.
    #[default]
    Egalitarian,
    /// Surplus shares proportional to standalone values (equal when all are
    /// zero).
    Proportional,
}

impl std::str::FromStr for DivisionRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "egal" | "egalitarian" => Ok(DivisionRule::Egalitarian),
            "prop" | "proportional" => Ok(DivisionRule::Proportional),
            other => Err(format!("unknown division rule `{other}` (egal|prop)")),
        }
    }
}

/// ⟨c, x⟩: slices per service and the division of each slice's worth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlicingAgreement {
    pub slices: Vec<Slice>,
    /// x per service, keyed by MNO. Every MNO of the problem appears, so a
    /// transfer may reach an MNO outside a slice's support.
    pub allocation: Vec<BTreeMap<MnoId, f64>>,
}

impl SlicingAgreement {
    /// Structure of `solution` with an all-zero allocation.
    pub fn from_solution(problem: &SlicingProblem, solution: &SlicingSolution) -> Result<Self, GameError> {
        let y = problem.n_services();
        if solution.services != problem.services || solution.links.len() != problem.links.len() {
            return Err(GameError::Mismatch("solution and problem differ in services or links".into()));
        }
        let mut slices = Vec::with_capacity(y);
        for l in 0..y {
            let ssg = &problem.ssg[l];
            let member_bw: f64 = problem
                .mnos
                .iter()
                .filter(|m| ssg.contains(&m.id))
                .map(|m| m.licensed_bandwidth_hz)
                .sum();
            let pooled: f64 = solution
                .links
                .iter()
                .filter(|la| ssg.contains(&la.owner))
                .map(|la| la.licensed_hz[l])
                .sum();
            let contributions = problem
                .mnos
                .iter()
                .map(|m| {
                    let links: Vec<LinkShare> = solution
                        .links
                        .iter()
                        .filter(|la| la.owner == m.id)
                        .map(|la| LinkShare {
                            link: la.link,
                            licensed_hz: la.licensed_hz[l],
                            access_share: la.access_share[l],
                        })
                        .collect();
                    let licensed_hz = if ssg.contains(&m.id) {
                        if member_bw > 0.0 {
                            pooled * m.licensed_bandwidth_hz / member_bw
                        } else {
                            0.0
                        }
                    } else {
                        // Outside the support group a link only uses its own band.
                        links.iter().map(|s| s.licensed_hz).sum()
                    };
                    Contribution {
                        mno: m.id,
                        licensed_hz,
                        links,
                    }
                })
                .collect();
            slices.push(Slice {
                service: problem.services[l],
                contributions,
            });
        }
        let allocation = (0..y)
            .map(|_| problem.mnos.iter().map(|m| (m.id, 0.0)).collect())
            .collect();
        Ok(SlicingAgreement { slices, allocation })
    }

    /// Σ_l x_i^(l) per MNO.
    pub fn totals(&self) -> BTreeMap<MnoId, f64> {
        let mut out = BTreeMap::new();
        for x in &self.allocation {
            for (&i, &v) in x {
                *out.entry(i).or_insert(0.0) += v;
            }
        }
        out
    }

    /// Normalized `(α, u)` for `problem`.
    fn to_vectors(&self, problem: &SlicingProblem) -> Result<(Vec<f64>, Vec<f64>), GameError> {
        let y = problem.n_services();
        if self.slices.len() != y || self.allocation.len() != y {
            return Err(GameError::Mismatch(format!(
                "{} slices and {} allocations for {y} services",
                self.slices.len(),
                self.allocation.len()
            )));
        }
        let n = problem.normalized();
        let index: BTreeMap<LinkId, usize> =
            problem.links.iter().enumerate().map(|(k, l)| (l.id, k)).collect();
        let mut a = vec![0.0; n.len()];
        let mut u = vec![0.0; n.len()];
        let mut seen = vec![0usize; n.len()];
        for (l, slice) in self.slices.iter().enumerate() {
            if slice.service != problem.services[l] {
                return Err(GameError::Mismatch(format!(
                    "slice {l} is for service {}, expected {}",
                    slice.service, problem.services[l]
                )));
            }
            for c in &slice.contributions {
                for s in &c.links {
                    let k = *index
                        .get(&s.link)
                        .ok_or_else(|| GameError::Mismatch(format!("unknown link {}", s.link)))?;
                    if problem.links[k].owner != c.mno {
                        return Err(GameError::Mismatch(format!(
                            "link {} listed under MNO {}",
                            s.link, c.mno
                        )));
                    }
                    let i = k * y + l;
                    a[i] = s.access_share;
                    u[i] = s.licensed_hz / n.bw_ref;
                    seen[i] += 1;
                }
            }
        }
        if let Some(i) = seen.iter().position(|&c| c > 1) {
            return Err(GameError::Mismatch(format!(
                "link {} listed twice in one slice",
                problem.links[i / y].id
            )));
        }
        Ok((a, u))
    }

    /// Largest constraint violation against `problem`, normalized units.
    ///
    /// Access shares may sum to less than ξ: an agreement may leave part of
    /// its unlicensed access unused, so a structure built without the band
    /// stays valid when the band is added.
    pub fn violation(&self, problem: &SlicingProblem) -> Result<f64, GameError> {
        let (a, u) = self.to_vectors(problem)?;
        let n = problem.normalized();
        let y = n.n_services;
        let mut v = n.throughput_violation(&a, &u);
        let mut total_u = 0.0;
        for k in 0..n.n_links {
            let ak = &a[k * y..(k + 1) * y];
            let uk = &u[k * y..(k + 1) * y];
            v = v.max(ak.iter().sum::<f64>() - n.xi[k]);
            for &x in ak {
                v = v.max(-x).max(x - 1.0);
            }
            for &x in uk {
                v = v.max(-x);
            }
            let s: f64 = uk.iter().sum();
            total_u += s;
            v = v.max(s - n.budget[k]);
        }
        if let Some(agg) = n.aggregate {
            v = v.max(total_u - agg);
        }
        Ok(v.max(0.0))
    }
}

/// Value an MNO secures alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standalone {
    pub value: f64,
    /// False when the MNO alone cannot meet its minimum throughputs; the
    /// value is then 0 (nothing admitted).
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorthReport {
    /// v(c^(l)) per service, in problem order.
    pub slice_worth: Vec<(ServiceId, f64)>,
    pub total_welfare: f64,
    pub standalone: BTreeMap<MnoId, Standalone>,
}

/// Optimal welfare of `coalition` on its own: its links, its bands and the
/// ξ of the full contention graph. `None` when infeasible.
pub fn coalition_value(problem: &SlicingProblem, coalition: &BTreeSet<MnoId>) -> Result<Option<f64>, GameError> {
    let sub = problem.restrict_to(coalition);
    if sub.links.is_empty() {
        return Ok(Some(0.0));
    }
    match solve_lp_oracle(&sub) {
        Ok(s) => Ok(Some(s.objective)),
        Err(SolveError::Infeasible { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// v(c̄_i): the optimum of MNO `mno` alone.
pub fn standalone_value(problem: &SlicingProblem, mno: MnoId) -> Result<Standalone, GameError> {
    if problem.mno(mno).is_none() {
        return Err(GameError::Mismatch(format!("unknown MNO {mno}")));
    }
    Ok(match coalition_value(problem, &BTreeSet::from([mno]))? {
        Some(value) => Standalone { value, feasible: true },
        None => Standalone {
            value: 0.0,
            feasible: false,
        },
    })
}

fn standalone_all(problem: &SlicingProblem) -> Result<BTreeMap<MnoId, Standalone>, GameError> {
    problem
        .mnos
        .par_iter()
        .map(|m| standalone_value(problem, m.id).map(|s| (m.id, s)))
        .collect()
}

/// Worth of every slice: Σ over the slice's links of π + ν.
pub fn compute_worth(agreement: &SlicingAgreement, problem: &SlicingProblem) -> Result<WorthReport, GameError> {
    let violation = agreement.violation(problem)?;
    if violation > AGREEMENT_TOL {
        return Err(GameError::InfeasibleAgreement { violation });
    }
    let (a, u) = agreement.to_vectors(problem)?;
    let n = problem.normalized();
    let sol = SlicingSolution::from_normalized(problem, &n, &a, &u);
    Ok(WorthReport {
        slice_worth: sol.slices.iter().map(|s| (s.service, s.worth)).collect(),
        total_welfare: sol.objective,
        standalone: standalone_all(problem)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CoreVerdict {
    InCore,
    /// The allocation of a slice does not add up to its worth.
    NotEfficient {
        service: ServiceId,
        allocated: f64,
        worth: f64,
    },
    /// The agreement's welfare is below the grand-coalition optimum.
    WelfareGap { welfare: f64, optimum: f64 },
    /// The MNO receives less than it earns alone.
    IndividualRationality {
        mno: MnoId,
        allocated: f64,
        standalone: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreReport {
    pub verdict: CoreVerdict,
    pub welfare: f64,
    /// v*(M) of the problem's variant.
    pub optimum: f64,
    pub totals: BTreeMap<MnoId, f64>,
    pub worth: WorthReport,
}

impl CoreReport {
    pub fn in_core(&self) -> bool {
        self.verdict == CoreVerdict::InCore
    }
}

fn tol(rel: f64, scale: f64) -> f64 {
    rel * scale.abs().max(f64::MIN_POSITIVE)
}

/// Core membership of `agreement` with a certificate for failures.
pub fn check_core(agreement: &SlicingAgreement, problem: &SlicingProblem) -> Result<CoreReport, GameError> {
    let worth = compute_worth(agreement, problem)?;
    let optimum = solve_lp_oracle(problem)?.objective;
    let totals = agreement.totals();
    let report = |verdict| CoreReport {
        verdict,
        welfare: worth.total_welfare,
        optimum,
        totals: totals.clone(),
        worth: worth.clone(),
    };
    for (l, &(service, v)) in worth.slice_worth.iter().enumerate() {
        let allocated: f64 = agreement.allocation[l].values().sum();
        if (allocated - v).abs() > tol(EFFICIENCY_TOL, v).max(tol(EFFICIENCY_TOL, worth.total_welfare)) {
            return Ok(report(CoreVerdict::NotEfficient {
                service,
                allocated,
                worth: v,
            }));
        }
    }
    if worth.total_welfare < optimum - tol(CORE_TOL, optimum) {
        return Ok(report(CoreVerdict::WelfareGap {
            welfare: worth.total_welfare,
            optimum,
        }));
    }
    for (&mno, s) in &worth.standalone {
        let allocated = totals.get(&mno).copied().unwrap_or(0.0);
        if allocated < s.value - tol(CORE_TOL, optimum) {
            return Ok(report(CoreVerdict::IndividualRationality {
                mno,
                allocated,
                standalone: s.value,
            }));
        }
    }
    Ok(report(CoreVerdict::InCore))
}

/// Agreement for an optimal `solution`: each MNO receives its standalone
/// value plus a share of the surplus, spread over the slices in proportion
/// to their worth.
pub fn default_division(
    problem: &SlicingProblem,
    solution: &SlicingSolution,
    rule: DivisionRule,
) -> Result<SlicingAgreement, GameError> {
    let mut agreement = SlicingAgreement::from_solution(problem, solution)?;
    let total = solution.objective;
    let standalone = standalone_all(problem)?;
    let base: f64 = standalone.values().map(|s| s.value).sum();
    let surplus = total - base;
    if surplus < -tol(CORE_TOL, total) {
        return Err(GameError::NegativeSurplus { deficit: -surplus });
    }
    let surplus = surplus.max(0.0);
    let m = problem.mnos.len().max(1) as f64;
    let share = |s: f64| match rule {
        DivisionRule::Proportional if base > 0.0 => surplus * s / base,
        _ => surplus / m,
    };
    let totals: BTreeMap<MnoId, f64> = standalone
        .iter()
        .map(|(&i, s)| (i, s.value + share(s.value)))
        .collect();
    // Rescale so the shares add up to the welfare exactly.
    let sum: f64 = totals.values().sum();
    for (l, x) in agreement.allocation.iter_mut().enumerate() {
        let v = solution.slices[l].worth;
        for (i, xi) in x.iter_mut() {
            *xi = if sum > 0.0 { totals[i] / sum * v } else { v / m };
        }
    }
    Ok(agreement)
}

/// One probe case: N ⊊ O ⊆ M \ C with C nonempty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionTriple {
    pub c: BTreeSet<MnoId>,
    pub o: BTreeSet<MnoId>,
    pub n: BTreeSet<MnoId>,
}

fn subset(ids: &[MnoId], mask: u32) -> BTreeSet<MnoId> {
    ids.iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, &i)| i)
        .collect()
}

/// Every triple over `mnos`.
pub fn all_coalition_triples(mnos: &[MnoId]) -> Vec<CoalitionTriple> {
    let m = mnos.len() as u32;
    let full = (1u32 << m) - 1;
    let mut out = Vec::new();
    for c in 1..=full {
        let rest = full & !c;
        let mut o = rest;
        loop {
            if o != 0 {
                // Proper subsets of o, the empty set included.
                let mut n = (o - 1) & o;
                loop {
                    out.push(CoalitionTriple {
                        c: subset(mnos, c),
                        o: subset(mnos, o),
                        n: subset(mnos, n),
                    });
                    if n == 0 {
                        break;
                    }
                    n = (n - 1) & o;
                }
            }
            if o == 0 {
                break;
            }
            o = (o - 1) & rest;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// v(O ∪ C) ≥ v(O).
    JoiningC,
    /// v(O ∪ C) ≥ v(N ∪ C).
    GrowingBase,
    /// v(O ∪ C) − v(O) ≥ v(N ∪ C) − v(N).
    IncreasingMarginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityViolation {
    pub triple: CoalitionTriple,
    pub inequality: Inequality,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub triples_checked: usize,
    /// Triples touching an infeasible coalition.
    pub triples_skipped: usize,
    pub infeasible_coalitions: Vec<BTreeSet<MnoId>>,
    pub violations: Vec<ConvexityViolation>,
}

/// Check the convexity inequalities on `triples` with coalition optima from
/// the LP oracle. Each distinct coalition is solved once, in parallel.
pub fn convexity_probe(problem: &SlicingProblem, triples: &[CoalitionTriple]) -> Result<ConvexityReport, GameError> {
    if problem.mnos.len() > MAX_PROBE_MNOS {
        return Err(GameError::TooManyMnos {
            got: problem.mnos.len(),
            max: MAX_PROBE_MNOS,
        });
    }
    let mut needed: BTreeSet<BTreeSet<MnoId>> = BTreeSet::new();
    for t in triples {
        let oc: BTreeSet<MnoId> = t.o.union(&t.c).copied().collect();
        let nc: BTreeSet<MnoId> = t.n.union(&t.c).copied().collect();
        needed.extend([oc, nc, t.o.clone(), t.n.clone()]);
    }
    let needed: Vec<BTreeSet<MnoId>> = needed.into_iter().collect();
    let values: Vec<Option<f64>> = needed
        .par_iter()
        .map(|s| coalition_value(problem, s))
        .collect::<Result<_, _>>()?;
    let value: BTreeMap<&BTreeSet<MnoId>, Option<f64>> = needed.iter().zip(values).collect();
    let mut report = ConvexityReport {
        infeasible_coalitions: value
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(s, _)| (*s).clone())
            .collect(),
        ..Default::default()
    };
    for t in triples {
        let oc: BTreeSet<MnoId> = t.o.union(&t.c).copied().collect();
        let nc: BTreeSet<MnoId> = t.n.union(&t.c).copied().collect();
        let (Some(v_oc), Some(v_nc), Some(v_o), Some(v_n)) = (value[&oc], value[&nc], value[&t.o], value[&t.n]) else {
            report.triples_skipped += 1;
            continue;
        };
        report.triples_checked += 1;
        let eps = tol(CORE_TOL, v_oc);
        let checks = [
            (Inequality::JoiningC, v_oc, v_o),
            (Inequality::GrowingBase, v_oc, v_nc),
            (Inequality::IncreasingMarginal, v_oc - v_o, v_nc - v_n),
        ];
        for (inequality, lhs, rhs) in checks {
            if lhs < rhs - eps {
                report.violations.push(ConvexityViolation {
                    triple: t.clone(),
                    inequality,
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}
