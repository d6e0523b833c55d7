//! Acceptance checks. Each test prints one `criterion N ...: PASS|FAIL` line
//! straight to stdout (bypassing the harness capture) and then asserts.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slicenet::pipeline::{build_table, problem_for};
use slicenet_core::admm::{
    alpha_subproblem, random_problem, solve_admm, solve_lp_oracle, solve_subgradient, w_subproblem,
    z_projection, AdmmSettings, RandomProblemSpec, SlicingProblem, SolveError, SubgradientSettings, Variant,
};
use slicenet_core::coexist::{closed_form_occupancy, measure_table, simulate, BackoffPolicy, SenseMatrix, SimConfig};
use slicenet_core::game::{all_coalition_triples, check_core, convexity_probe, default_division, DivisionRule};
use slicenet_core::mboe::canon::{enumerate_connected, LabeledGraph};
use slicenet_core::mboe::{
    estimate_access, independence_number_of, maximum_independent_sets, ContentionGraph, EstimateOptions, Vertex,
};
use slicenet_core::{NodeKind, Scenario};

fn verdict(n: u32, name: &str, ok: bool, detail: &str) {
    let line = format!("criterion {n} ({name}): {} {detail}\n", if ok { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn instance_spec() -> RandomProblemSpec {
    RandomProblemSpec {
        max_mnos: 4,
        min_services: 2,
        max_services: 3,
        max_links: 10,
        ..RandomProblemSpec::default()
    }
}

/// The first `count` seeds whose instance is feasible under S3.
fn feasible_instances(spec: &RandomProblemSpec, count: usize) -> Vec<(u64, SlicingProblem, f64)> {
    let mut out = Vec::new();
    let mut seed = 0;
    while out.len() < count {
        let p = random_problem(seed, spec);
        if let Ok(lp) = solve_lp_oracle(&p) {
            out.push((seed, p, lp.objective));
        }
        seed += 1;
    }
    out
}

#[test]
fn criterion_1_admm_matches_the_lp_oracle() {
    let mut worst_gap: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let mut failures = Vec::new();
    for (seed, p, lp) in feasible_instances(&instance_spec(), 50) {
        let start = Instant::now();
        let out = solve_admm(&p, &AdmmSettings::default()).unwrap();
        let t = start.elapsed().as_secs_f64();
        let gap = rel(out.solution.objective, lp);
        worst_gap = worst_gap.max(gap);
        slowest = slowest.max(t);
        if gap > 1e-4 || t >= 5.0 {
            failures.push(seed);
        }
    }
    verdict(
        1,
        "ADMM vs LP oracle, 50 instances",
        failures.is_empty(),
        &format!("worst relative gap {worst_gap:.2e}, slowest {slowest:.3} s, failing seeds {failures:?}"),
    );
    assert!(failures.is_empty());
}

/// `(admm, subgradient)` iterations to a 1e-2 gap; `None` never got there.
fn iteration_pair(p: &SlicingProblem, lp: f64) -> (Option<usize>, Option<usize>) {
    let admm = solve_admm(p, &AdmmSettings::default()).unwrap();
    let sub = solve_subgradient(p, &SubgradientSettings::default()).unwrap();
    (admm.trace.iterations_to_gap(lp, 1e-2), sub.trace.iterations_to_gap(lp, 1e-2))
}

fn admm_wins(pair: (Option<usize>, Option<usize>)) -> bool {
    match pair {
        (Some(a), Some(s)) => a < s,
        (Some(_), None) => true,
        _ => false,
    }
}

#[test]
fn criterion_2_admm_needs_fewer_iterations_than_subgradient() {
    let instances = feasible_instances(&instance_spec(), 50);
    let wins = instances.iter().filter(|(_, p, lp)| admm_wins(iteration_pair(p, *lp))).count();
    let share = wins as f64 / instances.len() as f64;
    // Single-service instances are often ties at iteration 1: the first
    // subgradient vertex is already optimal. Reported, not scored.
    let single = feasible_instances(&RandomProblemSpec::default(), 50);
    let single_wins = single.iter().filter(|(_, p, lp)| admm_wins(iteration_pair(p, *lp))).count();
    verdict(
        2,
        "iterations to 1e-2 gap, ADMM < subgradient",
        share >= 0.9,
        &format!(
            "{wins}/{} instances ({:.0}%); with single-service instances allowed {single_wins}/{}",
            instances.len(),
            share * 100.0,
            single.len()
        ),
    );
    assert!(share >= 0.9);
}

fn lp_objective(p: &SlicingProblem) -> Option<f64> {
    match solve_lp_oracle(p) {
        Ok(s) => Some(s.objective),
        Err(SolveError::Infeasible { .. }) => None,
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn criterion_3_joint_slicing_dominates() {
    let mut compared = 0;
    let mut violations = Vec::new();
    for seed in 0..200 {
        let p = random_problem(seed, &RandomProblemSpec::default());
        let objs: Vec<Option<f64>> = Variant::ALL.iter().map(|&v| lp_objective(&p.with_variant(v))).collect();
        if let [Some(s1), Some(s2), Some(s3)] = objs[..] {
            compared += 1;
            if s3 < s1.max(s2) * (1.0 - 1e-9) {
                violations.push(seed);
            }
        }
    }

    let scenario = Scenario::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/symmetric_pair.toml")).unwrap();
    let table = build_table(2, &SimConfig::default()).unwrap();
    let preset: Vec<f64> = Variant::ALL
        .iter()
        .map(|&v| lp_objective(&problem_for(&scenario, &table, v).unwrap()).unwrap_or(0.0))
        .collect();
    let (s1, s2, s3) = (preset[0], preset[1], preset[2]);
    let preset_ok = s3 >= 1.5 * s1 && s3 >= 1.5 * s2;
    let ok = compared > 0 && violations.is_empty() && preset_ok;
    verdict(
        3,
        "S3 >= max(S1, S2); symmetric preset S3 >= 1.5x",
        ok,
        &format!(
            "{compared} all-feasible instances, violations {violations:?}; preset S1 {s1:.3} S2 {s2:.3} S3 {s3:.3} (ratios {:.2}, {:.2})",
            s3 / s1,
            s3 / s2
        ),
    );
    assert!(ok);
}

fn pair(a: NodeKind, b: NodeKind, seed: u64) -> (f64, f64) {
    let cfg = SimConfig { seed, ..SimConfig::default() };
    let r = simulate(&[a.default_contention(), b.default_contention()], &SenseMatrix::from_edges(2, &[(0, 1)]), &cfg).unwrap();
    (r.nodes[0].access_probability, r.nodes[1].access_probability)
}

#[test]
fn criterion_4_simulator_sanity() {
    let mut isolated_worst: f64 = 0.0;
    let mut split_worst: f64 = 0.0;
    let mut laa_wins = 0;
    for seed in 0..20u64 {
        for kind in [NodeKind::LaaBs, NodeKind::WifiAp] {
            let cfg = SimConfig { seed, ..SimConfig::default() };
            let c = kind.default_contention();
            let r = simulate(&[c.clone()], &SenseMatrix::empty(1), &cfg).unwrap();
            let expected = closed_form_occupancy(&c, cfg.slot_time_s, BackoffPolicy::Uniform);
            isolated_worst = isolated_worst
                .max((r.nodes[0].occupancy - expected).abs())
                .max((r.nodes[0].access_probability - 1.0).abs());
        }
        let (a, b) = pair(NodeKind::LaaBs, NodeKind::LaaBs, seed);
        let half = (a + b) / 2.0;
        split_worst = split_worst.max((a - half).abs()).max((b - half).abs());
        let (laa, wifi) = pair(NodeKind::LaaBs, NodeKind::WifiAp, seed);
        if laa > wifi {
            laa_wins += 1;
        }
    }
    let ok = isolated_worst <= 0.02 && split_worst <= 0.05 && laa_wins == 20;
    verdict(
        4,
        "simulator sanity, 20 seeds",
        ok,
        &format!("isolated deviation {isolated_worst:.4}, pair split deviation {split_worst:.4}, LAA > Wi-Fi in {laa_wins}/20"),
    );
    assert!(ok);
}

fn contention_graph(g: &LabeledGraph) -> ContentionGraph {
    let vertices = g
        .labels
        .iter()
        .enumerate()
        .map(|(i, &kind)| Vertex {
            id: i as u32,
            kind,
            owner: (kind == NodeKind::LaaBs).then_some(1),
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..g.len() {
        for b in a + 1..g.len() {
            if g.adj[a] >> b & 1 == 1 {
                edges.push((a as u32, b as u32));
            }
        }
    }
    ContentionGraph::new(vertices, &edges, BTreeSet::from([1])).unwrap()
}

#[test]
fn criterion_5_mboe_matches_direct_simulation() {
    let family = enumerate_connected(5);
    let table = measure_table(&family, &SimConfig { seed: 1, ..SimConfig::default() }).unwrap();
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for (i, g) in family.iter().enumerate() {
        let est = estimate_access(&contention_graph(g), &table, &EstimateOptions::default()).unwrap();
        let params: Vec<_> = g.labels.iter().map(|k| k.default_contention()).collect();
        // Table seeds are mixed from seed 1; these come from a disjoint range.
        let cfg = SimConfig {
            seed: 1_000_000 + i as u64,
            ..SimConfig::default()
        };
        let direct = simulate(&params, &SenseMatrix::from_bitmasks(&g.adj), &cfg).unwrap();
        let err = (0..g.len())
            .map(|v| (est.xi(v as u32).unwrap() - direct.nodes[v].access_probability).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if err > 0.1 {
            misses += 1;
        }
    }
    verdict(
        5,
        "mBoE vs fresh 10 s simulation, all graphs <= 5 vertices",
        misses == 0,
        &format!("{misses}/{} graphs outside 0.1, worst error {worst:.3}", family.len()),
    );
    assert_eq!(misses, 0);
}

fn brute_force_alpha(g: &ContentionGraph) -> (usize, BTreeSet<Vec<u32>>) {
    let n = g.len();
    let mut best = 0;
    let mut sets = BTreeSet::new();
    for mask in 0u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if members.iter().any(|&a| members.iter().any(|&b| g.has_edge(a, b))) {
            continue;
        }
        if members.len() > best {
            best = members.len();
            sets.clear();
        }
        if members.len() == best {
            let mut ids: Vec<u32> = members.iter().map(|&i| g.vertex(i).id).collect();
            ids.sort_unstable();
            sets.insert(ids);
        }
    }
    (best, sets)
}

#[test]
fn criterion_6_mis_enumeration_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12usize);
        let p = rng.random_range(0.05..0.9);
        let vertices = (0..n as u32)
            .map(|id| {
                let laa = rng.random_bool(0.6);
                Vertex {
                    id,
                    kind: if laa { NodeKind::LaaBs } else { NodeKind::WifiAp },
                    owner: laa.then_some(1),
                }
            })
            .collect();
        let mut edges = Vec::new();
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                if rng.random_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        let g = ContentionGraph::new(vertices, &edges, BTreeSet::from([1])).unwrap();
        let (alpha, sets) = brute_force_alpha(&g);
        let found: BTreeSet<Vec<u32>> = maximum_independent_sets(&g, 20)
            .unwrap()
            .into_iter()
            .map(|s| {
                let mut ids = s.0;
                ids.sort_unstable();
                ids
            })
            .collect();
        if independence_number_of(&g, 20).unwrap() != alpha || found != sets {
            mismatches += 1;
        }
    }
    verdict(6, "MIS vs brute force, 200 graphs", mismatches == 0, &format!("{mismatches} mismatches"));
    assert_eq!(mismatches, 0);
}

#[test]
fn criterion_7_game_properties() {
    let mut outside = Vec::new();
    let mut violations = 0;
    let mut triples = 0;
    for (seed, p, _) in feasible_instances(&RandomProblemSpec::default(), 50) {
        let sol = solve_lp_oracle(&p).unwrap();
        let in_core = default_division(&p, &sol, DivisionRule::Egalitarian)
            .and_then(|a| check_core(&a, &p))
            .map(|r| r.in_core())
            .unwrap_or(false);
        if !in_core {
            outside.push(seed);
        }
        let ids: Vec<u32> = p.mnos.iter().map(|m| m.id).collect();
        let report = convexity_probe(&p, &all_coalition_triples(&ids)).unwrap();
        triples += report.triples_checked;
        violations += report.violations.len();
    }
    let ok = outside.is_empty() && violations == 0;
    verdict(
        7,
        "core membership and convexity, 50 instances",
        ok,
        &format!("outside core {outside:?}; {violations} violations over {triples} triples"),
    );
    assert!(ok);
}

const STEP: f64 = 1e-3;

/// `lo, lo + STEP, ..., hi` with `hi` itself included.
fn grid(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / STEP).floor() as usize;
    let mut g: Vec<f64> = (0..=n).map(|i| lo + i as f64 * STEP).collect();
    if hi - g[n] > 1e-12 {
        g.push(hi);
    }
    g
}

/// `−gradᵀx + (γ/2)‖x − v‖²`.
fn prox_objective(x: &[f64], v: &[f64], gamma: f64, grad: &[f64]) -> f64 {
    x.iter()
        .zip(v)
        .zip(grad)
        .map(|((x, v), g)| -g * x + gamma / 2.0 * (x - v) * (x - v))
        .sum()
}

/// Largest objective increase from moving `r` away from `x`.
fn resolution_bound(x: &[f64], v: &[f64], gamma: f64, grad: &[f64], r: f64) -> f64 {
    let slope: f64 = x
        .iter()
        .zip(v)
        .zip(grad)
        .map(|((x, v), g)| (-g + gamma * (x - v)).powi(2))
        .sum::<f64>()
        .sqrt();
    slope * r + gamma / 2.0 * r * r + 1e-12
}

/// Outcome of one grid comparison: exact solution feasible, no grid point
/// better, grid minimum within the resolution bound.
fn grid_agrees(exact_value: f64, grid_value: f64, bound: f64) -> bool {
    exact_value <= grid_value + 1e-12 && grid_value - exact_value <= bound
}

fn alpha_case(rng: &mut ChaCha8Rng) -> bool {
    let dim = rng.random_range(2..=3usize);
    let z: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..1.5)).collect();
    let lambda: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.3..0.3)).collect();
    let grad: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..2.0)).collect();
    let gamma = rng.random_range(0.5..4.0);
    let xi = rng.random_range(0.0..1.0);
    let v: Vec<f64> = z.iter().zip(&lambda).map(|(z, l)| z - l).collect();
    let exact = alpha_subproblem(&z, &lambda, gamma, xi, &grad).unwrap();
    let feasible = exact.iter().all(|&a| (-1e-12..=1.0 + 1e-12).contains(&a))
        && (exact.iter().sum::<f64>() - xi).abs() < 1e-9;
    let mut best = f64::INFINITY;
    if dim == 2 {
        for a in grid(0.0, xi) {
            best = best.min(prox_objective(&[a, xi - a], &v, gamma, &grad));
        }
    } else {
        for a in grid(0.0, xi) {
            for b in grid(0.0, xi - a) {
                best = best.min(prox_objective(&[a, b, xi - a - b], &v, gamma, &grad));
            }
        }
    }
    let value = prox_objective(&exact, &v, gamma, &grad);
    let r = 2.0 * STEP * (dim as f64).sqrt();
    feasible && grid_agrees(value, best, resolution_bound(&exact, &v, gamma, &grad, r))
}

fn w_case(rng: &mut ChaCha8Rng) -> bool {
    let z: Vec<f64> = (0..2).map(|_| rng.random_range(-0.5..1.5)).collect();
    let lambda: Vec<f64> = (0..2).map(|_| rng.random_range(-0.3..0.3)).collect();
    let grad: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..2.0)).collect();
    let gamma = rng.random_range(0.5..4.0);
    let v: Vec<f64> = z.iter().zip(&lambda).map(|(z, l)| z - l).collect();
    // Either one link with two services, or two single-service links under
    // an aggregate cap.
    let (budgets, aggregate, n_services) = if rng.random_bool(0.5) {
        (vec![rng.random_range(0.05..1.0)], None, 2)
    } else {
        let b = vec![rng.random_range(0.05..1.0), rng.random_range(0.05..1.0)];
        let agg = rng.random_range(0.05..b[0] + b[1]);
        (b, Some(agg), 1)
    };
    let exact = w_subproblem(&z, &lambda, gamma, &budgets, aggregate, &grad, n_services).unwrap();
    let inside = |u: &[f64], eps: f64| {
        let per_link = if n_services == 2 {
            u[0] + u[1] <= budgets[0] + eps
        } else {
            u[0] <= budgets[0] + eps && u[1] <= budgets[1] + eps
        };
        u.iter().all(|&x| x >= -eps) && per_link && aggregate.is_none_or(|a| u[0] + u[1] <= a + eps)
    };
    let (h0, h1) = if n_services == 2 { (budgets[0], budgets[0]) } else { (budgets[0], budgets[1]) };
    let mut best = f64::INFINITY;
    for a in grid(0.0, h0) {
        for b in grid(0.0, h1) {
            if inside(&[a, b], 0.0) {
                best = best.min(prox_objective(&[a, b], &v, gamma, &grad));
            }
        }
    }
    let value = prox_objective(&exact, &v, gamma, &grad);
    let r = 2.0 * STEP * 2f64.sqrt();
    inside(&exact, 1e-9) && grid_agrees(value, best, resolution_bound(&exact, &v, gamma, &grad, r))
}

/// One random halfspace `{u + β·a ≥ h}` and a point, as `(a, u, β, h)`,
/// with the point at most 0.5 from the set so the search box stays small.
fn halfspace_point(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    loop {
        let (a, u) = (rng.random_range(-0.5..1.0), rng.random_range(-0.5..1.0));
        let (beta, h) = (rng.random_range(0.2..2.0), rng.random_range(0.0..1.0));
        if h - beta * a - u <= 0.5 {
            return (a, u, beta, h);
        }
    }
}

fn project(a: f64, u: f64, beta: f64, h: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Split the point into X + Λ the way the solver hands it over.
    let (la, lu) = (rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
    let (za, zu) = z_projection(&[a - la], &[u - lu], &[la], &[lu], &[h], beta);
    (za[0], zu[0])
}

fn z_case(rng: &mut ChaCha8Rng) -> (bool, usize, usize) {
    let (a, u, beta, h) = halfspace_point(rng);
    let (pa, pu) = project(a, u, beta, h, rng);
    let dist2 = |x: f64, y: f64| (x - a).powi(2) + (y - u).powi(2);
    // The vertical move onto the boundary is feasible, so the projection
    // lies within that distance of the point.
    let radius = (h - beta * a - u).max(0.0) + 2.0 * STEP;
    let mut best = f64::INFINITY;
    let n = (radius / STEP).ceil() as i64;
    for i in -n..=n {
        for j in -n..=n {
            let (x, y) = (a + i as f64 * STEP, u + j as f64 * STEP);
            if y + beta * x >= h {
                best = best.min(dist2(x, y));
            }
        }
    }
    let value = dist2(pa, pu);
    let d = value.sqrt();
    let r = STEP * 2f64.sqrt();
    let bound = 2.0 * d * r + r * r + 1e-12;
    let feasible = pu + beta * pa >= h - 1e-12;
    let grid_ok = feasible && value <= best + 1e-12 && best - value <= bound;

    // Idempotence and non-expansiveness against fresh points on the same
    // halfspace.
    let (qa, qu) = project(pa, pu, beta, h, rng);
    let idempotent = (qa - pa).abs() <= 1e-12 && (qu - pu).abs() <= 1e-12;
    let points: Vec<(f64, f64)> = (0..8).map(|_| (rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0))).collect();
    let images: Vec<(f64, f64)> = points.iter().map(|&(x, y)| project(x, y, beta, h, rng)).collect();
    let mut pairs = 0;
    let mut expansive = 0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            pairs += 1;
            let before = ((points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2)).sqrt();
            let after = ((images[i].0 - images[j].0).powi(2) + (images[i].1 - images[j].1).powi(2)).sqrt();
            if after > before + 1e-12 {
                expansive += 1;
            }
        }
    }
    (grid_ok && idempotent, pairs, expansive)
}

#[test]
fn criterion_8_subproblems_match_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let alpha_bad = (0..100).filter(|_| !alpha_case(&mut rng)).count();
    let w_bad = (0..100).filter(|_| !w_case(&mut rng)).count();
    let mut z_bad = 0;
    let mut pairs = 0;
    let mut expansive = 0;
    for _ in 0..100 {
        let (ok, p, e) = z_case(&mut rng);
        z_bad += usize::from(!ok);
        pairs += p;
        expansive += e;
    }
    let ok = alpha_bad + w_bad + z_bad + expansive == 0;
    verdict(
        8,
        "subproblems vs 1e-3 grid, 100 cases each",
        ok,
        &format!("mismatches alpha {alpha_bad}, w {w_bad}, z {z_bad}; expansive pairs {expansive}/{pairs}"),
    );
    assert!(ok);
}
