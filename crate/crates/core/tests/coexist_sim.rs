use slicenet_core::coexist::{
    build_sense_matrix, closed_form_occupancy, run_coexistence, simulate, BackoffPolicy,
    SenseMatrix, SimConfig, TrafficModel,
};
use slicenet_core::mboe::{maximum_independent_sets, ContentionGraph, Vertex};
use slicenet_core::scenario::{radio, NodeKind, Scenario};
use std::collections::BTreeSet;

fn laa() -> slicenet_core::scenario::ContentionParams {
    NodeKind::LaaBs.default_contention()
}

fn wifi() -> slicenet_core::scenario::ContentionParams {
    NodeKind::WifiAp.default_contention()
}

fn cfg(duration_s: f64, seed: u64) -> SimConfig {
    SimConfig {
        duration_s,
        seed,
        ..SimConfig::default()
    }
}

#[test]
fn isolated_link_matches_renewal_closed_form() {
    let c = cfg(5.0, 3);
    let r = simulate(&[laa()], &SenseMatrix::empty(1), &c).unwrap();
    let expected = closed_form_occupancy(&laa(), c.slot_time_s, BackoffPolicy::Uniform);
    // Hand evaluation: 2 ms / (2 ms + 25 us + 5 * 9 us).
    assert!((expected - 2e-3 / (2e-3 + 25e-6 + 45e-6)).abs() < 1e-12);
    assert!((r.nodes[0].occupancy - expected).abs() < 0.02);
    assert!((r.nodes[0].access_probability - 1.0).abs() < 0.02);
}

#[test]
fn isolated_wifi_and_exponential_backoff_match_closed_form() {
    for policy in [BackoffPolicy::Uniform, BackoffPolicy::BinaryExponential] {
        let c = SimConfig {
            backoff: policy,
            ..cfg(5.0, 11)
        };
        let r = simulate(&[wifi()], &SenseMatrix::empty(1), &c).unwrap();
        let expected = closed_form_occupancy(&wifi(), c.slot_time_s, policy);
        assert!((r.nodes[0].occupancy - expected).abs() < 0.02, "{policy:?}");
    }
}

#[test]
fn symmetric_laa_pair_splits_equally() {
    let r = simulate(&[laa(), laa()], &SenseMatrix::from_edges(2, &[(0, 1)]), &cfg(10.0, 5)).unwrap();
    let (a, b) = (r.nodes[0].access_probability, r.nodes[1].access_probability);
    assert!((a - b).abs() < 0.05, "{a} vs {b}");
    assert!(a + b <= 1.0 + 1e-9);
}

#[test]
fn laa_beats_wifi_when_sharing() {
    for seed in 0..5 {
        let r = simulate(&[laa(), wifi()], &SenseMatrix::from_edges(2, &[(0, 1)]), &cfg(2.0, seed)).unwrap();
        assert!(r.nodes[0].access_probability > r.nodes[1].access_probability);
    }
}

#[test]
fn identical_seed_gives_identical_report() {
    let sense = SenseMatrix::from_edges(3, &[(0, 1), (1, 2)]);
    let c = SimConfig {
        track_configurations: true,
        ..cfg(1.0, 42)
    };
    let a = simulate(&[laa(), wifi(), laa()], &sense, &c).unwrap();
    let b = simulate(&[laa(), wifi(), laa()], &sense, &c).unwrap();
    assert_eq!(a, b);
    let d = simulate(&[laa(), wifi(), laa()], &sense, &SimConfig { seed: 43, ..c }).unwrap();
    assert_ne!(a, d);
}

#[test]
fn slot_not_shorter_than_difs_is_rejected() {
    let c = SimConfig {
        slot_time_s: 30e-6,
        ..cfg(1.0, 1)
    };
    assert!(simulate(&[laa()], &SenseMatrix::empty(1), &c).is_err());
    assert!(simulate(&[laa()], &SenseMatrix::empty(1), &SimConfig { duration_s: 0.0, ..cfg(1.0, 1) }).is_err());
}

#[test]
fn clique_airtime_is_conserved_and_neighbours_never_overlap() {
    let sense = SenseMatrix::from_edges(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]);
    let c = SimConfig {
        track_configurations: true,
        ..cfg(3.0, 9)
    };
    let r = simulate(&[laa(), wifi(), laa(), wifi()], &sense, &c).unwrap();
    let clique_air: f64 = (0..3).map(|i| r.nodes[i].airtime_held_s).sum();
    assert!(clique_air <= r.duration_s + 1e-9);
    for s in &r.nodes {
        assert!(s.airtime_held_s <= r.duration_s);
        assert!((0.0..=1.0).contains(&s.access_probability));
    }
    // Overlapping transmissions of neighbours only happen as same-instant
    // collisions, which score no airtime; their time share stays tiny.
    let configs = r.configurations.unwrap();
    let overlap: f64 = configs
        .iter()
        .filter(|(&m, _)| {
            (0..4).any(|a| (0..4).any(|b| a != b && sense.senses(a, b) && m >> a & 1 == 1 && m >> b & 1 == 1))
        })
        .map(|(_, f)| f)
        .sum();
    let collided: u64 = r.nodes.iter().map(|s| s.collided_count).sum();
    let total_txop: u64 = r.nodes.iter().map(|s| s.txop_count).sum();
    assert!(overlap <= collided as f64 / total_txop.max(1) as f64 * 2.0 + 1e-9);
    let total: f64 = configs.values().sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn adding_a_contender_does_not_raise_incumbent_access() {
    let c = cfg(5.0, 21);
    let mut prev = vec![1.0];
    for n in 2..=4 {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let r = simulate(&vec![laa(); n], &SenseMatrix::from_edges(n, &edges), &c).unwrap();
        for (i, p) in prev.iter().enumerate() {
            assert!(r.nodes[i].access_probability <= p + 0.02, "n={n} node {i}");
        }
        prev = r.nodes.iter().map(|s| s.access_probability).collect();
    }
}

fn mis_time_dominates(n: usize, edges: &[(usize, usize)], labels: &[NodeKind]) {
    let sense = SenseMatrix::from_edges(n, edges);
    let params: Vec<_> = labels.iter().map(|k| k.default_contention()).collect();
    let c = SimConfig {
        track_configurations: true,
        ..cfg(5.0, 77)
    };
    let r = simulate(&params, &sense, &c).unwrap();
    let vertices: Vec<Vertex> = (0..n)
        .map(|i| Vertex {
            id: i as u32,
            kind: labels[i],
            owner: None,
        })
        .collect();
    let ids: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (a as u32, b as u32)).collect();
    let g = ContentionGraph::new(vertices, &ids, BTreeSet::new()).unwrap();
    let mis: Vec<u64> = maximum_independent_sets(&g, 20)
        .unwrap()
        .iter()
        .map(|s| s.0.iter().fold(0u64, |m, &v| m | 1 << v))
        .collect();
    let configs = r.configurations.unwrap();
    let mis_time: f64 = configs.iter().filter(|(m, _)| mis.contains(m)).map(|(_, f)| f).sum();
    let best_other = configs
        .iter()
        .filter(|(m, _)| !mis.contains(m))
        .map(|(_, &f)| f)
        .fold(0.0, f64::max);
    assert!(mis_time > best_other, "mis {mis_time} vs {best_other}");
}

#[test]
fn star_and_chain_spend_most_time_in_maximum_independent_sets() {
    use NodeKind::*;
    mis_time_dominates(4, &[(0, 1), (0, 2), (0, 3)], &[LaaBs; 4]);
    mis_time_dominates(4, &[(0, 1), (0, 2), (0, 3)], &[LaaBs, WifiAp, WifiAp, LaaBs]);
    mis_time_dominates(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], &[LaaBs; 5]);
    mis_time_dominates(3, &[(0, 1), (1, 2)], &[WifiAp, LaaBs, WifiAp]);
}

#[test]
fn poisson_arrivals_accumulate_delays() {
    let c = SimConfig {
        traffic: TrafficModel::Poisson { frames_per_s: 100.0 },
        ..cfg(5.0, 8)
    };
    let r = simulate(&[laa(), wifi()], &SenseMatrix::from_edges(2, &[(0, 1)]), &c).unwrap();
    for s in &r.nodes {
        // Light load: about 100 frames/s served, each holding one TXOP.
        assert!(s.frames_served > 400 && s.frames_served < 600, "{}", s.frames_served);
        assert!(s.queueing_delay_s > 0.0);
        assert!(s.contention_time_s > 0.0);
    }
}

const TWO_NODE: &str = r#"
[band_plan]
unlicensed_bandwidth_hz = 20e6
carrier_frequency_ghz = 1.0

[[services]]
id = 1
min_throughput_bps = 1e6
price_per_bit = 1.0

[[mnos]]
id = 1
licensed_bandwidth_hz = 10e6

[[nodes]]
id = 1
kind = "laa_bs"
owner = 1
x_m = 0.0
y_m = 0.0

[[nodes]]
id = 2
kind = "wifi_ap"
x_m = DIST
y_m = 0.0

[[links]]
id = 1
owner = 1
node = 1
rx_x_m = 5.0
rx_y_m = 0.0

[[links]]
id = 2
owner = 1
node = 1
rx_x_m = 0.0
rx_y_m = 5.0
"#;

#[test]
fn sense_matrix_uses_inclusive_threshold() {
    // Received power equals the CCA threshold exactly when
    // 43.3·log10(d) + 11.5 = 23 + 62 at f_c = 1 GHz.
    let d = 10f64.powf((23.0 + 62.0 - 11.5) / 43.3);
    let rx = radio::received_power_dbm(23.0, d, 1.0);
    assert!((rx + 62.0).abs() < 1e-9);
    // Nudge inside so rounding never flips the boundary case.
    let s = Scenario::from_toml_str(&TWO_NODE.replace("DIST", &format!("{:.12}", d * (1.0 - 1e-12)))).unwrap();
    let (_, m) = build_sense_matrix(&s);
    assert!(m.senses(0, 1) && m.senses(1, 0));
    let far = Scenario::from_toml_str(&TWO_NODE.replace("DIST", "10000.0")).unwrap();
    let (ids, m) = build_sense_matrix(&far);
    assert_eq!(ids, vec![1, 2]);
    assert_eq!(m.edge_count(), 0);
}

#[test]
fn run_coexistence_splits_node_access_among_links() {
    let s = Scenario::from_toml_str(&TWO_NODE.replace("DIST", "10000.0")).unwrap();
    let r = run_coexistence(&s, &cfg(2.0, 4)).unwrap();
    assert_eq!(r.links.len(), 2);
    let node_xi = r.nodes[0].stats.access_probability;
    for l in &r.links {
        assert!((l.access_probability - node_xi / 2.0).abs() < 1e-12);
        assert!(l.airtime_held_s <= r.duration_s);
    }
}
