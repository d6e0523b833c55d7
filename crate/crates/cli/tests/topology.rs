use slicenet::topology::{generate_topology, TopologyError, TopologyKind, TopologyParams};
use slicenet_core::mboe::ContentionGraph;
use slicenet_core::NodeKind;

fn params(sites: u32, ues: u32, cell: f64) -> TopologyParams {
    TopologyParams {
        mnos: 1,
        sites_per_mno: sites,
        ues_per_cell: ues,
        cell_size_m: cell,
        wifi_aps: 0,
        ..TopologyParams::default()
    }
}

const KINDS: [TopologyKind; 3] = [TopologyKind::Grid, TopologyKind::UniformRandom, TopologyKind::TwoMnoUrban];

fn urban() -> TopologyParams {
    TopologyParams {
        mnos: 2,
        ..TopologyParams::default()
    }
}

#[test]
fn one_site_one_user_is_one_link() {
    let s = generate_topology(TopologyKind::Grid, &params(1, 1, 100.0), 7).unwrap();
    assert_eq!(s.nodes.len(), 1);
    assert_eq!(s.links.len(), 1);
    assert_eq!(s.mnos.len(), 1);
    let d = s.nodes[0].position.distance(s.links[0].receiver);
    assert!((5.0..=50.0).contains(&d), "{d}");
}

#[test]
fn same_seed_same_scenario() {
    for kind in KINDS {
        let p = urban();
        let a = generate_topology(kind, &p, 3).unwrap();
        let b = generate_topology(kind, &p, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_toml_string(), b.to_toml_string());
        let c = generate_topology(kind, &p, 4).unwrap();
        assert_ne!(a, c);
    }
}

#[test]
fn small_cells_have_better_links() {
    for kind in KINDS {
        for seed in 0..5 {
            let mut p = urban();
            p.ues_per_cell = 6;
            let mut mean = |cell: f64| {
                p.cell_size_m = cell;
                let s = generate_topology(kind, &p, seed).unwrap();
                s.links.iter().map(|l| l.rate_bps_per_hz).sum::<f64>() / s.links.len() as f64
            };
            let (small, large) = (mean(100.0), mean(1000.0));
            assert!(small > large, "{kind:?} seed {seed}: {small} vs {large}");
        }
    }
}

#[test]
fn counts_follow_the_parameters() {
    let mut p = urban();
    p.sites_per_mno = 3;
    p.ues_per_cell = 2;
    p.wifi_aps = 2;
    let s = generate_topology(TopologyKind::TwoMnoUrban, &p, 1).unwrap();
    let bs = s.nodes.iter().filter(|n| n.kind == NodeKind::LaaBs).count();
    let ap = s.nodes.iter().filter(|n| n.kind == NodeKind::WifiAp).count();
    assert_eq!(bs, 6);
    assert_eq!(ap, 6);
    assert_eq!(s.links.len(), 12);
    for m in 1..=2 {
        assert_eq!(s.owned_nodes(m).len(), 3);
        assert_eq!(s.links_of(m).count(), 6);
    }
    let g = generate_topology(TopologyKind::Grid, &p, 1).unwrap();
    assert_eq!(g.nodes.iter().filter(|n| n.kind == NodeKind::WifiAp).count(), 2);
}

#[test]
fn grid_sites_sit_one_pitch_apart() {
    let p = params(4, 1, 300.0);
    let s = generate_topology(TopologyKind::Grid, &p, 1).unwrap();
    let pos: Vec<_> = s.nodes.iter().map(|n| n.position).collect();
    let mut nearest: Vec<f64> = pos
        .iter()
        .map(|a| {
            pos.iter()
                .map(|b| a.distance(*b))
                .filter(|&d| d > 0.0)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nearest.dedup();
    assert_eq!(nearest, vec![300.0]);
}

#[test]
fn urban_operators_contend_at_shared_sites() {
    let s = generate_topology(TopologyKind::TwoMnoUrban, &urban(), 2).unwrap();
    let g = ContentionGraph::from_scenario(&s);
    let cross = g.edges().iter().any(|&(a, b)| {
        let (na, nb) = (s.node(a).unwrap(), s.node(b).unwrap());
        na.kind == NodeKind::LaaBs && nb.kind == NodeKind::LaaBs && na.owner != nb.owner
    });
    assert!(cross);
}

#[test]
fn invalid_parameters_are_rejected() {
    let bad = |kind, p: TopologyParams| matches!(generate_topology(kind, &p, 1), Err(TopologyError::Invalid(_)));
    assert!(bad(TopologyKind::Grid, params(1, 1, 50.0)));
    assert!(bad(TopologyKind::Grid, params(1, 1, 1500.0)));
    assert!(bad(TopologyKind::Grid, params(0, 1, 100.0)));
    assert!(bad(TopologyKind::Grid, params(1, 0, 100.0)));
    assert!(bad(TopologyKind::TwoMnoUrban, params(1, 1, 100.0)));
    let mut p = params(1, 1, 100.0);
    p.mnos = 0;
    assert!(bad(TopologyKind::UniformRandom, p));
    assert!("hexagonal".parse::<TopologyKind>().is_err());
    assert_eq!("two-mno-urban".parse::<TopologyKind>().unwrap(), TopologyKind::TwoMnoUrban);
}
