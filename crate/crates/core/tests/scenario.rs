use proptest::prelude::*;
use slicenet_core::scenario::{radio, load_scenario, NodeKind, Scenario, ScenarioError};

const MINIMAL: &str = r#"
[band_plan]
unlicensed_bandwidth_hz = 20e6
carrier_frequency_ghz = 5.5

[[services]]
id = 1
min_throughput_bps = 10e6
price_per_bit = 1e-6

[[mnos]]
id = 1
licensed_bandwidth_hz = 20e6

[[nodes]]
id = 1
kind = "laa_bs"
owner = 1
x_m = 0.0
y_m = 0.0

[[links]]
id = 1
owner = 1
node = 1
rx_x_m = 30.0
rx_y_m = 40.0
"#;

const TWO_MNO: &str = r#"
[band_plan]
unlicensed_bandwidth_hz = 20e6
carrier_frequency_ghz = 5.5

[[services]]
id = 1
min_throughput_bps = 10e6
price_per_bit = 1e-6

[[services]]
id = 2
min_throughput_bps = 20e6
price_per_bit = 2e-6

[[mnos]]
id = 1
licensed_bandwidth_hz = 20e6

[[mnos]]
id = 2
licensed_bandwidth_hz = 20e6

[[nodes]]
id = 1
kind = "laa_bs"
owner = 1
x_m = 0.0
y_m = 0.0

[[nodes]]
id = 2
kind = "laa_bs"
owner = 2
x_m = 15.0
y_m = 0.0

[[nodes]]
id = 3
kind = "wifi_ap"
x_m = 5.0
y_m = 10.0

[[links]]
id = 1
owner = 1
node = 1
rx_x_m = 10.0
rx_y_m = 0.0

[[links]]
id = 2
owner = 2
node = 2
rx_x_m = 15.0
rx_y_m = 12.0
snr_db = 15.0
"#;

fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    Scenario::from_toml_str(text)
}

fn invariant_of(err: ScenarioError) -> String {
    match err {
        ScenarioError::Validation { invariant, .. } => invariant.to_string(),
        other => panic!("expected a validation error, got {other}"),
    }
}

#[test]
fn path_loss_hand_values() {
    assert!((radio::path_loss(1.0, 1.0).unwrap() - 11.5).abs() < 1e-12);
    assert!((radio::path_loss(10.0, 1.0).unwrap() - 54.8).abs() < 1e-12);
    let expected = 43.3 * 2.0 + 11.5 + 20.0 * 5.5f64.log10();
    assert!((radio::path_loss(100.0, 5.5).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn path_loss_rejects_empty_domain() {
    assert!(radio::path_loss(0.0, 1.0).is_err());
    assert!(radio::path_loss(-3.0, 1.0).is_err());
    assert!(radio::path_loss(10.0, 0.0).is_err());
}

#[test]
fn rate_limits() {
    assert!((radio::rate_from_snr_db(0.0) - 1.0).abs() < 1e-12);
    assert!(radio::rate_from_snr_db(-200.0) < 1e-15);
    assert!(radio::rate_from_snr_db(-200.0) > 0.0);
    // 30 dB: log2(1001).
    assert!((radio::rate_from_snr_db(30.0) - 1001f64.log2()).abs() < 1e-12);
}

#[test]
fn link_rate_chains_path_loss() {
    let pl = 43.3 * 2.0 + 11.5 + 20.0 * 5.5f64.log10();
    let snr = 23.0 - pl + 100.0;
    let expected = (1.0 + 10f64.powf(snr / 10.0)).log2();
    let r = radio::link_rate(23.0, 100.0, 5.5, -100.0).unwrap();
    assert!((r - expected).abs() < 1e-12);
}

#[test]
fn minimal_file_loads_with_defaults() {
    let s = parse(MINIMAL).unwrap();
    assert_eq!(s.mnos.len(), 1);
    assert_eq!(s.service_ids(), vec![1]);
    let n = s.node(1).unwrap();
    assert_eq!(n.kind, NodeKind::LaaBs);
    assert_eq!(n.tx_power_dbm, radio::DEFAULT_TX_POWER_DBM);
    assert_eq!(n.contention, NodeKind::LaaBs.default_contention());
    // Receiver 50 m away, served with the LAA noise floor.
    let expected = radio::link_rate(23.0, 50.0, 5.5, radio::DEFAULT_LAA_NOISE_FLOOR_DBM).unwrap();
    assert!((s.links[0].rate_bps_per_hz - expected).abs() < 1e-12);
    assert_eq!(s.band_plan.ssg[&1].iter().copied().collect::<Vec<_>>(), vec![1]);
}

#[test]
fn two_mno_setup() {
    let s = parse(TWO_MNO).unwrap();
    assert_eq!(s.mnos.len(), 2);
    assert_eq!(s.service_terms(1, 1), Some((10e6, 1e-6)));
    assert_eq!(s.service_terms(2, 2), Some((20e6, 2e-6)));
    assert_eq!(s.band_plan.unlicensed_bandwidth_hz, 20e6);
    // Explicit SNR wins over the path-loss chain.
    assert_eq!(s.links[1].snr_db, 15.0);
    assert!((s.links[1].rate_bps_per_hz - radio::rate_from_snr_db(15.0)).abs() < 1e-12);
    // Default support group is every MNO.
    for l in [1, 2] {
        assert_eq!(s.band_plan.ssg[&l].len(), 2);
    }
    assert_eq!(s.links_of(1).count(), 1);
    assert_eq!(s.owned_nodes(2), vec![2]);
}

#[test]
fn reversed_contention_window_is_rejected() {
    let text = MINIMAL.replace("y_m = 0.0\n", "y_m = 0.0\ncw_min_slots = 7\ncw_max_slots = 3\n");
    let inv = invariant_of(parse(&text).unwrap_err());
    assert!(inv.contains("cw_min"), "{inv}");
}

#[test]
fn validation_names_the_invariant() {
    let cases = [
        (MINIMAL.replace("owner = 1\nnode = 1", "owner = 9\nnode = 1"), "owner"),
        (MINIMAL.replace("node = 1\nrx_x_m", "node = 7\nrx_x_m"), "node"),
        (MINIMAL.replace("min_throughput_bps = 10e6", "min_throughput_bps = 0.0"), "min_throughput"),
        (MINIMAL.replace("price_per_bit = 1e-6", "price_per_bit = -1.0"), "price"),
        (MINIMAL.replace("licensed_bandwidth_hz = 20e6", "licensed_bandwidth_hz = -1.0"), "bandwidth"),
    ];
    for (text, needle) in cases {
        let inv = invariant_of(parse(&text).unwrap_err());
        assert!(inv.contains(needle), "{inv} should mention {needle}");
    }
}

#[test]
fn malformed_file_is_a_parse_error() {
    assert!(matches!(parse("[band_plan\n"), Err(ScenarioError::Parse(_))));
    assert!(matches!(
        parse(&MINIMAL.replace("[[links]]", "[[links]]\nbogus = 1")),
        Err(ScenarioError::Parse(_))
    ));
}

#[test]
fn round_trip_is_exact() {
    for text in [MINIMAL, TWO_MNO] {
        let s = parse(text).unwrap();
        let again = parse(&s.to_toml_string()).unwrap();
        assert_eq!(s, again);
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    let s = parse(TWO_MNO).unwrap();
    s.save(&path).unwrap();
    assert_eq!(load_scenario(&path).unwrap(), s);
    assert!(matches!(load_scenario(dir.path().join("missing.toml")), Err(ScenarioError::Io { .. })));
}

#[test]
fn repository_scenarios_load() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let s = load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(parse(&s.to_toml_string()).unwrap(), s);
            n += 1;
        }
    }
    assert!(n > 0);
}

proptest! {
    #[test]
    fn path_loss_increases_in_distance_and_frequency(d in 0.1f64..5000.0, f in 0.1f64..60.0, k in 1.001f64..10.0) {
        let base = radio::path_loss(d, f).unwrap();
        prop_assert!(radio::path_loss(d * k, f).unwrap() > base);
        prop_assert!(radio::path_loss(d, f * k).unwrap() > base);
    }

    #[test]
    fn rate_decreases_in_distance(d in 0.5f64..2000.0, k in 1.01f64..10.0, noise in -110.0f64..-80.0) {
        let near = radio::link_rate(23.0, d, 5.5, noise).unwrap();
        let far = radio::link_rate(23.0, d * k, 5.5, noise).unwrap();
        prop_assert!(far < near);
        prop_assert!(far > 0.0);
    }

    #[test]
    fn round_trip_holds_for_moved_receivers(x in -500.0f64..500.0, y in -500.0f64..500.0) {
        prop_assume!(x.hypot(y) > 0.1);
        let text = MINIMAL.replace("rx_x_m = 30.0", &format!("rx_x_m = {x:?}")).replace("rx_y_m = 40.0", &format!("rx_y_m = {y:?}"));
        let s = parse(&text).unwrap();
        prop_assert_eq!(parse(&s.to_toml_string()).unwrap(), s);
    }
}
