//! Synthetic deployments.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use slicenet_core::scenario::file::{
    BandPlanFile, LinkFile, MnoFile, NodeFile, ScenarioFile, ServiceFile,
};
use slicenet_core::{NodeKind, Scenario};
use thiserror::Error;

pub const MIN_CELL_SIZE_M: f64 = 100.0;
pub const MAX_CELL_SIZE_M: f64 = 1000.0;

/// Receivers closer than this to their base station are pushed out to it.
const MIN_UE_DISTANCE_M: f64 = 5.0;
/// In the urban preset, the second operator's site sits this far from the
/// first operator's, so co-sited base stations sense each other.
const URBAN_SITE_OFFSET_M: f64 = 12.0;
/// Coffee-shop access points are placed within this radius of a site.
const URBAN_AP_RADIUS_M: f64 = 20.0;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("invalid topology parameter: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    /// Sites on a square grid with pitch `cell_size_m`.
    Grid,
    /// Sites uniform over a square of `sqrt(sites) · cell_size_m` per side.
    UniformRandom,
    /// Two operators sharing grid sites, plus Wi-Fi access points near
    /// each site.
    TwoMnoUrban,
}

impl std::str::FromStr for TopologyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "grid" => Ok(TopologyKind::Grid),
            "uniform-random" => Ok(TopologyKind::UniformRandom),
            "two-mno-urban" => Ok(TopologyKind::TwoMnoUrban),
            other => Err(format!("unknown topology {other:?} (grid, uniform-random, two-mno-urban)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    pub mnos: u32,
    /// Base stations per MNO.
    pub sites_per_mno: u32,
    pub ues_per_cell: u32,
    pub cell_size_m: f64,
    /// Wi-Fi access points per site (two-mno-urban) or in total (others).
    pub wifi_aps: u32,
    pub licensed_bandwidth_hz: f64,
    pub unlicensed_bandwidth_hz: f64,
    pub carrier_frequency_ghz: f64,
    /// (η bit/s, ρ per bit) per service, ids 1, 2, ...
    pub services: Vec<(f64, f64)>,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            mnos: 2,
            sites_per_mno: 2,
            ues_per_cell: 2,
            cell_size_m: 100.0,
            wifi_aps: 1,
            licensed_bandwidth_hz: 20e6,
            unlicensed_bandwidth_hz: 20e6,
            carrier_frequency_ghz: 5.5,
            services: vec![(10e6, 1e-6), (20e6, 2e-6)],
        }
    }
}

impl TopologyParams {
    pub fn validate(&self, kind: TopologyKind) -> Result<(), TopologyError> {
        let bad = |s: String| Err(TopologyError::Invalid(s));
        if self.mnos == 0 {
            return bad("mnos must be >= 1".into());
        }
        if kind == TopologyKind::TwoMnoUrban && self.mnos != 2 {
            return bad(format!("two-mno-urban needs mnos = 2, got {}", self.mnos));
        }
        if self.sites_per_mno == 0 || self.ues_per_cell == 0 {
            return bad("sites_per_mno and ues_per_cell must be >= 1".into());
        }
        if !(MIN_CELL_SIZE_M..=MAX_CELL_SIZE_M).contains(&self.cell_size_m) {
            return bad(format!(
                "cell_size_m = {} outside [{MIN_CELL_SIZE_M}, {MAX_CELL_SIZE_M}]",
                self.cell_size_m
            ));
        }
        if self.services.is_empty() {
            return bad("at least one service".into());
        }
        Ok(())
    }
}

fn grid_position(index: u32, total: u32, pitch: f64) -> (f64, f64) {
    let side = (total as f64).sqrt().ceil().max(1.0) as u32;
    let (r, c) = (index / side, index % side);
    ((c as f64 + 0.5) * pitch, (r as f64 + 0.5) * pitch)
}

/// A deterministic scenario for `(kind, params, seed)`.
pub fn generate_topology(
    kind: TopologyKind,
    params: &TopologyParams,
    seed: u64,
) -> Result<Scenario, TopologyError> {
    params.validate(kind)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pitch = params.cell_size_m;
    let total_sites = params.mnos * params.sites_per_mno;

    // (owner, x, y) per base station.
    let mut sites: Vec<(u32, f64, f64)> = Vec::new();
    match kind {
        TopologyKind::Grid => {
            for s in 0..total_sites {
                let (x, y) = grid_position(s, total_sites, pitch);
                sites.push((s % params.mnos + 1, x, y));
            }
        }
        TopologyKind::UniformRandom => {
            let side = (total_sites as f64).sqrt() * pitch;
            for s in 0..total_sites {
                let x = rng.random_range(0.0..side);
                let y = rng.random_range(0.0..side);
                sites.push((s % params.mnos + 1, x, y));
            }
        }
        TopologyKind::TwoMnoUrban => {
            for s in 0..params.sites_per_mno {
                let (x, y) = grid_position(s, params.sites_per_mno, pitch);
                sites.push((1, x, y));
                sites.push((2, x + URBAN_SITE_OFFSET_M, y));
            }
        }
    }

    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let node = |id: u32, kind: NodeKind, owner: Option<u32>, x: f64, y: f64| NodeFile {
        id,
        kind,
        owner,
        x_m: x,
        y_m: y,
        tx_power_dbm: None,
        cca_threshold_dbm: None,
        noise_floor_dbm: None,
        difs_s: None,
        cw_min_slots: None,
        cw_max_slots: None,
        txop_s: None,
    };
    for (i, &(owner, x, y)) in sites.iter().enumerate() {
        let id = i as u32 + 1;
        nodes.push(node(id, NodeKind::LaaBs, Some(owner), x, y));
        for _ in 0..params.ues_per_cell {
            // Uniform over the disk of radius cell_size / 2.
            let r = (pitch / 2.0 * rng.random_range(0.0f64..1.0).sqrt()).max(MIN_UE_DISTANCE_M);
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            links.push(LinkFile {
                id: links.len() as u32 + 1,
                owner,
                node: id,
                rx_x_m: x + r * t.cos(),
                rx_y_m: y + r * t.sin(),
                snr_db: None,
            });
        }
    }
    let mut next = sites.len() as u32 + 1;
    match kind {
        TopologyKind::TwoMnoUrban => {
            for &(owner, x, y) in &sites {
                if owner != 1 {
                    continue;
                }
                for _ in 0..params.wifi_aps {
                    let r = URBAN_AP_RADIUS_M * rng.random_range(0.0f64..1.0).sqrt();
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    nodes.push(node(next, NodeKind::WifiAp, None, x + r * t.cos(), y + r * t.sin()));
                    next += 1;
                }
            }
        }
        _ => {
            let side = (total_sites as f64).sqrt().ceil() * pitch;
            for _ in 0..params.wifi_aps {
                let x = rng.random_range(0.0..side);
                let y = rng.random_range(0.0..side);
                nodes.push(node(next, NodeKind::WifiAp, None, x, y));
                next += 1;
            }
        }
    }

    let file = ScenarioFile {
        band_plan: BandPlanFile {
            unlicensed_bandwidth_hz: params.unlicensed_bandwidth_hz,
            carrier_frequency_ghz: params.carrier_frequency_ghz,
            ssg: Vec::new(),
        },
        services: params
            .services
            .iter()
            .enumerate()
            .map(|(i, &(eta, rho))| ServiceFile {
                id: i as u32 + 1,
                min_throughput_bps: eta,
                price_per_bit: rho,
            })
            .collect(),
        mnos: (1..=params.mnos)
            .map(|id| MnoFile {
                id,
                licensed_bandwidth_hz: params.licensed_bandwidth_hz,
                service_overrides: Vec::new(),
            })
            .collect(),
        nodes,
        links,
    };
    file.into_scenario()
        .map_err(|e| TopologyError::Invalid(e.to_string()))
}
