//! Scenario data model: operators, infrastructure, links, services and the
//! band plan.
//!
//! A [`Scenario`] is immutable once validated. Files use TOML with the unit
//! in every field name; optional radio and contention fields are filled with
//! per-technology defaults on load, so serializing a loaded scenario writes
//! every field explicitly.

pub mod file;
pub mod radio;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use file::ScenarioFile;

pub type MnoId = u32;
pub type NodeId = u32;
pub type LinkId = u32;
pub type ServiceId = u32;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario ({invariant}): {detail}")]
    Validation {
        invariant: &'static str,
        detail: String,
    },
}

fn invalid(invariant: &'static str, detail: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        invariant,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    LaaBs,
    WifiAp,
}

impl NodeKind {
    pub fn letter(self) -> char {
        match self {
            NodeKind::LaaBs => 'L',
            NodeKind::WifiAp => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'L' => Some(NodeKind::LaaBs),
            'W' => Some(NodeKind::WifiAp),
            _ => None,
        }
    }

    /// Channel-access parameters used when a file leaves them out.
    pub fn default_contention(self) -> ContentionParams {
        match self {
            // DIFS in seconds: 34 us for Wi-Fi, 25 us for LAA.
            NodeKind::WifiAp => ContentionParams {
                difs_s: 34e-6,
                cw_min_slots: 3,
                cw_max_slots: 7,
                txop_s: 1.504e-3,
            },
            NodeKind::LaaBs => ContentionParams {
                difs_s: 25e-6,
                cw_min_slots: 3,
                cw_max_slots: 7,
                txop_s: 2e-3,
            },
        }
    }

    pub fn default_noise_floor_dbm(self) -> f64 {
        match self {
            NodeKind::LaaBs => radio::DEFAULT_LAA_NOISE_FLOOR_DBM,
            NodeKind::WifiAp => radio::DEFAULT_WIFI_NOISE_FLOOR_DBM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentionParams {
    pub difs_s: f64,
    pub cw_min_slots: u32,
    pub cw_max_slots: u32,
    pub txop_s: f64,
}

impl ContentionParams {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.cw_min_slots > self.cw_max_slots {
            return Err(invalid(
                "cw_min_slots <= cw_max_slots",
                format!("cw_min_slots = {} > cw_max_slots = {}", self.cw_min_slots, self.cw_max_slots),
            ));
        }
        if !(self.difs_s > 0.0 && self.difs_s.is_finite()) {
            return Err(invalid("difs_s > 0", format!("difs_s = {}", self.difs_s)));
        }
        if !(self.txop_s > 0.0 && self.txop_s.is_finite()) {
            return Err(invalid("txop_s > 0", format!("txop_s = {}", self.txop_s)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceType {
    pub id: ServiceId,
    /// η in bit/s.
    pub min_throughput_bps: f64,
    /// ρ in currency per bit.
    pub price_per_bit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceOverride {
    pub service: ServiceId,
    pub min_throughput_bps: Option<f64>,
    pub price_per_bit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mno {
    pub id: MnoId,
    pub licensed_bandwidth_hz: f64,
    pub service_overrides: Vec<ServiceOverride>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x_m: f64,
    pub y_m: f64,
}

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.x_m - other.x_m).hypot(self.y_m - other.y_m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    /// `None` for Wi-Fi access points.
    pub owner: Option<MnoId>,
    pub position: Point,
    pub tx_power_dbm: f64,
    pub cca_threshold_dbm: f64,
    pub noise_floor_dbm: f64,
    pub contention: ContentionParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub owner: MnoId,
    pub node: NodeId,
    pub receiver: Point,
    pub snr_db: f64,
    /// R in bit/s/Hz, always `log2(1 + 10^(snr_db/10))`.
    pub rate_bps_per_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandPlan {
    pub unlicensed_bandwidth_hz: f64,
    pub carrier_frequency_ghz: f64,
    /// Service support group per service.
    pub ssg: BTreeMap<ServiceId, BTreeSet<MnoId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mnos: Vec<Mno>,
    pub services: Vec<ServiceType>,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
    pub band_plan: BandPlan,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        load_scenario(path)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        file.into_scenario()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ScenarioFile::from_scenario(self)).expect("scenario serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml_string()).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn mno(&self, id: MnoId) -> Option<&Mno> {
        self.mnos.iter().find(|m| m.id == id)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn service_ids(&self) -> Vec<ServiceId> {
        self.services.iter().map(|s| s.id).collect()
    }

    /// (η, ρ) of MNO `mno` for service `service`, overrides applied.
    pub fn service_terms(&self, mno: MnoId, service: ServiceId) -> Option<(f64, f64)> {
        let base = self.services.iter().find(|s| s.id == service)?;
        let mut eta = base.min_throughput_bps;
        let mut rho = base.price_per_bit;
        if let Some(o) = self
            .mno(mno)?
            .service_overrides
            .iter()
            .find(|o| o.service == service)
        {
            eta = o.min_throughput_bps.unwrap_or(eta);
            rho = o.price_per_bit.unwrap_or(rho);
        }
        Some((eta, rho))
    }

    pub fn links_of(&self, mno: MnoId) -> impl Iterator<Item = &Link> {
        self.links.iter().filter(move |l| l.owner == mno)
    }

    pub fn links_at_node(&self, node: NodeId) -> usize {
        self.links.iter().filter(|l| l.node == node).count()
    }

    /// Base stations owned by `mno`.
    pub fn owned_nodes(&self, mno: MnoId) -> Vec<NodeId> {
        self.nodes
            .iter()
            .filter(|n| n.owner == Some(mno))
            .map(|n| n.id)
            .collect()
    }

    /// Transmitters that contend for the unlicensed channel: every Wi-Fi AP
    /// and every LAA base station serving at least one link.
    pub fn active_nodes(&self) -> Vec<&Node> {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::WifiAp || self.links_at_node(n.id) > 0)
            .collect()
    }

    /// Replace η of `service` for every MNO, clearing per-MNO η overrides.
    pub fn with_min_throughput(mut self, service: ServiceId, bps: f64) -> Self {
        for s in &mut self.services {
            if s.id == service {
                s.min_throughput_bps = bps;
            }
        }
        for m in &mut self.mnos {
            for o in &mut m.service_overrides {
                if o.service == service {
                    o.min_throughput_bps = None;
                }
            }
        }
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut mno_ids = BTreeSet::new();
        for m in &self.mnos {
            if !mno_ids.insert(m.id) {
                return Err(invalid("unique mno ids", format!("duplicate mno id {}", m.id)));
            }
            if !(m.licensed_bandwidth_hz >= 0.0 && m.licensed_bandwidth_hz.is_finite()) {
                return Err(invalid(
                    "licensed_bandwidth_hz >= 0",
                    format!("mno {}: {}", m.id, m.licensed_bandwidth_hz),
                ));
            }
        }
        if self.mnos.is_empty() {
            return Err(invalid("at least one mno", "no mnos"));
        }
        if self.services.is_empty() {
            return Err(invalid("at least one service", "no services"));
        }
        let mut sorted: Vec<ServiceId> = self.service_ids();
        sorted.sort_unstable();
        let dense: Vec<ServiceId> = (1..=sorted.len() as ServiceId).collect();
        if sorted != dense {
            return Err(invalid(
                "service ids unique and dense from 1",
                format!("got {sorted:?}"),
            ));
        }
        for s in &self.services {
            check_eta(s.min_throughput_bps, &format!("service {}", s.id))?;
            check_rho(s.price_per_bit, &format!("service {}", s.id))?;
        }
        for m in &self.mnos {
            let mut seen = BTreeSet::new();
            for o in &m.service_overrides {
                if !sorted.contains(&o.service) {
                    return Err(invalid(
                        "override references a known service",
                        format!("mno {} overrides unknown service {}", m.id, o.service),
                    ));
                }
                if !seen.insert(o.service) {
                    return Err(invalid(
                        "one override per service",
                        format!("mno {} service {}", m.id, o.service),
                    ));
                }
                if let Some(eta) = o.min_throughput_bps {
                    check_eta(eta, &format!("mno {} service {}", m.id, o.service))?;
                }
                if let Some(rho) = o.price_per_bit {
                    check_rho(rho, &format!("mno {} service {}", m.id, o.service))?;
                }
            }
        }
        let mut node_ids = BTreeSet::new();
        for n in &self.nodes {
            if !node_ids.insert(n.id) {
                return Err(invalid("unique node ids", format!("duplicate node id {}", n.id)));
            }
            n.contention.validate()?;
            match (n.kind, n.owner) {
                (NodeKind::LaaBs, None) => {
                    return Err(invalid("laa_bs has an owner", format!("node {}", n.id)))
                }
                (NodeKind::WifiAp, Some(_)) => {
                    return Err(invalid("wifi_ap has no owner", format!("node {}", n.id)))
                }
                (NodeKind::LaaBs, Some(o)) if !mno_ids.contains(&o) => {
                    return Err(invalid(
                        "node owner is a known mno",
                        format!("node {} owner {}", n.id, o),
                    ))
                }
                _ => {}
            }
            for (v, name) in [
                (n.tx_power_dbm, "tx_power_dbm"),
                (n.cca_threshold_dbm, "cca_threshold_dbm"),
                (n.noise_floor_dbm, "noise_floor_dbm"),
                (n.position.x_m, "x_m"),
                (n.position.y_m, "y_m"),
            ] {
                if !v.is_finite() {
                    return Err(invalid("finite node fields", format!("node {} {name}", n.id)));
                }
            }
        }
        let mut link_ids = BTreeSet::new();
        for l in &self.links {
            if !link_ids.insert(l.id) {
                return Err(invalid("unique link ids", format!("duplicate link id {}", l.id)));
            }
            let node = self.node(l.node).ok_or_else(|| {
                invalid("link node exists", format!("link {} node {}", l.id, l.node))
            })?;
            if node.kind != NodeKind::LaaBs {
                return Err(invalid(
                    "links are served by laa_bs nodes",
                    format!("link {} node {}", l.id, l.node),
                ));
            }
            if node.owner != Some(l.owner) {
                return Err(invalid(
                    "link owner matches serving node owner",
                    format!("link {} owner {} node owner {:?}", l.id, l.owner, node.owner),
                ));
            }
            if !(l.rate_bps_per_hz > 0.0 && l.rate_bps_per_hz.is_finite()) {
                return Err(invalid(
                    "rate_bps_per_hz > 0",
                    format!("link {} rate {} (snr {} dB)", l.id, l.rate_bps_per_hz, l.snr_db),
                ));
            }
        }
        let bp = &self.band_plan;
        if !(bp.unlicensed_bandwidth_hz >= 0.0 && bp.unlicensed_bandwidth_hz.is_finite()) {
            return Err(invalid(
                "unlicensed_bandwidth_hz >= 0",
                format!("{}", bp.unlicensed_bandwidth_hz),
            ));
        }
        if !(bp.carrier_frequency_ghz > 0.0 && bp.carrier_frequency_ghz.is_finite()) {
            return Err(invalid(
                "carrier_frequency_ghz > 0",
                format!("{}", bp.carrier_frequency_ghz),
            ));
        }
        for s in &sorted {
            let members = bp.ssg.get(s).ok_or_else(|| {
                invalid("every service has a support group", format!("service {s}"))
            })?;
            if members.is_empty() {
                return Err(invalid("support groups are nonempty", format!("service {s}")));
            }
            if let Some(bad) = members.iter().find(|m| !mno_ids.contains(m)) {
                return Err(invalid(
                    "support group members are known mnos",
                    format!("service {s} lists mno {bad}"),
                ));
            }
        }
        if let Some(extra) = bp.ssg.keys().find(|k| !sorted.contains(k)) {
            return Err(invalid(
                "support groups reference known services",
                format!("service {extra}"),
            ));
        }
        Ok(())
    }
}

fn check_eta(eta: f64, what: &str) -> Result<(), ScenarioError> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(invalid("min_throughput_bps > 0", format!("{what}: {eta}")))
    }
}

fn check_rho(rho: f64, what: &str) -> Result<(), ScenarioError> {
    if rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(invalid("price_per_bit >= 0", format!("{what}: {rho}")))
    }
}

/// Read, parse and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml_str(&text)
}
