//! On-disk TOML schema. Optional fields are filled in by [`ScenarioFile::into_scenario`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::radio::{self, DEFAULT_CCA_THRESHOLD_DBM, DEFAULT_TX_POWER_DBM};
use super::{
    invalid, BandPlan, ContentionParams, Link, Mno, MnoId, Node, NodeKind, Point, Scenario,
    ScenarioError, ServiceId, ServiceOverride, ServiceType,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub band_plan: BandPlanFile,
    pub services: Vec<ServiceFile>,
    pub mnos: Vec<MnoFile>,
    #[serde(default)]
    pub nodes: Vec<NodeFile>,
    #[serde(default)]
    pub links: Vec<LinkFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandPlanFile {
    pub unlicensed_bandwidth_hz: f64,
    pub carrier_frequency_ghz: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ssg: Vec<SsgFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsgFile {
    pub service: ServiceId,
    pub mnos: Vec<MnoId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceFile {
    pub id: ServiceId,
    pub min_throughput_bps: f64,
    pub price_per_bit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnoFile {
    pub id: MnoId,
    pub licensed_bandwidth_hz: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub service_overrides: Vec<OverrideFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideFile {
    pub service: ServiceId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_throughput_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_per_bit: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub id: u32,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<MnoId>,
    pub x_m: f64,
    pub y_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cca_threshold_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_floor_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difs_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw_min_slots: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cw_max_slots: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub txop_s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    pub id: u32,
    pub owner: MnoId,
    pub node: u32,
    pub rx_x_m: f64,
    pub rx_y_m: f64,
    /// Overrides the path-loss chain when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
}

impl ScenarioFile {
    pub fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let mnos: Vec<Mno> = self
            .mnos
            .into_iter()
            .map(|m| Mno {
                id: m.id,
                licensed_bandwidth_hz: m.licensed_bandwidth_hz,
                service_overrides: m
                    .service_overrides
                    .into_iter()
                    .map(|o| ServiceOverride {
                        service: o.service,
                        min_throughput_bps: o.min_throughput_bps,
                        price_per_bit: o.price_per_bit,
                    })
                    .collect(),
            })
            .collect();
        let services: Vec<ServiceType> = self
            .services
            .into_iter()
            .map(|s| ServiceType {
                id: s.id,
                min_throughput_bps: s.min_throughput_bps,
                price_per_bit: s.price_per_bit,
            })
            .collect();
        let nodes: Vec<Node> = self
            .nodes
            .into_iter()
            .map(|n| {
                let d = n.kind.default_contention();
                Node {
                    id: n.id,
                    kind: n.kind,
                    owner: n.owner,
                    position: Point { x_m: n.x_m, y_m: n.y_m },
                    tx_power_dbm: n.tx_power_dbm.unwrap_or(DEFAULT_TX_POWER_DBM),
                    cca_threshold_dbm: n.cca_threshold_dbm.unwrap_or(DEFAULT_CCA_THRESHOLD_DBM),
                    noise_floor_dbm: n
                        .noise_floor_dbm
                        .unwrap_or_else(|| n.kind.default_noise_floor_dbm()),
                    contention: ContentionParams {
                        difs_s: n.difs_s.unwrap_or(d.difs_s),
                        cw_min_slots: n.cw_min_slots.unwrap_or(d.cw_min_slots),
                        cw_max_slots: n.cw_max_slots.unwrap_or(d.cw_max_slots),
                        txop_s: n.txop_s.unwrap_or(d.txop_s),
                    },
                }
            })
            .collect();

        let all_mnos: BTreeSet<MnoId> = mnos.iter().map(|m| m.id).collect();
        let mut ssg: BTreeMap<ServiceId, BTreeSet<MnoId>> = services
            .iter()
            .map(|s| (s.id, all_mnos.clone()))
            .collect();
        for g in self.band_plan.ssg {
            ssg.insert(g.service, g.mnos.into_iter().collect());
        }
        let band_plan = BandPlan {
            unlicensed_bandwidth_hz: self.band_plan.unlicensed_bandwidth_hz,
            carrier_frequency_ghz: self.band_plan.carrier_frequency_ghz,
            ssg,
        };

        let mut links = Vec::with_capacity(self.links.len());
        for l in self.links {
            let receiver = Point { x_m: l.rx_x_m, y_m: l.rx_y_m };
            let snr = match l.snr_db {
                Some(s) => s,
                None => {
                    let node = nodes.iter().find(|n| n.id == l.node).ok_or_else(|| {
                        invalid("link node exists", format!("link {} node {}", l.id, l.node))
                    })?;
                    let pl = radio::path_loss(
                        node.position.distance(receiver),
                        band_plan.carrier_frequency_ghz,
                    )
                    .map_err(|e| invalid("receiver away from its transmitter", format!("link {}: {e}", l.id)))?;
                    radio::snr_db(node.tx_power_dbm, pl, node.noise_floor_dbm)
                }
            };
            if !snr.is_finite() {
                return Err(invalid("finite snr_db", format!("link {}", l.id)));
            }
            links.push(Link {
                id: l.id,
                owner: l.owner,
                node: l.node,
                receiver,
                snr_db: snr,
                rate_bps_per_hz: radio::rate_from_snr_db(snr),
            });
        }

        let scenario = Scenario {
            mnos,
            services,
            nodes,
            links,
            band_plan,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        ScenarioFile {
            band_plan: BandPlanFile {
                unlicensed_bandwidth_hz: s.band_plan.unlicensed_bandwidth_hz,
                carrier_frequency_ghz: s.band_plan.carrier_frequency_ghz,
                ssg: s
                    .band_plan
                    .ssg
                    .iter()
                    .map(|(&service, m)| SsgFile {
                        service,
                        mnos: m.iter().copied().collect(),
                    })
                    .collect(),
            },
            services: s
                .services
                .iter()
                .map(|x| ServiceFile {
                    id: x.id,
                    min_throughput_bps: x.min_throughput_bps,
                    price_per_bit: x.price_per_bit,
                })
                .collect(),
            mnos: s
                .mnos
                .iter()
                .map(|m| MnoFile {
                    id: m.id,
                    licensed_bandwidth_hz: m.licensed_bandwidth_hz,
                    service_overrides: m
                        .service_overrides
                        .iter()
                        .map(|o| OverrideFile {
                            service: o.service,
                            min_throughput_bps: o.min_throughput_bps,
                            price_per_bit: o.price_per_bit,
                        })
                        .collect(),
                })
                .collect(),
            nodes: s
                .nodes
                .iter()
                .map(|n| NodeFile {
                    id: n.id,
                    kind: n.kind,
                    owner: n.owner,
                    x_m: n.position.x_m,
                    y_m: n.position.y_m,
                    tx_power_dbm: Some(n.tx_power_dbm),
                    cca_threshold_dbm: Some(n.cca_threshold_dbm),
                    noise_floor_dbm: Some(n.noise_floor_dbm),
                    difs_s: Some(n.contention.difs_s),
                    cw_min_slots: Some(n.contention.cw_min_slots),
                    cw_max_slots: Some(n.contention.cw_max_slots),
                    txop_s: Some(n.contention.txop_s),
                })
                .collect(),
            links: s
                .links
                .iter()
                .map(|l| LinkFile {
                    id: l.id,
                    owner: l.owner,
                    node: l.node,
                    rx_x_m: l.receiver.x_m,
                    rx_y_m: l.receiver.y_m,
                    snr_db: Some(l.snr_db),
                })
                .collect(),
        }
    }
}
