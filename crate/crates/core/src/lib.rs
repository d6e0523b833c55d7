//! Inter-operator spectrum slicing over a licensed and an unlicensed band.
//!
//! The crate is organised as a pipeline:
//!
//! - [`scenario`]: operators, base stations, Wi-Fi access points, links and
//!   the radio model, loaded from TOML files.
//! - [`coexist`]: discrete-event listen-before-talk simulator that measures
//!   channel-access probabilities and builds the access table.
//! - [`mboe`]: contention graphs, maximum independent sets and the
//!   table-driven access estimator, including counterfactual removals.
//! - [`admm`]: the slicing linear program, the distributed ADMM solver,
//!   an exact LP oracle and a subgradient baseline.
//! - [`game`]: slice worth, division rules, core checks and convexity probes.
//!
//! Access probabilities are normalized so that an isolated transmitter
//! scores 1.0; see [`coexist::closed_form_occupancy`].

pub mod admm;
pub mod coexist;
pub mod game;
pub mod mboe;
pub mod scenario;

pub use scenario::{MnoId, NodeId, NodeKind, Scenario, ServiceId};
