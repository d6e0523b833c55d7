//! Event-driven listen-before-talk engine.
//!
//! Time is kept in integer nanoseconds. Events at the same instant are
//! processed in three phases: transmission ends, frame arrivals, then all
//! backoff expiries together, so neighbours whose counters hit zero in the
//! same slot start simultaneously and collide.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    closed_form_occupancy, BackoffPolicy, NodeStats, SenseMatrix, SimConfig, SimError, SimReport,
    TrafficModel,
};
use crate::scenario::ContentionParams;

fn to_ns(s: f64) -> u64 {
    (s * 1e9).round() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    TxEnd,
    Arrival,
    Attempt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Event {
    time: u64,
    kind: EventKind,
    node: usize,
    version: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Empty,
    Contending,
    Transmitting { start: u64, collided: bool },
}

struct NodeState {
    difs: u64,
    slot: u64,
    txop: u64,
    cw_min: u32,
    cw_max: u32,
    cw: u32,
    phase: Phase,
    busy: u32,
    counter: u32,
    idle_since: Option<u64>,
    version: u64,
    contention_start: u64,
    queue: VecDeque<u64>,
    rng: ChaCha8Rng,
    stats: NodeStats,
}

impl NodeState {
    fn has_frame(&self, saturated: bool) -> bool {
        saturated || !self.queue.is_empty()
    }

    fn draw_counter(&mut self, policy: BackoffPolicy) {
        self.counter = match policy {
            BackoffPolicy::Uniform => self.rng.random_range(self.cw_min..=self.cw_max),
            BackoffPolicy::BinaryExponential => self.rng.random_range(0..=self.cw),
        };
    }
}

struct Engine<'a> {
    nodes: Vec<NodeState>,
    neighbours: Vec<Vec<usize>>,
    heap: BinaryHeap<Reverse<Event>>,
    cfg: &'a SimConfig,
    saturated: bool,
    end: u64,
    tx_mask: u64,
    mask_since: u64,
    configurations: Option<BTreeMap<u64, u64>>,
}

/// Simulate `contenders` whose mutual sensing is given by `sense`.
///
/// Node `i` of the report corresponds to `contenders[i]`.
pub fn simulate(
    contenders: &[ContentionParams],
    sense: &SenseMatrix,
    cfg: &SimConfig,
) -> Result<SimReport, SimError> {
    cfg.validate()?;
    if sense.len() != contenders.len() {
        return Err(SimError::Config(format!(
            "sense matrix has {} nodes, {} contenders given",
            sense.len(),
            contenders.len()
        )));
    }
    for (i, c) in contenders.iter().enumerate() {
        c.validate()
            .map_err(|e| SimError::Config(format!("contender {i}: {e}")))?;
        if cfg.slot_time_s >= c.difs_s {
            return Err(SimError::Config(format!(
                "slot_time {} s must be shorter than DIFS {} s (contender {i})",
                cfg.slot_time_s, c.difs_s
            )));
        }
    }
    if cfg.track_configurations && contenders.len() > 64 {
        return Err(SimError::Config(
            "configuration tracking supports at most 64 nodes".into(),
        ));
    }
    let saturated = matches!(cfg.traffic, TrafficModel::Saturated);
    let slot = to_ns(cfg.slot_time_s);
    let nodes = contenders
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            NodeState {
                difs: to_ns(c.difs_s),
                slot,
                txop: to_ns(c.txop_s),
                cw_min: c.cw_min_slots,
                cw_max: c.cw_max_slots,
                cw: c.cw_min_slots,
                phase: Phase::Empty,
                busy: 0,
                counter: 0,
                idle_since: None,
                version: 0,
                contention_start: 0,
                queue: VecDeque::new(),
                rng,
                stats: NodeStats::default(),
            }
        })
        .collect();
    let mut engine = Engine {
        nodes,
        neighbours: (0..contenders.len()).map(|i| sense.neighbours(i)).collect(),
        heap: BinaryHeap::new(),
        cfg,
        saturated,
        end: to_ns(cfg.duration_s),
        tx_mask: 0,
        mask_since: 0,
        configurations: cfg.track_configurations.then(BTreeMap::new),
    };
    engine.run();
    Ok(engine.finish(contenders))
}

impl Engine<'_> {
    fn push(&mut self, time: u64, kind: EventKind, node: usize) {
        let version = self.nodes[node].version;
        self.heap.push(Reverse(Event {
            time,
            kind,
            node,
            version,
        }));
    }

    fn schedule_attempt(&mut self, i: usize, now: u64) {
        let n = &mut self.nodes[i];
        n.version += 1;
        n.idle_since = Some(now);
        let t = now + n.difs + u64::from(n.counter) * n.slot;
        self.push(t, EventKind::Attempt, i);
    }

    fn enter_contention(&mut self, i: usize, now: u64) {
        let policy = self.cfg.backoff;
        let n = &mut self.nodes[i];
        n.phase = Phase::Contending;
        n.contention_start = now;
        n.draw_counter(policy);
        if n.busy == 0 {
            self.schedule_attempt(i, now);
        }
    }

    fn next_arrival(&mut self, i: usize, now: u64) {
        if let TrafficModel::Poisson { frames_per_s } = self.cfg.traffic {
            let u: f64 = self.nodes[i].rng.random();
            let gap = -(1.0 - u).ln() / frames_per_s;
            let t = now + to_ns(gap).max(1);
            let version = self.nodes[i].version;
            self.heap.push(Reverse(Event {
                time: t,
                kind: EventKind::Arrival,
                node: i,
                version,
            }));
        }
    }

    fn record_mask(&mut self, now: u64) {
        if let Some(cfgs) = self.configurations.as_mut() {
            let span = now.min(self.end) - self.mask_since.min(self.end);
            if span > 0 {
                *cfgs.entry(self.tx_mask).or_insert(0) += span;
            }
        }
        self.mask_since = now;
    }

    fn run(&mut self) {
        for i in 0..self.nodes.len() {
            if self.saturated {
                self.enter_contention(i, 0);
            } else {
                self.next_arrival(i, 0);
            }
        }
        let mut starting: Vec<usize> = Vec::new();
        while let Some(Reverse(ev)) = self.heap.pop() {
            if ev.time >= self.end {
                break;
            }
            let now = ev.time;
            match ev.kind {
                EventKind::TxEnd => self.on_tx_end(ev.node, now),
                EventKind::Arrival => self.on_arrival(ev.node, now),
                EventKind::Attempt => {
                    let n = &self.nodes[ev.node];
                    if ev.version == n.version && n.phase == Phase::Contending && n.busy == 0 {
                        starting.push(ev.node);
                    }
                }
            }
            let more_now = self
                .heap
                .peek()
                .is_some_and(|Reverse(next)| next.time == now);
            if !more_now && !starting.is_empty() {
                self.start_transmissions(&starting, now);
                starting.clear();
            }
        }
    }

    fn on_arrival(&mut self, i: usize, now: u64) {
        self.nodes[i].queue.push_back(now);
        self.next_arrival(i, now);
        if self.nodes[i].phase == Phase::Empty {
            self.enter_contention(i, now);
        }
    }

    fn start_transmissions(&mut self, starting: &[usize], now: u64) {
        self.record_mask(now);
        for &i in starting {
            let collided = self.neighbours[i].iter().any(|j| starting.contains(j));
            let n = &mut self.nodes[i];
            n.phase = Phase::Transmitting {
                start: now,
                collided,
            };
            n.idle_since = None;
            n.version += 1;
            n.stats.contention_time_s += (now - n.contention_start) as f64 * 1e-9;
            let end = now + n.txop;
            self.tx_mask |= 1u64.checked_shl(i as u32).unwrap_or(0);
            self.push(end, EventKind::TxEnd, i);
        }
        for &i in starting {
            for k in 0..self.neighbours[i].len() {
                let j = self.neighbours[i][k];
                let m = &mut self.nodes[j];
                m.busy += 1;
                if m.busy == 1 && m.phase == Phase::Contending {
                    if let Some(since) = m.idle_since.take() {
                        let elapsed = now - since;
                        if elapsed > m.difs {
                            let consumed = ((elapsed - m.difs) / m.slot) as u32;
                            m.counter -= consumed.min(m.counter);
                        }
                    }
                    m.version += 1;
                }
            }
        }
    }

    fn on_tx_end(&mut self, i: usize, now: u64) {
        self.record_mask(now);
        self.tx_mask &= !(1u64.checked_shl(i as u32).unwrap_or(0));
        let policy = self.cfg.backoff;
        let n = &mut self.nodes[i];
        let Phase::Transmitting { start, collided } = n.phase else {
            return;
        };
        n.stats.txop_count += 1;
        if collided {
            n.stats.collided_count += 1;
            if policy == BackoffPolicy::BinaryExponential {
                n.cw = (2 * n.cw + 1).min(n.cw_max.max(n.cw_min));
            }
        } else {
            n.stats.airtime_held_s += (now - start) as f64 * 1e-9;
            n.stats.frames_served += 1;
            if let Some(arr) = n.queue.pop_front() {
                n.stats.queueing_delay_s += (start - arr) as f64 * 1e-9;
            }
            n.cw = n.cw_min;
        }
        if n.has_frame(self.saturated) {
            self.enter_contention(i, now);
        } else {
            n.phase = Phase::Empty;
        }
        for k in 0..self.neighbours[i].len() {
            let j = self.neighbours[i][k];
            self.nodes[j].busy -= 1;
            if self.nodes[j].busy == 0 && self.nodes[j].phase == Phase::Contending {
                self.schedule_attempt(j, now);
            }
        }
    }

    fn finish(mut self, contenders: &[ContentionParams]) -> SimReport {
        let end = self.end;
        self.record_mask(end);
        let duration = end as f64 * 1e-9;
        let backoff = self.cfg.backoff;
        let slot = self.cfg.slot_time_s;
        let nodes = self
            .nodes
            .into_iter()
            .zip(contenders)
            .map(|(n, c)| {
                let mut stats = n.stats;
                if let Phase::Transmitting { start, collided } = n.phase {
                    stats.txop_count += 1;
                    if collided {
                        stats.collided_count += 1;
                    } else {
                        stats.airtime_held_s += (end - start) as f64 * 1e-9;
                    }
                }
                stats.occupancy = stats.airtime_held_s / duration;
                let reference = closed_form_occupancy(c, slot, backoff);
                stats.access_probability = (stats.occupancy / reference).clamp(0.0, 1.0);
                stats
            })
            .collect();
        let configurations = self.configurations.map(|cfgs| {
            cfgs.into_iter()
                .map(|(mask, ns)| (mask, ns as f64 * 1e-9 / duration))
                .collect()
        });
        SimReport {
            duration_s: duration,
            nodes,
            configurations,
        }
    }
}
