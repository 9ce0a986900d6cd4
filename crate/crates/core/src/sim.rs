//! Continuous-time discrete-event simulation of the protocol under churn.
//!
//! Three superposed Poisson processes drive a run: a global join stream at
//! rate `N λ_f`, an independent failure clock at rate `λ_f` on every non-root
//! node, and an independent protocol-cycle clock at rate `λ_g = r λ_f` on every
//! node including the root. All clocks live in one time-ordered queue; clocks of
//! failed nodes are discarded lazily when they surface.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_join_degree, ChurnParams, DynamicGraph, NodeId, ROOT_SLOT};
use crate::model::{self, ModelParams};
use crate::protocol::{self, Level};
use crate::stats::{self, BATCHES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Target (expected) network size `N`.
    pub nodes: usize,
    /// Mean degree λ̄ of joining nodes.
    pub mean_degree: f64,
    /// `r = λ_g / λ_f`.
    pub ratio: f64,
    /// Per-node failure rate; sets the time unit.
    pub fail_rate: f64,
    pub seed: u64,
    /// Simulated time discarded before the first sample.
    pub warmup_time: f64,
    pub sample_interval: f64,
    pub num_samples: usize,
    /// Levels above this are counted in the overflow bucket.
    pub max_level: usize,
}

impl SimConfig {
    /// Defaults: `λ_f = 1`, warmup `50`, one sample per unit time, 1000 samples,
    /// level cap three times the model's truncation level.
    pub fn new(nodes: usize, mean_degree: f64, ratio: f64) -> Self {
        Self {
            nodes,
            mean_degree,
            ratio,
            fail_rate: 1.0,
            seed: 0,
            warmup_time: 50.0,
            sample_interval: 1.0,
            num_samples: 1000,
            max_level: default_max_level(nodes, mean_degree),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.nodes < 2 {
            return bad("nodes must be at least 2");
        }
        if !(self.mean_degree > 0.0 && self.mean_degree.is_finite()) {
            return bad("mean degree must be positive and finite");
        }
        if !(self.ratio > 0.0 && self.ratio.is_finite()) {
            return bad("ratio must be positive and finite");
        }
        if !(self.fail_rate > 0.0 && self.fail_rate.is_finite()) {
            return bad("failure rate must be positive and finite");
        }
        if !(self.warmup_time >= 0.0 && self.warmup_time.is_finite()) {
            return bad("warmup time must be non-negative");
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return bad("sample interval must be positive");
        }
        if self.num_samples == 0 {
            return bad("at least one sample is required");
        }
        Ok(())
    }

    pub fn churn(&self) -> ChurnParams {
        ChurnParams::equilibrium(self.nodes, self.mean_degree, self.fail_rate)
    }

    pub fn cycle_rate(&self) -> f64 {
        self.ratio * self.fail_rate
    }
}

/// Three times the model's truncation level, or 64 if the model cannot be evaluated.
pub fn default_max_level(nodes: usize, mean_degree: f64) -> usize {
    model::pmin_profile(&ModelParams::new(nodes as f64, mean_degree, 1.0))
        .map(|p| 3 * p.x_max())
        .unwrap_or(64)
}

/// One snapshot of the level populations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSample {
    pub t: f64,
    pub size: u64,
    /// Node count per level `0..=max_level`.
    pub n: Vec<u64>,
    /// Sum of aggregates per level (`A_x`).
    pub a_total: Vec<u64>,
    /// Unstable node count per level.
    pub n_us: Vec<u64>,
    /// Nodes at level `∞` or above `max_level`.
    pub overflow: u64,
    /// Degree histogram of the snapshot.
    pub degrees: Vec<u64>,
}

impl LevelSample {
    pub fn is_conserved(&self) -> bool {
        self.n.iter().sum::<u64>() + self.overflow == self.size
    }
}

/// Measures level populations, aggregates and unstable counts on `g`.
pub fn sample_metrics(g: &DynamicGraph, max_level: usize) -> LevelSample {
    let mut s = LevelSample {
        t: 0.0,
        size: g.len() as u64,
        n: vec![0; max_level + 1],
        a_total: vec![0; max_level + 1],
        n_us: vec![0; max_level + 1],
        overflow: 0,
        degrees: g.degree_histogram(),
    };
    for &slot in g.live_slots() {
        let state = g.slot(slot).state;
        match state.level.value().map(|x| x as usize) {
            Some(x) if x <= max_level => {
                s.n[x] += 1;
                s.a_total[x] = s.a_total[x].saturating_add(state.aggregate);
                if protocol::classify_slot(g, slot).is_unstable(state.level) {
                    s.n_us[x] += 1;
                }
            }
            _ => s.overflow += 1,
        }
    }
    s
}

/// Grows the initial configuration from the bare root by joins alone until it
/// holds `nodes` nodes.
pub fn build_initial_config<R: Rng + ?Sized>(
    nodes: usize,
    mean_degree: f64,
    rng: &mut R,
) -> DynamicGraph {
    assert!(nodes >= 1);
    let mut g = DynamicGraph::new();
    while g.len() < nodes {
        let k = sample_join_degree(mean_degree, rng);
        let s = g.join_node_slot(k, rng);
        protocol::join_slot(&mut g, s);
    }
    g
}

/// Time-averaged statistics for one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct LevelStat {
    /// `N_x / N`.
    pub nx_mean: f64,
    pub nx_se: f64,
    /// `A_x / N`.
    pub axn_mean: f64,
    pub axn_se: f64,
    /// `N_x^us / N_x`.
    pub nxus_frac_mean: f64,
    pub nxus_frac_se: f64,
}

/// Reduction of a sample sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub levels: Vec<LevelStat>,
    pub mean_size: f64,
    pub size_se: f64,
    pub overflow_frac: f64,
    /// Time-averaged fraction of nodes with each degree.
    pub degree_freq: Vec<f64>,
    pub num_samples: usize,
    /// Lag-1 autocorrelation of the root aggregate between samples.
    pub a0_lag1_autocorr: f64,
}

impl SampleSummary {
    pub fn a0(&self) -> (f64, f64) {
        let l = self.levels[0];
        (l.axn_mean, l.axn_se)
    }
}

/// Per-level ratio means with batch-means standard errors; fractions are
/// normalised by the mean sampled size.
pub fn reduce(samples: &[LevelSample]) -> Result<SampleSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let levels = samples.iter().map(|s| s.n.len()).max().unwrap_or(0);
    let sizes: Vec<f64> = samples.iter().map(|s| s.size as f64).collect();
    let column = |f: &dyn Fn(&LevelSample) -> &Vec<u64>, x: usize| -> Vec<f64> {
        samples
            .iter()
            .map(|s| f(s).get(x).copied().unwrap_or(0) as f64)
            .collect()
    };
    let mut out = Vec::with_capacity(levels);
    for x in 0..levels {
        let n = column(&|s| &s.n, x);
        let a = column(&|s| &s.a_total, x);
        let us = column(&|s| &s.n_us, x);
        let (nx_mean, nx_se) = stats::ratio_batch_mean_se(&n, &sizes, BATCHES);
        let (axn_mean, axn_se) = stats::ratio_batch_mean_se(&a, &sizes, BATCHES);
        let (nxus_frac_mean, nxus_frac_se) = stats::ratio_batch_mean_se(&us, &n, BATCHES);
        out.push(LevelStat {
            nx_mean,
            nx_se,
            axn_mean,
            axn_se,
            nxus_frac_mean,
            nxus_frac_se,
        });
    }
    let (mean_size, size_se) = stats::batch_mean_se(&sizes, BATCHES);
    let total_size: f64 = sizes.iter().sum();
    let overflow_frac = samples.iter().map(|s| s.overflow as f64).sum::<f64>() / total_size;
    let max_deg = samples.iter().map(|s| s.degrees.len()).max().unwrap_or(0);
    let degree_freq = (0..max_deg)
        .map(|d| column(&|s| &s.degrees, d).iter().sum::<f64>() / total_size)
        .collect();
    let a0_series: Vec<f64> = samples
        .iter()
        .map(|s| s.a_total.first().copied().unwrap_or(0) as f64)
        .collect();
    Ok(SampleSummary {
        levels: out,
        mean_size,
        size_se,
        overflow_frac,
        degree_freq,
        num_samples: samples.len(),
        a0_lag1_autocorr: stats::lag1_autocorrelation(&a0_series),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventCounts {
    pub joins: u64,
    pub failures: u64,
    /// Protocol cycles of non-root nodes.
    pub cycles: u64,
    pub root_cycles: u64,
    /// Queue entries dropped because their node had failed.
    pub stale: u64,
}

/// Event counts accumulated over the sampling window only.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RateCheck {
    pub window: f64,
    pub joins: u64,
    pub failures: u64,
    pub cycles: u64,
    /// Time integral of the live node count over the window.
    pub node_time: f64,
    /// Time integral of the live non-root node count over the window.
    pub nonroot_node_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub summary: SampleSummary,
    pub events: EventCounts,
    pub rates: RateCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Join,
    Fail { slot: u32, id: NodeId },
    Cycle { slot: u32, id: NodeId },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed: BinaryHeap is a max-heap and we want the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Time-ordered event queue with FIFO tie-breaking.
#[derive(Debug, Default)]
struct Scheduler {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl Scheduler {
    fn push(&mut self, time: f64, kind: EventKind) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
        });
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }
}

struct Engine {
    cfg: SimConfig,
    graph: DynamicGraph,
    rng: ChaCha8Rng,
    queue: Scheduler,
    join_clock: Exp<f64>,
    fail_clock: Exp<f64>,
    cycle_clock: Exp<f64>,
    now: f64,
    events: EventCounts,
}

impl Engine {
    fn new(cfg: &SimConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let graph = build_initial_config(cfg.nodes, cfg.mean_degree, &mut rng);
        let churn = cfg.churn();
        let mut engine = Self {
            cfg: cfg.clone(),
            graph,
            rng,
            queue: Scheduler::default(),
            join_clock: Exp::new(churn.join_rate).expect("positive rate"),
            fail_clock: Exp::new(churn.fail_rate).expect("positive rate"),
            cycle_clock: Exp::new(cfg.cycle_rate()).expect("positive rate"),
            now: 0.0,
            events: EventCounts::default(),
        };
        let t = engine.join_clock.sample(&mut engine.rng);
        engine.queue.push(t, EventKind::Join);
        let mut ids: Vec<(NodeId, u32)> = engine
            .graph
            .live_slots()
            .iter()
            .map(|&s| (engine.graph.slot(s).id, s))
            .collect();
        ids.sort_unstable();
        for (id, slot) in ids {
            engine.arm_node(slot, id);
        }
        engine
    }

    fn arm_node(&mut self, slot: u32, id: NodeId) {
        if slot != ROOT_SLOT {
            let t = self.now + self.fail_clock.sample(&mut self.rng);
            self.queue.push(t, EventKind::Fail { slot, id });
        }
        let t = self.now + self.cycle_clock.sample(&mut self.rng);
        self.queue.push(t, EventKind::Cycle { slot, id });
    }

    /// Advances to `until`, processing every event strictly before it. When
    /// `rates` is set, event counts and node-time integrals are accumulated.
    fn advance(&mut self, until: f64, rates: &mut Option<&mut RateCheck>) {
        while let Some(ev) = self.queue.heap.peek().copied() {
            if ev.time >= until {
                break;
            }
            self.queue.pop();
            if let Some(rc) = rates.as_deref_mut() {
                let dt = ev.time - self.now;
                let live = self.graph.len() as f64;
                rc.node_time += live * dt;
                rc.nonroot_node_time += (live - 1.0) * dt;
            }
            self.now = ev.time;
            match ev.kind {
                EventKind::Join => {
                    let k = sample_join_degree(self.cfg.mean_degree, &mut self.rng);
                    let slot = self.graph.join_node_slot(k, &mut self.rng);
                    protocol::join_slot(&mut self.graph, slot);
                    let id = self.graph.slot(slot).id;
                    self.arm_node(slot, id);
                    let t = self.now + self.join_clock.sample(&mut self.rng);
                    self.queue.push(t, EventKind::Join);
                    self.events.joins += 1;
                    if let Some(rc) = rates.as_deref_mut() {
                        rc.joins += 1;
                    }
                }
                EventKind::Fail { slot, id } => {
                    debug_assert!(self.graph.is_live_slot(slot, id));
                    self.graph.fail_slot(slot);
                    self.events.failures += 1;
                    if let Some(rc) = rates.as_deref_mut() {
                        rc.failures += 1;
                    }
                }
                EventKind::Cycle { slot, id } => {
                    if !self.graph.is_live_slot(slot, id) {
                        self.events.stale += 1;
                        continue;
                    }
                    protocol::update_slot(&mut self.graph, slot);
                    if slot == ROOT_SLOT {
                        self.events.root_cycles += 1;
                    } else {
                        self.events.cycles += 1;
                    }
                    if let Some(rc) = rates.as_deref_mut() {
                        rc.cycles += 1;
                    }
                    let t = self.now + self.cycle_clock.sample(&mut self.rng);
                    self.queue.push(t, EventKind::Cycle { slot, id });
                }
            }
        }
        if let Some(rc) = rates.as_deref_mut() {
            let live = self.graph.len() as f64;
            rc.node_time += live * (until - self.now);
            rc.nonroot_node_time += (live - 1.0) * (until - self.now);
        }
        self.now = until;
    }
}

/// Runs a simulation and returns both the reduced result and the raw samples.
pub fn run_with_samples(cfg: &SimConfig) -> Result<(SimResult, Vec<LevelSample>)> {
    cfg.validate()?;
    let mut engine = Engine::new(cfg);
    engine.advance(cfg.warmup_time, &mut None);
    let start = engine.now;
    let mut rates = RateCheck::default();
    let mut samples = Vec::with_capacity(cfg.num_samples);
    for i in 0..cfg.num_samples {
        let t = cfg.warmup_time + i as f64 * cfg.sample_interval;
        engine.advance(t, &mut Some(&mut rates));
        let mut sample = sample_metrics(&engine.graph, cfg.max_level);
        sample.t = t;
        debug_assert!(sample.is_conserved());
        debug_assert_eq!(engine.graph.state(engine.graph.root()).level, Level::ZERO);
        samples.push(sample);
    }
    rates.window = engine.now - start;
    let summary = reduce(&samples)?;
    Ok((
        SimResult {
            config: cfg.clone(),
            summary,
            events: engine.events,
            rates,
        },
        samples,
    ))
}

/// Runs a simulation. Deterministic in `cfg` (including its seed).
pub fn run(cfg: &SimConfig) -> Result<SimResult> {
    run_with_samples(cfg).map(|(r, _)| r)
}
