//! Dynamic random graph under Poisson churn.
//!
//! Joining nodes draw a degree `k` from Poisson(λ̄) and attach to `k`
//! distinct live nodes chosen uniformly at random (the root included). Failures
//! remove a node together with its edges. The root never fails.
//!
//! Nodes live in a slab of reusable slots; [`NodeId`]s are handed out from a
//! monotone counter and never reused, so a stale parent register can never
//! alias a newer node even when its slot has been recycled.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::protocol::{Level, NodeState};

/// Identity of a node within one run. Monotonically assigned, never reused.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Churn rates for a network whose expected size is `target_size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnParams {
    pub target_size: usize,
    pub mean_degree: f64,
    /// Failure rate of each live non-root node.
    pub fail_rate: f64,
    /// Rate of the global join stream.
    pub join_rate: f64,
}

impl ChurnParams {
    /// Rates in stochastic equilibrium: `join_rate = target_size * fail_rate`.
    pub fn equilibrium(target_size: usize, mean_degree: f64, fail_rate: f64) -> Self {
        Self {
            target_size,
            mean_degree,
            fail_rate,
            join_rate: target_size as f64 * fail_rate,
        }
    }
}

/// Draws a joinee's a-priori degree from Poisson(`mean_degree`).
pub fn sample_join_degree<R: Rng + ?Sized>(mean_degree: f64, rng: &mut R) -> usize {
    assert!(mean_degree > 0.0, "mean degree must be positive");
    let poisson = Poisson::new(mean_degree).expect("positive finite mean");
    poisson.sample(rng) as usize
}

#[derive(Debug, Clone)]
pub(crate) struct Slot {
    pub(crate) id: NodeId,
    pub(crate) alive: bool,
    pub(crate) state: NodeState,
    pub(crate) adj: Vec<u32>,
    live_pos: u32,
}

/// Undirected simple graph plus the register state of every live node.
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    slots: Vec<Slot>,
    free: Vec<u32>,
    /// Slots of live nodes, in no particular order. Used for uniform attachment.
    live: Vec<u32>,
    index: HashMap<NodeId, u32>,
    next_id: u64,
}

pub(crate) const ROOT_SLOT: u32 = 0;

impl Default for DynamicGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl DynamicGraph {
    /// A graph holding only the root, with registers `(0, 1, self)`.
    pub fn new() -> Self {
        let root = NodeId(0);
        let mut g = Self {
            slots: Vec::new(),
            free: Vec::new(),
            live: Vec::new(),
            index: HashMap::new(),
            next_id: 0,
        };
        let slot = g.alloc(NodeState {
            level: Level::ZERO,
            aggregate: 1,
            parent: root,
        });
        debug_assert_eq!(slot, ROOT_SLOT);
        g
    }

    pub fn root(&self) -> NodeId {
        self.slots[ROOT_SLOT as usize].id
    }

    /// Number of live nodes, root included.
    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.index.contains_key(&v)
    }

    /// Live node ids in ascending order.
    pub fn node_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .live
            .iter()
            .map(|&s| self.slots[s as usize].id)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        let slot = self.expect_slot(v);
        self.slots[slot as usize]
            .adj
            .iter()
            .map(move |&u| self.slots[u as usize].id)
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.slots[self.expect_slot(v) as usize].adj.len()
    }

    pub fn is_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        match (self.slot_of(u), self.slot_of(v)) {
            (Some(a), Some(b)) => self.slots[a as usize].adj.contains(&b),
            _ => false,
        }
    }

    pub fn state(&self, v: NodeId) -> &NodeState {
        &self.slots[self.expect_slot(v) as usize].state
    }

    /// Overwrites a node's registers. Used to apply protocol updates and to set
    /// up arbitrary (including adversarial) configurations.
    pub fn set_state(&mut self, v: NodeId, state: NodeState) {
        let slot = self.expect_slot(v);
        self.slots[slot as usize].state = state;
    }

    /// Adds a node with edges to the given distinct live nodes and placeholder
    /// registers `(∞, 1, self)`.
    pub fn add_node(&mut self, targets: &[NodeId]) -> NodeId {
        let slots: Vec<u32> = targets.iter().map(|&t| self.expect_slot(t)).collect();
        let s = self.add_node_slots(&slots);
        self.slots[s as usize].id
    }

    /// Adds an undirected edge between two distinct live nodes. No-op if present.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) {
        assert_ne!(u, v, "self-loops are not allowed");
        let (a, b) = (self.expect_slot(u), self.expect_slot(v));
        if !self.slots[a as usize].adj.contains(&b) {
            self.slots[a as usize].adj.push(b);
            self.slots[b as usize].adj.push(a);
        }
    }

    /// Joins a new node with `k` edges to distinct uniformly chosen live nodes
    /// (capped at the current size). Registers are left as `(∞, 1, self)`; the
    /// caller runs the join protocol.
    pub fn join_node<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> NodeId {
        let s = self.join_node_slot(k, rng);
        self.slots[s as usize].id
    }

    /// Removes a live non-root node and all incident edges.
    ///
    /// # Panics
    ///
    /// If `v` is the root or not live.
    pub fn fail_node(&mut self, v: NodeId) {
        let slot = self.expect_slot(v);
        self.fail_slot(slot);
    }

    /// `hist[d]` is the number of live nodes of degree `d`.
    pub fn degree_histogram(&self) -> Vec<u64> {
        let mut hist = Vec::new();
        for &s in &self.live {
            let d = self.slots[s as usize].adj.len();
            if d >= hist.len() {
                hist.resize(d + 1, 0);
            }
            hist[d] += 1;
        }
        hist
    }

    /// Checks symmetry, irreflexivity, liveness of endpoints and root presence.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.slots[ROOT_SLOT as usize].alive {
            return Err("root is not live".into());
        }
        for &s in &self.live {
            let slot = &self.slots[s as usize];
            for (i, &u) in slot.adj.iter().enumerate() {
                if u == s {
                    return Err(format!("self-loop at {}", slot.id));
                }
                let other = &self.slots[u as usize];
                if !other.alive {
                    return Err(format!("{} is adjacent to a dead slot", slot.id));
                }
                if !other.adj.contains(&s) {
                    return Err(format!("edge {}-{} is not symmetric", slot.id, other.id));
                }
                if slot.adj[..i].contains(&u) {
                    return Err(format!("duplicate edge {}-{}", slot.id, other.id));
                }
            }
        }
        Ok(())
    }

    // Slot-level access for the protocol and the simulator hot loop.

    pub(crate) fn slot_of(&self, v: NodeId) -> Option<u32> {
        self.index.get(&v).copied()
    }

    pub(crate) fn expect_slot(&self, v: NodeId) -> u32 {
        self.slot_of(v)
            .unwrap_or_else(|| panic!("node {v} is not live"))
    }

    pub(crate) fn slot(&self, s: u32) -> &Slot {
        &self.slots[s as usize]
    }

    pub(crate) fn slot_state_mut(&mut self, s: u32) -> &mut NodeState {
        &mut self.slots[s as usize].state
    }

    pub(crate) fn live_slots(&self) -> &[u32] {
        &self.live
    }

    pub(crate) fn is_live_slot(&self, s: u32, id: NodeId) -> bool {
        self.slots
            .get(s as usize)
            .is_some_and(|slot| slot.alive && slot.id == id)
    }

    pub(crate) fn join_node_slot<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> u32 {
        assert!(!self.live.is_empty(), "cannot join an empty graph");
        let k = k.min(self.live.len());
        let targets: Vec<u32> = rand::seq::index::sample(rng, self.live.len(), k)
            .into_iter()
            .map(|i| self.live[i])
            .collect();
        self.add_node_slots(&targets)
    }

    pub(crate) fn fail_slot(&mut self, s: u32) {
        assert_ne!(s, ROOT_SLOT, "the root never fails");
        assert!(self.slots[s as usize].alive, "node is already dead");
        let adj = std::mem::take(&mut self.slots[s as usize].adj);
        for &u in &adj {
            let other = &mut self.slots[u as usize].adj;
            if let Some(pos) = other.iter().position(|&w| w == s) {
                other.swap_remove(pos);
            }
        }
        let pos = self.slots[s as usize].live_pos as usize;
        self.live.swap_remove(pos);
        if let Some(&moved) = self.live.get(pos) {
            self.slots[moved as usize].live_pos = pos as u32;
        }
        let slot = &mut self.slots[s as usize];
        slot.alive = false;
        self.index.remove(&slot.id);
        self.free.push(s);
    }

    fn add_node_slots(&mut self, targets: &[u32]) -> u32 {
        let id = NodeId(self.next_id);
        let s = self.alloc(NodeState::detached(id));
        for &t in targets {
            assert!(self.slots[t as usize].alive, "attachment target is dead");
            assert!(
                !self.slots[s as usize].adj.contains(&t),
                "duplicate attachment target"
            );
            self.slots[s as usize].adj.push(t);
            self.slots[t as usize].adj.push(s);
        }
        s
    }

    fn alloc(&mut self, state: NodeState) -> u32 {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        let live_pos = self.live.len() as u32;
        let fresh = Slot {
            id,
            alive: true,
            state,
            adj: Vec::new(),
            live_pos,
        };
        let s = match self.free.pop() {
            Some(s) => {
                self.slots[s as usize] = fresh;
                s
            }
            None => {
                self.slots.push(fresh);
                (self.slots.len() - 1) as u32
            }
        };
        self.live.push(s);
        self.index.insert(id, s);
        s
    }
}
