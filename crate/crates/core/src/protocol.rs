//! Register semantics of the tree-based counting protocol.
//!
//! Every node holds a level (believed hop distance to the root), a partial
//! aggregate (believed size of its subtree) and a parent pointer. On an update
//! a node reads its neighbours' registers and sets
//!
//! * `level := min(neighbour levels) + 1`, with `min(∅) = ∞` and `∞ + 1 = ∞`,
//! * `aggregate := 1 + Σ aggregate(u)` over neighbours `u` whose parent is the node,
//! * `parent :=` a neighbour of minimal level, or itself when it has no neighbours.
//!
//! The parent is sticky: it is only replaced when it is no longer a neighbour or
//! a neighbour of strictly lower level exists. Replacement picks the lowest id
//! among the minimal-level neighbours. The root keeps `(0, self)` and refreshes
//! only its aggregate.

use std::fmt;

use crate::graph::{DynamicGraph, NodeId, ROOT_SLOT};

/// A level register: a finite hop count or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u32);

impl Level {
    pub const ZERO: Level = Level(0);
    pub const INFINITY: Level = Level(u32::MAX);

    /// # Panics
    ///
    /// If `x` collides with the `∞` sentinel.
    pub fn finite(x: u32) -> Self {
        assert!(x < u32::MAX, "finite level out of range");
        Level(x)
    }

    pub fn is_finite(self) -> bool {
        self != Self::INFINITY
    }

    pub fn value(self) -> Option<u32> {
        self.is_finite().then_some(self.0)
    }

    /// `self + 1` with `∞ + 1 = ∞`. Finite levels saturate just below the sentinel.
    pub fn succ(self) -> Self {
        if self.is_finite() {
            Level((self.0 + 1).min(u32::MAX - 1))
        } else {
            self
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(x) => write!(f, "{x}"),
            None => f.write_str("inf"),
        }
    }
}

/// The three registers of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeState {
    pub level: Level,
    /// Every node counts itself, so this is at least 1. Saturates at `u64::MAX`.
    pub aggregate: u64,
    /// May refer to a node that has since failed, or to the node itself.
    pub parent: NodeId,
}

impl NodeState {
    /// Registers of a node with no information: `(∞, 1, self)`.
    pub fn detached(v: NodeId) -> Self {
        Self {
            level: Level::INFINITY,
            aggregate: 1,
            parent: v,
        }
    }
}

/// Whether a node's level is consistent with its neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    /// Minimum neighbour level `y` differs from `level - 1`; an update moves the
    /// node to `y + 1`.
    Unstable(Level),
    /// No neighbours at all.
    Isolated,
}

impl StabilityClass {
    /// Whether the node's current level will change at its next update.
    /// An isolated node at a finite level counts, as it will drop to `∞`.
    pub fn is_unstable(self, level: Level) -> bool {
        match self {
            StabilityClass::Stable => false,
            StabilityClass::Unstable(_) => true,
            StabilityClass::Isolated => level.is_finite(),
        }
    }
}

/// New registers of non-root node `v` after one update. Does not modify `g`.
///
/// # Panics
///
/// If `v` is not live or is the root.
pub fn update_node(v: NodeId, g: &DynamicGraph) -> NodeState {
    let s = g.expect_slot(v);
    assert_ne!(s, ROOT_SLOT, "the root runs root_update");
    compute_update(g, s)
}

/// Root registers after one update: only the aggregate changes.
pub fn root_update(g: &DynamicGraph) -> NodeState {
    compute_root_update(g)
}

/// Registers of a freshly joined node: aggregate 1, level and parent from its
/// neighbours as in [`update_node`].
pub fn init_joined_node(v: NodeId, g: &DynamicGraph) -> NodeState {
    let s = g.expect_slot(v);
    compute_join(g, s)
}

pub fn classify(v: NodeId, g: &DynamicGraph) -> StabilityClass {
    classify_slot(g, g.expect_slot(v))
}

/// Applies one update to `v` (root or not) in place.
pub fn apply_update(v: NodeId, g: &mut DynamicGraph) {
    let s = g.expect_slot(v);
    update_slot(g, s);
}

pub(crate) fn update_slot(g: &mut DynamicGraph, s: u32) {
    let next = if s == ROOT_SLOT {
        compute_root_update(g)
    } else {
        compute_update(g, s)
    };
    *g.slot_state_mut(s) = next;
}

pub(crate) fn join_slot(g: &mut DynamicGraph, s: u32) {
    let next = compute_join(g, s);
    *g.slot_state_mut(s) = next;
}

struct Scan {
    min_level: Level,
    /// Lowest-id neighbour among those at `min_level`.
    best: Option<NodeId>,
    /// Level of the current parent, if it is a neighbour.
    parent_level: Option<Level>,
    children_sum: u64,
}

fn scan(g: &DynamicGraph, s: u32) -> Scan {
    let me = g.slot(s);
    let mut out = Scan {
        min_level: Level::INFINITY,
        best: None,
        parent_level: None,
        children_sum: 0,
    };
    for &u in &me.adj {
        let other = g.slot(u);
        let lvl = other.state.level;
        match out.best {
            Some(b) if lvl > out.min_level || (lvl == out.min_level && other.id > b) => {}
            _ => {
                out.min_level = lvl;
                out.best = Some(other.id);
            }
        }
        if other.id == me.state.parent {
            out.parent_level = Some(lvl);
        }
        if other.state.parent == me.id {
            out.children_sum = out.children_sum.saturating_add(other.state.aggregate);
        }
    }
    out
}

fn choose_parent(me: NodeId, current: NodeId, sc: &Scan) -> NodeId {
    match (sc.best, sc.parent_level) {
        (None, _) => me,
        (Some(_), Some(pl)) if pl == sc.min_level => current,
        (Some(b), _) => b,
    }
}

fn compute_update(g: &DynamicGraph, s: u32) -> NodeState {
    let me = g.slot(s);
    let sc = scan(g, s);
    NodeState {
        level: sc.min_level.succ(),
        aggregate: sc.children_sum.saturating_add(1),
        parent: choose_parent(me.id, me.state.parent, &sc),
    }
}

fn compute_join(g: &DynamicGraph, s: u32) -> NodeState {
    NodeState {
        aggregate: 1,
        ..compute_update(g, s)
    }
}

fn compute_root_update(g: &DynamicGraph) -> NodeState {
    let root = g.slot(ROOT_SLOT);
    let children_sum = root
        .adj
        .iter()
        .map(|&u| g.slot(u))
        .filter(|o| o.state.parent == root.id)
        .fold(0u64, |acc, o| acc.saturating_add(o.state.aggregate));
    NodeState {
        level: Level::ZERO,
        aggregate: children_sum.saturating_add(1),
        parent: root.id,
    }
}

pub(crate) fn classify_slot(g: &DynamicGraph, s: u32) -> StabilityClass {
    if s == ROOT_SLOT {
        return StabilityClass::Stable;
    }
    let me = g.slot(s);
    let Some(min) = me.adj.iter().map(|&u| g.slot(u).state.level).min() else {
        return StabilityClass::Isolated;
    };
    if min.succ() == me.state.level {
        StabilityClass::Stable
    } else {
        StabilityClass::Unstable(min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(level: u32, aggregate: u64, parent: NodeId) -> NodeState {
        NodeState {
            level: Level::finite(level),
            aggregate,
            parent,
        }
    }

    #[test]
    fn infinity_arithmetic() {
        assert_eq!(Level::INFINITY.succ(), Level::INFINITY);
        assert_eq!(Level::finite(3).succ(), Level::finite(4));
        assert!(Level::finite(1_000_000) < Level::INFINITY);
        assert_eq!(Level::INFINITY.to_string(), "inf");
    }

    #[test]
    fn node_next_to_root_gets_level_one() {
        let mut g = DynamicGraph::new();
        let r = g.root();
        let v = g.add_node(&[r]);
        g.set_state(r, st(0, 7, r));
        assert_eq!(update_node(v, &g), st(1, 1, r));
    }

    #[test]
    fn isolated_node_goes_to_infinity() {
        let mut g = DynamicGraph::new();
        let v = g.add_node(&[]);
        g.set_state(v, st(4, 9, NodeId(77)));
        assert_eq!(
            update_node(v, &g),
            NodeState {
                level: Level::INFINITY,
                aggregate: 1,
                parent: v
            }
        );
        assert_eq!(classify(v, &g), StabilityClass::Isolated);
    }

    #[test]
    fn mixed_neighbourhood_fixture() {
        // v at level 3; neighbours a (2), b (2), c (5). b and c point at v with
        // aggregates 4 and 7. v's parent is a.
        let mut g = DynamicGraph::new();
        let r = g.root();
        let v = g.add_node(&[]);
        let a = g.add_node(&[v]);
        let b = g.add_node(&[v]);
        let c = g.add_node(&[v]);
        g.set_state(v, st(3, 1, a));
        g.set_state(a, st(2, 3, r));
        g.set_state(b, st(2, 4, v));
        g.set_state(c, st(5, 7, v));
        assert_eq!(update_node(v, &g), st(3, 12, a));

        // Parent b instead: still minimal, kept.
        g.set_state(v, st(3, 1, b));
        assert_eq!(update_node(v, &g).parent, b);
    }

    #[test]
    fn parent_switches_only_for_strictly_lower_level() {
        let mut g = DynamicGraph::new();
        let r = g.root();
        let v = g.add_node(&[]);
        let hi = g.add_node(&[v]);
        let lo_b = g.add_node(&[v]);
        let lo_a = g.add_node(&[v]);
        g.set_state(hi, st(3, 1, r));
        g.set_state(lo_a, st(2, 1, r));
        g.set_state(lo_b, st(2, 1, r));
        g.set_state(v, st(4, 1, hi));
        // Lowest id among the level-2 neighbours.
        assert_eq!(update_node(v, &g).parent, lo_b.min(lo_a));
    }

    #[test]
    fn dead_parent_is_replaced() {
        let mut g = DynamicGraph::new();
        let r = g.root();
        let p = g.add_node(&[r]);
        let q = g.add_node(&[r]);
        let v = g.add_node(&[p, q]);
        g.set_state(p, st(1, 1, r));
        g.set_state(q, st(1, 1, r));
        g.set_state(v, st(2, 1, p));
        assert_eq!(update_node(v, &g).parent, p);
        g.fail_node(p);
        assert_eq!(update_node(v, &g), st(2, 1, q));
    }

    #[test]
    fn root_sums_children() {
        let mut g = DynamicGraph::new();
        let r = g.root();
        assert_eq!(root_update(&g), st(0, 1, r));
        for agg in [10, 20, 30] {
            let c = g.add_node(&[r]);
            g.set_state(c, st(1, agg, r));
        }
        // A neighbour pointing elsewhere does not count.
        let other = g.add_node(&[r]);
        g.set_state(other, st(1, 100, NodeId(999)));
        assert_eq!(root_update(&g), st(0, 61, r));
    }

    #[test]
    fn join_initialisation() {
        let mut g = DynamicGraph::new();
        let r = g.root();
        let one = g.add_node(&[r]);
        let four = g.add_node(&[]);
        g.set_state(one, st(1, 5, r));
        g.set_state(four, st(4, 2, r));
        let j = g.add_node(&[four, one]);
        assert_eq!(init_joined_node(j, &g), st(2, 1, one));

        let lonely = g.add_node(&[]);
        assert_eq!(init_joined_node(lonely, &g), NodeState::detached(lonely));

        let lost = g.add_node(&[]);
        let attached = g.add_node(&[lost]);
        let s = init_joined_node(attached, &g);
        assert_eq!((s.level, s.aggregate), (Level::INFINITY, 1));
    }

    #[test]
    fn classification() {
        let mut g = DynamicGraph::new();
        let r = g.root();
        assert_eq!(classify(r, &g), StabilityClass::Stable);

        let v = g.add_node(&[]);
        let n1 = g.add_node(&[v]);
        let n3 = g.add_node(&[v]);
        g.set_state(v, st(2, 1, n1));
        g.set_state(n1, st(1, 1, r));
        g.set_state(n3, st(3, 1, v));
        assert_eq!(classify(v, &g), StabilityClass::Stable);

        g.set_state(n1, st(4, 1, r));
        assert_eq!(classify(v, &g), StabilityClass::Unstable(Level::finite(3)));
        apply_update(v, &mut g);
        assert_eq!(g.state(v).level, Level::finite(4));
    }
}
