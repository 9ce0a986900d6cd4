//! Oracles shared by the integration tests. Nothing here calls the code under
//! test for the quantity being checked.

#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};
use treecount::protocol::{self, Level, NodeState};
use treecount::{DynamicGraph, NodeId};

/// Breadth-first distances from `s`.
pub fn bfs(g: &DynamicGraph, s: NodeId) -> HashMap<NodeId, u32> {
    let mut dist = HashMap::from([(s, 0)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        for w in g.neighbors(u) {
            dist.entry(w).or_insert_with(|| {
                queue.push_back(w);
                du + 1
            });
        }
    }
    dist
}

pub fn diameter(g: &DynamicGraph) -> u32 {
    g.node_ids()
        .into_iter()
        .map(|v| bfs(g, v).into_values().max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// A connected `G(n, λ̄/n)`-like graph around the root: random edges over
/// `n` nodes, then everything outside the root's component removed.
pub fn connected_random_graph(n: usize, mean_degree: f64, seed: u64) -> DynamicGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DynamicGraph::new();
    let mut ids = vec![g.root()];
    for _ in 1..n {
        ids.push(g.add_node(&[]));
    }
    let p = mean_degree / (n - 1) as f64;
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_edge(ids[i], ids[j]);
            }
        }
    }
    let reach = bfs(&g, g.root());
    for v in ids {
        if !reach.contains_key(&v) {
            g.fail_node(v);
        }
    }
    g
}

/// Random registers on every non-root node: finite levels (including
/// impossibly low ones) or `∞`, arbitrary aggregates, and parents that may be
/// non-neighbours or nodes that never existed.
pub fn scramble_registers(g: &mut DynamicGraph, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_id = g.node_ids().last().unwrap().0 + 50;
    for v in g.node_ids() {
        if v == g.root() {
            continue;
        }
        let level = if rng.random_bool(0.2) {
            Level::INFINITY
        } else {
            Level::finite(rng.random_range(0..2 * g.len() as u32))
        };
        g.set_state(
            v,
            NodeState {
                level,
                aggregate: rng.random_range(0..10 * g.len() as u64),
                parent: NodeId(rng.random_range(0..max_id)),
            },
        );
    }
    let root = g.root();
    let mut rs = *g.state(root);
    rs.aggregate = rng.random_range(0..10 * g.len() as u64);
    g.set_state(root, rs);
}

/// One synchronous sweep: every node's update is computed from the same
/// snapshot, then all are written.
pub fn synchronous_sweep(g: &mut DynamicGraph) {
    let ids = g.node_ids();
    let next: Vec<NodeState> = ids
        .iter()
        .map(|&v| {
            if v == g.root() {
                protocol::root_update(g)
            } else {
                protocol::update_node(v, g)
            }
        })
        .collect();
    for (v, s) in ids.into_iter().zip(next) {
        g.set_state(v, s);
    }
}

pub fn levels_match_bfs(g: &DynamicGraph, dist: &HashMap<NodeId, u32>) -> bool {
    g.node_ids()
        .iter()
        .all(|v| g.state(*v).level == Level::finite(dist[v]))
}

/// Sweeps until levels equal BFS distances and the root counts every node.
/// Returns `(sweeps until levels exact, sweeps until fully converged)`.
pub fn sweeps_to_converge(g: &mut DynamicGraph, cap: usize) -> (Option<usize>, Option<usize>) {
    let dist = bfs(g, g.root());
    let n = g.len() as u64;
    let mut levels_at = None;
    for sweep in 0..=cap {
        let levels_ok = levels_match_bfs(g, &dist);
        if levels_ok && levels_at.is_none() {
            levels_at = Some(sweep);
        }
        if levels_ok && g.state(g.root()).aggregate == n {
            return (levels_at, Some(sweep));
        }
        synchronous_sweep(g);
    }
    (levels_at, None)
}

/// `p_min(x - 1)` by direct summation over the join degree `k`:
/// `Σ_k Q(k) [(1 - S_{x-2})^k - (1 - S_{x-1})^k]`.
pub fn pmin_direct(mean_degree: f64, s_lo: f64, s_hi: f64) -> f64 {
    let mut total = 0.0;
    let mut q = (-mean_degree).exp();
    let (a, b) = (1.0 - s_lo, 1.0 - s_hi);
    let (mut ak, mut bk) = (1.0, 1.0);
    for k in 0..10_000u32 {
        if k > 0 {
            q *= mean_degree / k as f64;
            ak *= a;
            bk *= b;
        }
        total += q * (ak - bk);
        if k as f64 > mean_degree && q < 1e-300 {
            break;
        }
    }
    total
}

/// Pearson chi-square test of `freq` (frequencies scaled to `n` observations) against
/// Poisson(`mean`), pooling the tails until every expected count is at least 5.
/// Returns `(statistic, degrees of freedom, p-value)`.
pub fn poisson_gof(freq: &[f64], n: f64, mean: f64) -> (f64, usize, f64) {
    let pois = Poisson::new(mean).unwrap();
    let kmax = freq.len().max(3 * mean as usize + 10);
    let mut bins: Vec<(f64, f64)> = (0..kmax)
        .map(|k| {
            (
                freq.get(k).copied().unwrap_or(0.0) * n,
                pois.pmf(k as u64) * n,
            )
        })
        .collect();
    let obs_tail: f64 = freq.iter().skip(kmax).sum::<f64>() * n;
    let exp_tail = n - bins.iter().map(|b| b.1).sum::<f64>();
    bins.push((obs_tail, exp_tail));
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for b in bins {
        acc.0 += b.0;
        acc.1 += b.1;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if let Some(last) = pooled.last_mut() {
        last.0 += acc.0;
        last.1 += acc.1;
    }
    let stat: f64 = pooled.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = pooled.len() - 1;
    let p = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(stat);
    (stat, dof, p)
}
