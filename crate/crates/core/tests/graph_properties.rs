use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use treecount::{DynamicGraph, NodeId};

#[derive(Debug, Clone)]
enum Op {
    Join(usize),
    Fail(usize),
    Edge(usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..12).prop_map(Op::Join),
        any::<usize>().prop_map(Op::Fail),
        (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Op::Edge(a, b)),
    ]
}

proptest! {
    #[test]
    fn adjacency_stays_symmetric(ops in prop::collection::vec(op(), 1..200), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = DynamicGraph::new();
        let mut ever: Vec<NodeId> = vec![g.root()];
        for o in ops {
            match o {
                Op::Join(k) => {
                    let before = g.len();
                    let v = g.join_node(k, &mut rng);
                    prop_assert_eq!(g.degree(v), k.min(before));
                    prop_assert!(!ever.contains(&v));
                    ever.push(v);
                }
                Op::Fail(i) => {
                    let ids = g.node_ids();
                    let v = ids[i % ids.len()];
                    if v != g.root() {
                        let nbrs: Vec<_> = g.neighbors(v).collect();
                        g.fail_node(v);
                        prop_assert!(!g.contains(v));
                        for u in nbrs {
                            prop_assert!(!g.is_adjacent(u, v));
                        }
                    }
                }
                Op::Edge(a, b) => {
                    let ids = g.node_ids();
                    let (u, v) = (ids[a % ids.len()], ids[b % ids.len()]);
                    if u != v {
                        g.add_edge(u, v);
                        prop_assert!(g.is_adjacent(u, v) && g.is_adjacent(v, u));
                    }
                }
            }
            prop_assert!(g.contains(g.root()));
            prop_assert_eq!(g.check_invariants(), Ok(()));
            for u in g.node_ids() {
                for w in g.neighbors(u) {
                    prop_assert!(g.is_adjacent(w, u));
                    prop_assert!(w != u);
                }
            }
            let hist = g.degree_histogram();
            prop_assert_eq!(hist.iter().sum::<u64>(), g.len() as u64);
        }
    }
}
