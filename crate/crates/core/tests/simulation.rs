mod common;

use common::poisson_gof;
use treecount::sim::{self, SimConfig};

fn steady(nodes: usize, degree: f64, ratio: f64, seed: u64) -> SimConfig {
    SimConfig {
        seed,
        warmup_time: 20.0,
        sample_interval: 2.0,
        num_samples: 400,
        ..SimConfig::new(nodes, degree, ratio)
    }
}

#[test]
fn mean_size_is_the_target() {
    let res = sim::run(&steady(300, 4.0, 10.0, 1)).unwrap();
    let s = &res.summary;
    assert!(s.size_se > 0.0);
    assert!(
        (s.mean_size - 300.0).abs() <= 3.0 * s.size_se,
        "{} ± {}",
        s.mean_size,
        s.size_se
    );
}

#[test]
fn degree_law_is_poisson() {
    for (degree, seed) in [(4.0, 2), (8.0, 3)] {
        let res = sim::run(&steady(300, degree, 10.0, seed)).unwrap();
        let s = &res.summary;
        let observations = s.mean_size * s.num_samples as f64;
        let (stat, dof, p) = poisson_gof(&s.degree_freq, observations, degree);
        assert!(p > 0.01, "λ̄={degree}: chi2={stat} dof={dof} p={p}");
    }
}

#[test]
fn event_rates_match_their_clocks() {
    let cfg = steady(200, 6.0, 20.0, 4);
    let res = sim::run(&cfg).unwrap();
    let rc = res.rates;
    let within =
        |count: u64, expected: f64| (count as f64 - expected).abs() <= 3.0 * expected.sqrt();
    let join_expect = cfg.nodes as f64 * cfg.fail_rate * rc.window;
    assert!(
        within(rc.joins, join_expect),
        "joins {} vs {join_expect}",
        rc.joins
    );
    let fail_expect = cfg.fail_rate * rc.nonroot_node_time;
    assert!(
        within(rc.failures, fail_expect),
        "failures {} vs {fail_expect}",
        rc.failures
    );
    let cycle_expect = cfg.ratio * cfg.fail_rate * rc.node_time;
    assert!(
        within(rc.cycles, cycle_expect),
        "cycles {} vs {cycle_expect}",
        rc.cycles
    );
}

#[test]
fn every_sample_is_conserved() {
    let (res, samples) = sim::run_with_samples(&steady(150, 8.0, 50.0, 5)).unwrap();
    assert_eq!(samples.len(), 400);
    assert!(samples.iter().all(|s| s.is_conserved()));
    assert!(samples.iter().all(|s| s.n[0] == 1 && s.n_us[0] == 0));
    assert!(res.summary.levels[0].nx_mean > 0.0);
}

#[test]
fn seeds_change_the_trajectory() {
    let short = |seed| SimConfig {
        num_samples: 30,
        ..steady(100, 4.0, 5.0, seed)
    };
    let a = sim::run(&short(1)).unwrap();
    let b = sim::run(&short(1)).unwrap();
    let c = sim::run(&short(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.summary, c.summary);
}
