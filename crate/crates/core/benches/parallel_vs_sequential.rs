use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ldp_core::experiment::{run_experiment, topology_rng, traffic_rng, ExperimentConfig};
use ldp_core::par::Execution;
use ldp_core::schedulability::{test_network, CachedTester};
use ldp_core::topology::{generate_topology, DeploymentParams};
use ldp_core::traffic::{generate_traffic, TrafficParams};

fn schedulability(c: &mut Criterion) {
    let t = generate_topology(&DeploymentParams::network2(), &mut topology_rng(1)).unwrap();
    let tester = CachedTester::new(&t.graph);
    let traffic = generate_traffic(&t.graph, 4, &TrafficParams::default(), &mut traffic_rng(1, 4), |g, tr, id, n| {
        tester.passes(g, tr, id, n)
    })
    .unwrap()
    .traffic;
    let mut group = c.benchmark_group("test_network");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| test_network(&t.graph, &traffic, 4, exec).unwrap())
        });
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let config = ExperimentConfig {
        horizon: 1_000,
        seeds: vec![0, 1, 2, 3],
        channels: vec![3, 4],
        ..ExperimentConfig::default()
    };
    let mut group = c.benchmark_group("experiment");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_experiment(&config, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, schedulability, sweep);
criterion_main!(benches);
