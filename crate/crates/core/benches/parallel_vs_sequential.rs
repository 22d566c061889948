use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sourceloc::graph::{generate, GraphKind};
use sourceloc::harness::{run_on_graph, ModelFamily, PlacedObservers, Protocol};
use sourceloc::placement::lv_obs;
use sourceloc::{par, Prior};

fn graph() -> sourceloc::Graph {
    generate(&GraphKind::RandomGeometric { n: 120, radius: 0.18, seed: 3 }).unwrap().graph
}

fn placement(c: &mut Criterion) {
    let g = graph();
    g.distances();
    let mut group = c.benchmark_group("lv_obs");
    for parallel in [true, false] {
        let name = if parallel { "parallel" } else { "sequential" };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            par::set_parallel(parallel);
            b.iter(|| lv_obs(&g, 8, None).unwrap());
        });
    }
    group.finish();
    par::set_parallel(true);
}

fn monte_carlo(c: &mut Criterion) {
    let g = graph();
    let placed = [PlacedObservers {
        tag: "lv".into(),
        observers: lv_obs(&g, 8, None).unwrap().observers,
    }];
    let protocol = Protocol {
        family: ModelFamily::Gaussian,
        levels: vec![0.2],
        runs: 1,
        limit: None,
        master_seed: 1,
    };
    let prior = Prior::uniform(g.node_count());
    let mut group = c.benchmark_group("run_on_graph");
    group.sample_size(10);
    for parallel in [true, false] {
        let name = if parallel { "parallel" } else { "sequential" };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            par::set_parallel(parallel);
            b.iter(|| run_on_graph(&g, &prior, &placed, &protocol).unwrap());
        });
    }
    group.finish();
    par::set_parallel(true);
}

criterion_group!(benches, placement, monte_carlo);
criterion_main!(benches);
