//! Sequential (one worker) against all cores on the main engines. Build with
//! `--no-default-features` to measure the code without rayon at all.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use selfsim::contraction::{compute_nucleus, verify_nucleus, ContractionStatus, Nucleus, NucleusOptions};
use selfsim::dimension::{search_partition, GeneratingSet, SearchOptions};
use selfsim::graphs::{schreier, tile_graph};
use selfsim::{corpus, dsl, par, Group};

fn group(name: &str) -> Group {
    Group::new(dsl::parse_str(corpus::by_name(name).unwrap()).unwrap()).unwrap()
}

fn nucleus(g: &Group) -> Nucleus {
    match compute_nucleus(g, &NucleusOptions::default()).unwrap() {
        ContractionStatus::Contracting(n) => n,
        other => panic!("{other:?}"),
    }
}

const MODES: [(&str, usize); 2] = [("sequential", 1), ("parallel", 0)];

fn bench_nucleus(c: &mut Criterion) {
    let mut bg = c.benchmark_group("nucleus");
    for name in ["sierpinski-carpet", "img-p1-quadratic", "gupta-sidki"] {
        for (mode, jobs) in MODES {
            bg.bench_with_input(BenchmarkId::new(mode, name), &jobs, |b, &jobs| {
                // fresh caches every iteration
                b.iter(|| par::with_jobs(jobs, || nucleus(&group(name))))
            });
        }
    }
    bg.finish();
}

fn bench_stability(c: &mut Criterion) {
    let mut bg = c.benchmark_group("stability");
    let g = group("sierpinski-carpet");
    let n = nucleus(&g);
    for (mode, jobs) in MODES {
        bg.bench_function(mode, |b| {
            b.iter(|| par::with_jobs(jobs, || verify_nucleus(&g.fresh().unwrap(), n.elements(), 48).unwrap()))
        });
    }
    bg.finish();
}

fn bench_partitions(c: &mut Criterion) {
    let mut bg = c.benchmark_group("partition_search");
    for (name, level) in [("hanoi", 2), ("sierpinski-carpet", 1)] {
        let g = group(name);
        let a = GeneratingSet::nucleus(&nucleus(&g));
        for (mode, jobs) in MODES {
            bg.bench_with_input(BenchmarkId::new(mode, name), &level, |b, &level| {
                b.iter(|| {
                    par::with_jobs(jobs, || {
                        search_partition(&g.fresh().unwrap(), level, 1, &a, &SearchOptions::default())
                    })
                    .unwrap()
                })
            });
        }
    }
    bg.finish();
}

fn bench_graphs(c: &mut Criterion) {
    let mut bg = c.benchmark_group("graphs");
    let hanoi = group("hanoi");
    let n = nucleus(&hanoi);
    for (mode, jobs) in MODES {
        bg.bench_function(BenchmarkId::new(mode, "tiles hanoi 6"), |b| {
            b.iter(|| par::with_jobs(jobs, || tile_graph(&hanoi, &n, 6)))
        });
        bg.bench_function(BenchmarkId::new(mode, "schreier hanoi 7"), |b| {
            b.iter(|| par::with_jobs(jobs, || schreier(hanoi.system(), 7)))
        });
    }
    bg.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_nucleus, bench_stability, bench_partitions, bench_graphs,
);
criterion_main!(benches);
