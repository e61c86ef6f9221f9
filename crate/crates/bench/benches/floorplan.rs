// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use prfloor_bench::instance;
use prfloor_core::anneal::{anneal, initial_floorplan, AnnealParams};
use prfloor_core::fixtures;
use prfloor_core::placer::OccupancyState;
use prfloor_core::whitespace::detect_whitespace;
use prfloor_core::WsWeights;

fn allocation(c: &mut Criterion) {
    let mut g = c.benchmark_group("initial_floorplan");
    for (name, fabric, regions) in [
        ("user_10x23", fixtures::user_10x23(), 8),
        ("virtex5_scale", fixtures::virtex5_scale(), 15),
        ("virtex5_scale", fixtures::virtex5_scale(), 50),
    ] {
        let design = instance(&fabric, regions, 1);
        g.bench_with_input(BenchmarkId::new(name, regions), &design, |b, d| {
            b.iter(|| initial_floorplan(black_box(d), &fabric, WsWeights::default()).unwrap())
        });
    }
    g.finish();
}

fn whitespace(c: &mut Criterion) {
    let fabric = fixtures::virtex5_scale();
    let design = instance(&fabric, 15, 2);
    let fp = initial_floorplan(&design, &fabric, WsWeights::default()).unwrap();
    let mut state = OccupancyState::new(&fabric);
    for p in fp.placements {
        state.claim(p);
    }
    c.bench_function("detect_whitespace/virtex5_15_regions", |b| {
        b.iter(|| detect_whitespace(black_box(&state)))
    });
}

fn annealing(c: &mut Criterion) {
    let fabric = fixtures::user_10x23();
    let design = instance(&fabric, 8, 3);
    let params = AnnealParams {
        seed: 3,
        max_iterations: Some(2000),
        ..AnnealParams::default()
    };
    let mut g = c.benchmark_group("anneal");
    g.sample_size(10);
    g.bench_function("user_10x23_8_regions_2000_moves", |b| {
        b.iter(|| anneal(black_box(&design), &fabric, &params).unwrap())
    });
    g.finish();
}

criterion_group!(benches, allocation, whitespace, annealing);
criterion_main!(benches);
