use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use leaky_staging::envelope::{verify_dominance_batch, DominanceCase, ImpulseSchedule, SimGrid};
use leaky_staging::phase::{regime_map, sawtooth_frontier, Axis, PhaseGrid};
use leaky_staging::recovery::{bellman_tables, BellmanGrid, CarryOver};
use leaky_staging::{Execution, ModelParams};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn sawtooth(c: &mut Criterion) {
    let grid = PhaseGrid {
        r: Axis::new(0.05, 40.0, 400).unwrap(),
        k: Axis::new(0.0, 2.0, 200).unwrap(),
        ..PhaseGrid::default()
    };
    let mut group = c.benchmark_group("sawtooth_frontier");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sawtooth_frontier(black_box(&grid), exec).unwrap())
        });
    }
    group.finish();
}

fn regimes(c: &mut Criterion) {
    let grid = PhaseGrid {
        r: Axis::new(0.05, 8.0, 200).unwrap(),
        h: Axis::new(0.0, 8.0, 200).unwrap(),
        ..PhaseGrid::default()
    };
    let mut group = c.benchmark_group("regime_map");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| regime_map(black_box(&grid), 1e-12, exec).unwrap())
        });
    }
    group.finish();
}

fn bellman(c: &mut Criterion) {
    let lambda = CarryOver::new(0.5).unwrap();
    let grid = BellmanGrid {
        state_points: 2001,
        control_points: 201,
        refinements: 2,
    };
    let mut group = c.benchmark_group("bellman_tables");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bellman_tables(4, black_box(lambda), grid, exec))
        });
    }
    group.finish();
}

fn dominance(c: &mut Criterion) {
    let params = ModelParams::new(0.6, 1.0, 1.8, 0.5).unwrap();
    let cases: Vec<DominanceCase> = (0..32)
        .map(|i| DominanceCase {
            schedule: ImpulseSchedule::equally_spaced(&[0.3 + 0.01 * i as f64; 5], 2.0).unwrap(),
            params,
            initial_intensity: 0.05 + 0.005 * i as f64,
            initial_level: 0.0,
            grid: SimGrid::new(10.0, 1e-3).unwrap(),
        })
        .collect();
    let mut group = c.benchmark_group("dominance_batch");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| verify_dominance_batch(black_box(&cases), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, sawtooth, regimes, bellman, dominance);
criterion_main!(benches);
