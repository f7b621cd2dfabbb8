use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_traits::ToPrimitive;

use rankone::ergodic_index::vl::{CutRule, VlSpec};
use rankone::ergodic_index::witness::{witness_sets, witness_verify};
use rankone::product::{lambda_set, LambdaVariant};
use rankone::{preset_infinite_ergodic_index, Execution, LevelSet, Tower};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn lambda(c: &mut Criterion) {
    let tower = Tower::afs(preset_infinite_ergodic_index());
    let a = LevelSet::single(3, 0);
    let hz = tower.marker(6).unwrap().to_u64().unwrap() / 2;
    let mut group = c.benchmark_group("lambda_set");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| lambda_set(&tower, 1, 2, black_box(&a), hz, LambdaVariant::Plain, exec).unwrap())
        });
    }
    group.finish();
}

fn rigidity(c: &mut Criterion) {
    let params = preset_infinite_ergodic_index();
    let tower = Tower::afs(params.clone());
    let p = params.stage(2).unwrap().p.to_i128().unwrap();
    let levels: Vec<u128> = (0..414).collect();
    let mut group = c.benchmark_group("rigidity_g2");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                exec.map(&levels, |&i| {
                    let lvl = LevelSet::single(2, i);
                    tower.correlation(&lvl, &lvl, p).unwrap()
                })
            })
        });
    }
    group.finish();
}

fn witness(c: &mut Criterion) {
    let tower = Tower::vl(VlSpec::new(2, CutRule::Geometric { c: 6, beta: 2 }));
    let pair = witness_sets(&tower, 2, 2, 3).unwrap();
    let hz = tower.marker(4).unwrap().to_i128().unwrap();
    let mut group = c.benchmark_group("witness_scan");
    group.sample_size(20);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| witness_verify(&tower, &pair, hz, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(scans, lambda, rigidity, witness);
criterion_main!(scans);
