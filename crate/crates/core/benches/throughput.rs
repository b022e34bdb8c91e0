use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use wilf_core::automaton::{ClassModel, ClassSpec};
use wilf_core::sampler::{empirical_suite, sample_batch, ClassSampler, EmpiricalConfig};
use wilf_core::wilf::wilf_partition;
use wilf_core::Strategy;

const STRATEGIES: [(&str, Strategy); 2] = [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)];

fn layered() -> ClassModel {
    ClassModel::build(&ClassSpec::basis(["231", "312", "321"]).unwrap()).unwrap()
}

fn partition(c: &mut Criterion) {
    let model = layered();
    let mut group = c.benchmark_group("wilf_partition");
    group.sample_size(10);
    for k in [8, 10] {
        for (name, strategy) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, k), &k, |b, &k| {
                b.iter(|| wilf_partition(&model, k, usize::MAX, strategy).unwrap().w())
            });
        }
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let model = ClassModel::build(&ClassSpec::basis(["231", "312", "321", "2143"]).unwrap()).unwrap();
    let sampler = ClassSampler::new(&model, 400).unwrap();
    let mut group = c.benchmark_group("class_samples");
    group.sample_size(10);
    for (name, strategy) in STRATEGIES {
        group.bench_function(name, |b| b.iter(|| sample_batch(strategy, black_box(7), 2000, |rng| sampler.sample(rng)).len()));
    }
    group.finish();

    let mut group = c.benchmark_group("empirical_suite");
    group.sample_size(10);
    for (name, strategy) in STRATEGIES {
        let mut config = EmpiricalConfig::new(300, 500, 7);
        config.strategy = strategy;
        group.bench_function(name, |b| b.iter(|| empirical_suite(&model, &config).unwrap().rows.len()));
    }
    group.finish();
}

criterion_group!(benches, partition, sampling);
criterion_main!(benches);
