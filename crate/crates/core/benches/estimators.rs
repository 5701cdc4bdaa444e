use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use shapcause::dataset::TabularDataset;
use shapcause::shapley::{shapley_exact, shapley_permutation_sampling, PermutationConfig};
use shapcause::value_functions::{Backend, ModelValueFunction, Source, ValueFunctionSpec};
use shapcause::{par, Gaussian, Model, TableValueFunction};

fn thread_counts() -> Vec<usize> {
    let n = std::thread::available_parallelism().map_or(1, |n| n.get()).max(2);
    vec![1, n]
}

fn mc_value_function(m: usize, samples: usize) -> ModelValueFunction {
    let g = Gaussian::standardized(m, 0.5).unwrap();
    let beta: Vec<f64> = (0..m).map(|j| 1.0 + j as f64 * 0.25).collect();
    let model = Model::interaction(0.0, beta, vec![(0, 1, 0.5), (1, 2, -0.3)]).unwrap();
    ModelValueFunction::new(
        ValueFunctionSpec::new(Backend::ConditionalGaussianMc, model, vec![0.5; m], Source::Gaussian(g))
            .with_mc_samples(samples)
            .with_seed(1),
    )
    .unwrap()
}

fn exact_table(c: &mut Criterion) {
    let v = TableValueFunction::random(16, 1).unwrap();
    let mut group = c.benchmark_group("exact_table_m16");
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| par::with_threads(t, || shapley_exact(black_box(&v)).unwrap()))
        });
    }
    group.finish();
}

fn permutation(c: &mut Criterion) {
    let v = TableValueFunction::random(10, 2).unwrap();
    let cfg = PermutationConfig {
        n_permutations: 5000,
        seed: 3,
    };
    let mut group = c.benchmark_group("permutation_m10_n5000");
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| par::with_threads(t, || shapley_permutation_sampling(black_box(&v), &cfg).unwrap()))
        });
    }
    group.finish();
}

fn conditional_mc(c: &mut Criterion) {
    let mut group = c.benchmark_group("conditional_mc_m5_n5000");
    group.sample_size(10);
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            // fresh memo each iteration so every coalition is sampled
            b.iter(|| par::with_threads(t, || shapley_exact(&mc_value_function(5, 5000)).unwrap()))
        });
    }
    group.finish();
}

fn marginal_empirical(c: &mut Criterion) {
    let g = Gaussian::standardized(4, 0.3).unwrap();
    let data = TabularDataset::continuous(g.sample(50_000, 4).unwrap()).unwrap();
    let model = Model::linear(0.0, vec![1.0, -1.0, 0.5, 2.0]).unwrap();
    let spec = ValueFunctionSpec::new(Backend::MarginalEmpirical, model, vec![1.0; 4], Source::Data(data));
    let mut group = c.benchmark_group("marginal_empirical_m4_n50000");
    group.sample_size(10);
    for t in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &t| {
            b.iter(|| par::with_threads(t, || shapley_exact(&ModelValueFunction::new(spec.clone()).unwrap()).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, exact_table, permutation, conditional_mc, marginal_empirical);
criterion_main!(benches);
