use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use tailgap::estimators::gap_curve;
use tailgap::montecarlo::{run_experiment, ARule, ExperimentConfig};
use tailgap::{Execution, Family, ParamVector, PosteriorSpec, Sample};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn experiment(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_experiment");
    for (family, theta) in [(Family::Exponential, 1.0), (Family::Pareto, 0.5)] {
        let config = ExperimentConfig {
            family: family.clone(),
            true_theta: ParamVector::scalar(theta),
            n: 50,
            reps: 2000,
            a_rule: ARule::QuantileOfTruth(vec![0.9, 0.99, 0.999, 0.9999]),
            seed: 1,
        };
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(family.name(), name), &exec, |b, &exec| {
                b.iter(|| run_experiment(black_box(&config), exec).unwrap())
            });
        }
    }
    group.finish();
}

fn gap_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("gap_curve");
    group.sample_size(10);
    let values = vec![
        0.3, -1.1, 0.8, 1.9, -0.2, 0.4, 1.2, -0.6, 0.1, 0.9, -0.4, 1.5,
    ];
    let spec =
        PosteriorSpec::with_default_prior(Family::Normal, Sample::new(values).unwrap()).unwrap();
    let grid: Vec<f64> = (0..32).map(|i| 1.0 + 0.25 * i as f64).collect();
    for (name, exec) in MODES {
        group.bench_with_input(
            BenchmarkId::new("normal_quadrature", name),
            &exec,
            |b, &exec| b.iter(|| gap_curve(black_box(&spec), &grid, exec).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, experiment, gap_sweep);
criterion_main!(benches);
