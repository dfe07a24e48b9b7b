use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use duff_core::mechanisms::em_sample_piece;
use duff_core::{
    duff_mean, duff_median, optimize_alpha_beta, Dataset, GridLlnStrategy, MechanismKind,
    OutputRange, Prepared, PrivacyParams, RngStream, SensitivityProfile, StatisticKind,
};

fn normal_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = RngStream::new(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    Dataset::new(&raw, OutputRange::continuous(-10.0, 10.0).unwrap()).unwrap()
}

fn utilities(c: &mut Criterion) {
    let mut group = c.benchmark_group("utility");
    for n in [100, 1000, 10_000] {
        let s = normal_dataset(n, 1);
        group.bench_with_input(BenchmarkId::new("duff_median", n), &s, |b, s| {
            b.iter(|| duff_median(black_box(s)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("duff_mean", n), &s, |b, s| {
            b.iter(|| duff_mean(black_box(s)).unwrap())
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let s = normal_dataset(1000, 2);
    let u = duff_median(&s).unwrap();
    let mut rng = RngStream::new(3);
    c.bench_function("em_sample_piece/median_1000", |b| {
        b.iter(|| em_sample_piece(black_box(&u), 1.0, &mut rng).unwrap())
    });
}

fn sensitivity(c: &mut Criterion) {
    let mut group = c.benchmark_group("sensitivity");
    for n in [100, 1000] {
        let s = normal_dataset(n, 4);
        group.bench_with_input(BenchmarkId::new("profile", n), &s, |b, s| {
            b.iter(|| SensitivityProfile::median(black_box(s)))
        });
        let profile = SensitivityProfile::median(&s);
        group.bench_with_input(
            BenchmarkId::new("optimize_alpha_beta", n),
            &profile,
            |b, p| b.iter(|| optimize_alpha_beta(black_box(p), 0.1, 1e-3).unwrap()),
        );
    }
    group.finish();
}

fn prepare(c: &mut Criterion) {
    let s = normal_dataset(1000, 5);
    let privacy = PrivacyParams::new(1.0, 1e-3).unwrap();
    let mut group = c.benchmark_group("prepare_1000");
    group.sample_size(20);
    for mech in MechanismKind::ALL {
        group.bench_function(mech.id(), |b| {
            b.iter(|| {
                Prepared::new(
                    black_box(&s),
                    StatisticKind::Median,
                    mech,
                    privacy,
                    &GridLlnStrategy::default(),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, utilities, sampling, sensitivity, prepare);
criterion_main!(benches);
