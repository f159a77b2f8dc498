//! Benchmark bodies shared by the criterion harness.

use criterion::{BenchmarkId, Criterion};
use std::hint::black_box;

use endprox::exact::motzkin::motzkin_joint_counts;
use endprox::exact::pfold::{PfoldExterior, PfoldInside, PfoldParams};
use endprox::limits::ete_limit_moments;
use endprox::sample::{MotzkinSampler, PfoldSampler, RngHandle};
use endprox::stats::{exterior_stats, shortest_path_stats};
use endprox::structure::parse_dot_bracket;
use endprox::{klet_shuffle, EteModel, Model};

pub fn exact_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("exact");
    group.sample_size(10);
    for n in [250usize, 500] {
        group.bench_with_input(BenchmarkId::new("motzkin_joint", n), &n, |b, &n| {
            b.iter(|| motzkin_joint_counts(black_box(n)))
        });
        group.bench_with_input(BenchmarkId::new("pfold_joint", n), &n, |b, &n| {
            b.iter(|| {
                let ext = PfoldExterior::new(PfoldInside::new(PfoldParams::default(), n));
                ext.joint(n)
            })
        });
    }
    group.finish();
}

pub fn limits(c: &mut Criterion) {
    let m = EteModel::default();
    c.bench_function("ete_moments/pfold", |b| {
        b.iter(|| ete_limit_moments(Model::Pfold, &m, black_box(1e-9), None).unwrap())
    });
}

pub fn samplers(c: &mut Criterion) {
    let mut rng = RngHandle::new(1);
    let motzkin = MotzkinSampler::new(1000);
    c.bench_function("sample/motzkin_1000", |b| b.iter(|| motzkin.sample(&mut rng)));
    let pfold = PfoldSampler::new(PfoldParams::default(), 200).unwrap();
    c.bench_function("sample/pfold_200", |b| b.iter(|| pfold.sample(200, &mut rng).unwrap()));
}

pub fn pipeline(c: &mut Criterion) {
    let m = EteModel::default();
    let mut rng = RngHandle::new(2);
    let s = MotzkinSampler::new(400).sample(&mut rng);
    let text = s.to_dot_bracket().unwrap();
    c.bench_function("parse/dot_bracket_400", |b| b.iter(|| parse_dot_bracket(black_box(&text)).unwrap()));
    c.bench_function("stats/exterior_400", |b| b.iter(|| exterior_stats(black_box(&s), &m).unwrap()));
    c.bench_function("stats/shortest_path_400", |b| {
        b.iter(|| shortest_path_stats(black_box(&s), &m).unwrap())
    });
    let seq: String = "ACGU".chars().cycle().take(1000).collect();
    c.bench_function("shuffle/doublet_1000", |b| b.iter(|| klet_shuffle(black_box(&seq), 2, &mut rng).unwrap()));
}
