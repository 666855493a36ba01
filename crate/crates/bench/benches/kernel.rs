use criterion::{black_box, criterion_group, criterion_main, Criterion};

use osg_bench::{bench_params, coherent_pair, protocol_atom};
use osg_core::bogoliubov::{b_matrix_from, BbarSubspace};
use osg_core::distribution::momentum_distribution;
use osg_core::kernel::{s_factor, ATensor, AtomLabel};
use osg_core::GridSpec;

fn bench_bbar_table(c: &mut Criterion) {
    c.bench_function("bbar_subspace_n40", |b| {
        b.iter(|| BbarSubspace::build(black_box(40)))
    });
}

fn bench_b_matrix(c: &mut Criterion) {
    let sub = BbarSubspace::build(24);
    c.bench_function("b_matrix_n24", |b| {
        b.iter(|| b_matrix_from(black_box(&sub), black_box(0.7)))
    });
}

fn bench_a_tensor(c: &mut Criterion) {
    let sub = BbarSubspace::build(16);
    c.bench_function("a_tensor_ground_n16", |b| {
        b.iter(|| ATensor::build(AtomLabel::Ground, 16, black_box(&sub)).unwrap())
    });
}

fn bench_s_factor(c: &mut Criterion) {
    let params = bench_params(4.0);
    c.bench_function("s_factor_sweep", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for w in -20i64..=20 {
                for n in 0..20usize {
                    acc += s_factor(black_box(w), n, 7.3, &params).norm_sqr();
                }
            }
            acc
        })
    });
}

fn bench_distribution(c: &mut Criterion) {
    let params = bench_params(2.0);
    let field = coherent_pair(0.8);
    let atom = protocol_atom();
    let spec = GridSpec::with_p_max(64, 64, 8.0);
    let mut group = c.benchmark_group("distribution");
    group.sample_size(10);
    group.bench_function("coherent_0p8_64x64", |b| {
        b.iter(|| momentum_distribution(&field, &atom, &params, black_box(&spec)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_bbar_table,
    bench_b_matrix,
    bench_a_tensor,
    bench_s_factor,
    bench_distribution
);
criterion_main!(benches);
