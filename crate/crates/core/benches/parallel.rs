//! Compare the rayon build against the sequential fallback:
//!
//! ```text
//! cargo bench -p lpopnorm --no-default-features -- --save-baseline sequential
//! cargo bench -p lpopnorm -- --baseline sequential
//! ```

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lpopnorm::certify::power_iteration_lower_bound;
use lpopnorm::cli::{sweep_rows, verify_discrete, verify_theorem1, Family};
use lpopnorm::{apply_toeplitz, q_hardy_kernel, Exponent, QParam, ToeplitzKernel, ToleranceConfig, TruncatedMatrix, TruncatedSequence};

fn mode() -> &'static str {
    if lpopnorm::par::is_parallel() {
        "parallel"
    } else {
        "sequential"
    }
}

fn batch_verification(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("verify/{}", mode()));
    g.sample_size(10);
    g.bench_function("discrete_9x1000", |b| {
        b.iter(|| verify_discrete(1000, 42, &[1.5, 2.0, 3.0], &[0.1, 0.5, 0.9]).unwrap())
    });
    g.bench_function("theorem1_grid", |b| {
        b.iter(|| verify_theorem1(4, 42, &[1.5, 2.0, 3.0], &[0.25, 0.5, 0.9], None, &[Family::One, Family::T, Family::Random]).unwrap())
    });
    g.finish();
}

fn dense_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("dense/{}", mode()));
    let p = Exponent::new(2.0).unwrap();
    let cfg = ToleranceConfig { max_iter: 20, ..Default::default() };
    for n in [256usize, 1024] {
        let cesaro = TruncatedMatrix::cesaro_section(n).unwrap();
        g.bench_with_input(BenchmarkId::new("cesaro_power_20", n), &cesaro, |b, m| {
            b.iter(|| power_iteration_lower_bound(black_box(m), p, &cfg).unwrap())
        });
        let k = ToeplitzKernel::explicit((1..=n).map(|m| 1.0 / (m * m) as f64).collect()).unwrap();
        let x = TruncatedSequence::indicator(n);
        g.bench_with_input(BenchmarkId::new("apply_toeplitz", n), &x, |b, x| b.iter(|| apply_toeplitz(&k, black_box(x))));
    }
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut g = c.benchmark_group(format!("sweep/{}", mode()));
    g.sample_size(10);
    let k = q_hardy_kernel(QParam::new(0.5).unwrap());
    let p = Exponent::new(2.0).unwrap();
    g.bench_function("qhardy_10_to_4000", |b| {
        b.iter(|| sweep_rows(&k, p, &[10, 100, 1000, 4000], &ToleranceConfig::default()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, batch_verification, dense_kernels, sweeps);
criterion_main!(benches);
