use criterion::{criterion_group, criterion_main, Criterion};

use lpns2d_bench::carrier_field;
use lpns2d_core::besov::block_norm;
use lpns2d_core::bilinear::{bilinear_b, windowed_output, LeadingPair, ModulatedProfile};
use lpns2d_core::cutoff::lp_block_symbol;
use lpns2d_core::norms::Lp;
use lpns2d_core::product::spectral_product;

fn bench_spectral_product(c: &mut Criterion) {
    let u = carrier_field(256).unwrap();
    c.bench_function("spectral_product_256", |b| {
        b.iter(|| spectral_product(&u[0], &u[1]).unwrap())
    });
}

fn bench_bilinear(c: &mut Criterion) {
    let u = carrier_field(256).unwrap();
    c.bench_function("bilinear_b_256", |b| b.iter(|| bilinear_b(&u, &u).unwrap()));
}

fn bench_block_norm(c: &mut Criterion) {
    let pair = LeadingPair::new(16.0, 1.0).unwrap();
    let sym = |x1: f64, x2: f64| pair.output_symbol(x1, x2);
    c.bench_function("output_block_norm_p2", |b| {
        b.iter(|| block_norm(&sym, -4, Lp::Finite(2.0)).unwrap())
    });
}

fn bench_windowed_quadrature(c: &mut Criterion) {
    let p = ModulatedProfile::new(16.0, 1.0).unwrap();
    let targets: Vec<(f64, f64)> = (0..32).map(|i| (0.2 + 0.01 * i as f64, 0.1)).collect();
    c.bench_function("windowed_output_32_targets", |b| {
        b.iter(|| windowed_output(&[p], &[p], 0.125, &targets).unwrap())
    });
}

fn bench_partition_sweep(c: &mut Criterion) {
    c.bench_function("block_symbol_sweep", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 1..=4096 {
                let r = i as f64 / 64.0;
                for j in -8..=8 {
                    acc += lp_block_symbol(j, r);
                }
            }
            acc
        })
    });
}

criterion_group!(
    kernels,
    bench_spectral_product,
    bench_bilinear,
    bench_block_norm,
    bench_windowed_quadrature,
    bench_partition_sweep
);
criterion_main!(kernels);
