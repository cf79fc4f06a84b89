use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eigenformats::arnoldi::{partial_schur, SolverConfig};
use eigenformats::formats::{codec, BFloat16, Float16, Float64, Posit16, Posit32, Takum16, Takum32};
use eigenformats::{Format, Reference, Scalar};
use eigenformats_bench::{operands, tridiag};

fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

fn scalar_ops(c: &mut Criterion) {
    let xs = operands(1024);
    let mut g = c.benchmark_group("dot_1024");
    macro_rules! bench {
        ($t:ty) => {{
            let v: Vec<$t> = xs.iter().map(<$t>::from_reference).collect();
            g.bench_function(<$t>::FORMAT.name(), |b| b.iter(|| dot(black_box(&v), black_box(&v))));
        }};
    }
    bench!(Float64);
    bench!(Float16);
    bench!(BFloat16);
    bench!(Posit16);
    bench!(Takum16);
    bench!(Posit32);
    bench!(Takum32);
    bench!(Reference);
    g.finish();
}

fn codecs(c: &mut Criterion) {
    let xs = operands(1024);
    let mut g = c.benchmark_group("encode_1024");
    for fmt in [Format::Float16, Format::Posit32, Format::Takum32] {
        g.bench_with_input(BenchmarkId::from_parameter(fmt.name()), &xs, |b, xs| {
            b.iter(|| xs.iter().map(|x| codec::encode(fmt, x)).fold(0u64, |a, c| a ^ c))
        });
    }
    g.finish();
}

fn matvec(c: &mut Criterion) {
    let n = 10_000;
    let m = tridiag(n);
    let mut g = c.benchmark_group("matvec_tridiag_10000");
    macro_rules! bench {
        ($t:ty) => {{
            let a = m.to_csr::<$t>();
            let x: Vec<$t> = operands(n).iter().map(<$t>::from_reference).collect();
            let mut y = vec![<$t>::zero(); n];
            g.bench_function(<$t>::FORMAT.name(), |b| b.iter(|| a.matvec(black_box(&x), &mut y)));
        }};
    }
    bench!(Float64);
    bench!(Posit16);
    bench!(Takum32);
    g.finish();
}

fn solve(c: &mut Criterion) {
    let n = 200;
    let m = tridiag(n);
    let mut g = c.benchmark_group("partial_schur_tridiag_200");
    g.sample_size(10);
    macro_rules! bench {
        ($t:ty, $tol:expr) => {{
            let a = m.to_csr::<$t>();
            let cfg = SolverConfig::new(12, Reference::from_f64($tol), n);
            g.bench_function(<$t>::FORMAT.name(), |b| {
                b.iter(|| partial_schur(|x: &[$t], y: &mut [$t]| a.matvec(x, y), n, &cfg).unwrap())
            });
        }};
    }
    bench!(Float64, 1e-12);
    bench!(Float16, 1e-4);
    bench!(Posit16, 1e-4);
    g.finish();
}

criterion_group!(benches, scalar_ops, codecs, matvec, solve);
criterion_main!(benches);
