use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use conelab_core::operator::apply_t;
use conelab_core::{ConeSymbol, DistanceFunction, SampledField};

fn apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("apply_t");
    g.sample_size(10);
    for n in [32usize, 64] {
        let df = DistanceFunction::lq(4, 2).unwrap();
        let sym = ConeSymbol::new(&df, 1.0).unwrap();
        let ext = [n as f64, n as f64, 16.0 * PI];
        let f = SampledField::from_fn(&[n, n, n], &ext, &[0.0; 3], |p| {
            Complex64::new((-(p[0] * p[0] + p[1] * p[1]) / 20.0).exp() * p[2].cos(), 0.0)
        })
        .unwrap();
        g.bench_function(format!("{n}^3"), |b| b.iter(|| apply_t(&sym, &f).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, apply);
criterion_main!(benches);
