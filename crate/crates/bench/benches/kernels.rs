use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use polar_lscd::decoder::{prune_to_list, Candidate};
use polar_lscd::{FixedPoint, FloatingPoint, LlrDomain};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f_g(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = FixedPoint::hardware_default();
    let a: Vec<i32> = (0..1024).map(|_| rng.random_range(-128..=127)).collect();
    let b: Vec<i32> = (0..1024).map(|_| rng.random_range(-128..=127)).collect();
    let s: Vec<u8> = (0..1024).map(|_| rng.random_range(0..=1)).collect();
    c.bench_function("f fixed x1024", |bn| {
        bn.iter(|| a.iter().zip(&b).map(|(&x, &y)| q.f(x, y)).fold(0, i32::wrapping_add))
    });
    c.bench_function("g fixed x1024", |bn| {
        bn.iter(|| {
            a.iter()
                .zip(&b)
                .zip(&s)
                .map(|((&x, &y), &s)| q.g(s, x, y))
                .fold(0, i32::wrapping_add)
        })
    });
    let af: Vec<f64> = a.iter().map(|&x| x as f64 / 4.0).collect();
    let bf: Vec<f64> = b.iter().map(|&x| x as f64 / 4.0).collect();
    c.bench_function("f float x1024", |bn| {
        bn.iter(|| af.iter().zip(&bf).map(|(&x, &y)| FloatingPoint.f(x, y)).sum::<f64>())
    });
}

fn prune(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = FixedPoint::hardware_default();
    for (l, per_path) in [(8usize, 2usize), (32, 2), (32, 8)] {
        let cands: Vec<Candidate<u32>> = (0..l * per_path)
            .map(|i| Candidate {
                metric: rng.random_range(0..512),
                parent: i / per_path,
                branch: (i % per_path) as u32,
                leaves: 0,
            })
            .collect();
        c.bench_function(&format!("prune {} to {l}", cands.len()), |bn| {
            bn.iter_batched(
                || cands.clone(),
                |v| black_box(prune_to_list(&d, v, l)),
                BatchSize::SmallInput,
            )
        });
    }
}

criterion_group!(benches, f_g, prune);
criterion_main!(benches);
