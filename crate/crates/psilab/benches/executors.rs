//! Executor comparison on the two reduction shapes the crate leans on:
//! a pure arithmetic lattice sum and a table-backed window sweep. The
//! chunk decomposition and merge order are shared, so the parallel rows
//! measure scheduling overhead and speedup, never a numeric difference.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use psilab::kernels::sinc_weight;
use psilab::mangoldt::build_mangoldt_table;
use psilab::sum::{Execution, Neumaier, DEFAULT_CHUNK};

const EXECUTORS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn lattice_sum(exec: Execution, n: usize) -> f64 {
    exec.sum_chunks(n, DEFAULT_CHUNK, |range| {
        let mut acc = Neumaier::new();
        for k in range {
            acc.add(sinc_weight(0.25 + k as f64, 7.5));
        }
        acc
    })
}

fn window_energy(exec: Execution, psi: &[f64], x: usize, h: usize) -> f64 {
    exec.sum_chunks(x, DEFAULT_CHUNK, |range| {
        let mut acc = Neumaier::new();
        for n in range {
            let w = psi[n + h] - psi[n] - h as f64;
            acc.add(w * w);
        }
        acc
    })
}

fn bench_executors(c: &mut Criterion) {
    let n = 1 << 20;
    let mut group = c.benchmark_group("lattice-sum");
    for (name, exec) in EXECUTORS {
        group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
            b.iter(|| black_box(lattice_sum(exec, n)))
        });
    }
    group.finish();

    let x = 1 << 20;
    let h = 16;
    let table = build_mangoldt_table((x + h) as u64).expect("table builds");
    let psi = table.psi_prefix();
    let mut group = c.benchmark_group("window-sweep");
    for (name, exec) in EXECUTORS {
        group.bench_with_input(BenchmarkId::new(name, x), &x, |b, &x| {
            b.iter(|| black_box(window_energy(exec, psi, x, h)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_executors);
criterion_main!(benches);
