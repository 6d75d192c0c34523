use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fastrfb::bench::{run_table_runs, table_methods, Execution};

fn table_fanout(c: &mut Criterion) {
    let methods = table_methods();
    let seeds: Vec<u64> = (0..4).collect();
    let mut group = c.benchmark_group("table_fanout");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_function(name, |b| {
            b.iter(|| run_table_runs(black_box(&methods), &[1e-1], 50, &seeds, 2_000, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, table_fanout);
criterion_main!(benches);
