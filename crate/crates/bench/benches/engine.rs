use cgr_bench::{redundant_graph, sat3_instance, transitive_instance};
use cgr_core::{closure, exists_projection, irredundant_form};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("projection_sat3");
    for vars in [6, 10, 14] {
        let (q, g) = sat3_instance(vars, vars * 4, 7);
        group.bench_with_input(BenchmarkId::from_parameter(vars), &(q, g), |b, (q, g)| {
            b.iter(|| exists_projection(black_box(q), black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn cores(c: &mut Criterion) {
    let mut group = c.benchmark_group("irredundant_form");
    for n in [8, 16, 24] {
        let g = redundant_graph(n, n / 2, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| irredundant_form(black_box(g)).unwrap())
        });
    }
    group.finish();
}

fn closures(c: &mut Criterion) {
    let mut group = c.benchmark_group("closure_transitive");
    group.sample_size(20);
    for n in [4, 8, 12] {
        let (g, rules) = transitive_instance(n);
        group.bench_with_input(
            BenchmarkId::from_parameter(n),
            &(g, rules),
            |b, (g, rules)| b.iter(|| closure(black_box(g), rules).unwrap()),
        );
    }
    group.finish();
}

criterion_group!(benches, projection, cores, closures);
criterion_main!(benches);
