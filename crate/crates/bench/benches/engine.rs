use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pargraph_core::life::{birth_rule, build_torus, life_rules, Grid};
use pargraph_core::{
    aut_rule, enumerate_all, is_regular, isomorphic, rewrite_min, select_representatives_with,
    Graph, RuleAuts,
};

fn torus(size: usize) -> Graph {
    // A glider plus a blinker, away from each other.
    let cells = [
        (0, 1),
        (1, 2),
        (2, 0),
        (2, 1),
        (2, 2),
        (size - 2, 2),
        (size - 2, 3),
        (size - 2, 4),
    ];
    build_torus(&Grid::from_cells(size, size, cells).unwrap()).unwrap()
}

fn matching(c: &mut Criterion) {
    let rules = life_rules();
    let mut group = c.benchmark_group("enumerate_all");
    for size in [6, 8, 10] {
        let g = torus(size);
        group.bench_with_input(BenchmarkId::from_parameter(size), &g, |b, g| {
            b.iter(|| enumerate_all(&rules, g))
        });
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let rules = life_rules();
    let g = torus(8);
    let ms = enumerate_all(&rules, &g);
    c.bench_function("is_regular/8", |b| b.iter(|| is_regular(&ms)));
    c.bench_function("rewrite_min/8", |b| {
        b.iter(|| rewrite_min(&g, &ms).unwrap())
    });
    let mut auts = RuleAuts::of_rules(&rules).unwrap();
    c.bench_function("representatives/8", |b| {
        b.iter(|| select_representatives_with(&mut auts, &ms).unwrap())
    });
}

fn symmetry(c: &mut Criterion) {
    let birth = birth_rule();
    c.bench_function("aut_rule/birth", |b| b.iter(|| aut_rule(&birth).unwrap()));
    let (g, h) = (torus(8), torus(8));
    c.bench_function("isomorphic/8", |b| b.iter(|| isomorphic(&g, &h)));
}

criterion_group!(benches, matching, steps, symmetry);
criterion_main!(benches);
