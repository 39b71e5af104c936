use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pats::assembly::CompiledTileSet;
use pats::solver::{solve_any, solve_exact, SearchBudget};
use pats::superreduce::{build_q, witness_theta, MbpatsInstance};
use pats::{cell_tileset, color_census, Color, DensePattern, Pattern, TileSet};

fn toy_blowup(side: usize) -> (MbpatsInstance, TileSet) {
    let p = DensePattern::from_fn(side, side, |x, y| Color::new(format!("c{x}_{y}")));
    let inst = build_q(&p).expect("distinct colors");
    let theta = witness_theta(&cell_tileset(&p), &p).expect("witness");
    (inst, theta)
}

fn verify(c: &mut Criterion) {
    let mut group = c.benchmark_group("verify_q");
    group.sample_size(10);
    for side in [4, 6] {
        let (inst, theta) = toy_blowup(side);
        let compiled = CompiledTileSet::new(&theta).unwrap();
        let cells = inst.q.width() * inst.q.height();
        group.bench_with_input(BenchmarkId::new("sequential", cells), &inst, |b, inst| {
            b.iter(|| compiled.verify_stream(black_box(&inst.q)).unwrap())
        });
        for strips in [2, 4] {
            let id = BenchmarkId::new(format!("pipelined_{strips}"), cells);
            group.bench_with_input(id, &inst, |b, inst| {
                b.iter(|| {
                    compiled
                        .verify_stream_pipelined(black_box(&inst.q), strips)
                        .unwrap()
                })
            });
        }
    }
    group.finish();
}

fn census(c: &mut Criterion) {
    let (inst, _) = toy_blowup(6);
    let mut group = c.benchmark_group("census_q");
    group.sample_size(10);
    group.bench_function(
        if cfg!(feature = "parallel") {
            "rayon"
        } else {
            "sequential"
        },
        |b| b.iter(|| color_census(black_box(&inst.q))),
    );
    group.finish();
}

fn search(c: &mut Criterion) {
    // Diagonal stripes over three colors with one cell recolored: needs a
    // proof that three tiles do not suffice.
    let p = DensePattern::from_fn(4, 4, |x, y| {
        let c = if (x, y) == (3, 3) { 0 } else { (x + y) % 3 };
        Color::new(format!("s{c}"))
    });
    let budget = SearchBudget::total(3);
    let mut group = c.benchmark_group("search");
    group.bench_function("exact", |b| b.iter(|| solve_exact(black_box(&p), &budget)));
    group.bench_function("any", |b| b.iter(|| solve_any(black_box(&p), &budget)));
    group.finish();
}

criterion_group!(benches, verify, census, search);
criterion_main!(benches);
