use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use teamcontract::exact::{gap_enumerate, opt_enumerate, Constraint};
use teamcontract::instances::FamilySpec;
use teamcontract::par::map_range;
use teamcontract::{Exec, Instance, Objective};

fn xos(n: usize, seed: u64) -> Instance {
    FamilySpec::RandomXos {
        n,
        clauses: 4,
        seed,
    }
    .generate()
    .unwrap()
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("opt_enumerate");
    group.sample_size(10);
    for n in [12usize, 16, 18] {
        let inst = xos(n, 7);
        for exec in [Exec::Sequential, Exec::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), n),
                &inst,
                |b, inst| {
                    b.iter(|| {
                        let o = inst.oracle();
                        opt_enumerate(
                            &o,
                            &inst.costs,
                            Objective::Welfare,
                            Constraint::share(1.0),
                            exec,
                        )
                        .unwrap()
                    })
                },
            );
        }
    }
    group.finish();
}

/// Gap of every instance in a seeded corpus; parallel across instances,
/// sequential inside each one.
fn corpus_sweep(c: &mut Criterion) {
    let corpus: Vec<Instance> = (0..64).map(|s| xos(10, s)).collect();
    let mut group = c.benchmark_group("corpus_gap_sweep");
    group.sample_size(10);
    for exec in [Exec::Sequential, Exec::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| {
                map_range(exec, 0..corpus.len(), |i| {
                    let inst = &corpus[i];
                    gap_enumerate(&inst.oracle(), &inst.costs, 1.0, Exec::Sequential)
                        .unwrap()
                        .gap_wg
                })
            })
        });
    }
    group.finish();
    black_box(&corpus);
}

criterion_group!(benches, enumeration, corpus_sweep);
criterion_main!(benches);
