use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use crosscheck_bench::{desk_plan, random_plans};
use crosscheck_core::run_scheduler;

fn scheduler(c: &mut Criterion) {
    let desk = desk_plan();
    c.bench_function("schedule/desk", |b| b.iter(|| run_scheduler(&desk)));

    let mut group = c.benchmark_group("schedule/random");
    for n in [10, 20, 40] {
        let plans = random_plans(n, 8);
        group.bench_with_input(BenchmarkId::from_parameter(n), &plans, |b, plans| {
            b.iter(|| plans.iter().map(|p| run_scheduler(p).placed().len()).sum::<usize>())
        });
    }
    group.finish();
}

criterion_group!(benches, scheduler);
criterion_main!(benches);
