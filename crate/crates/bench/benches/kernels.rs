use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use markov_aloha::density::{DensityEvolution, LlrGrid};
use markov_aloha::estimators::{LogRatio, MyopicRecursion, RandomRecursion, ReactiveHmm};
use markov_aloha::sim::{run_replication, sample_trace, ChannelSim, SimConfig};
use markov_aloha::{SourceParams, Strategy, SystemConfig};

fn random(m: usize) -> SystemConfig {
    SystemConfig::new(
        m,
        SourceParams::symmetric(0.01).unwrap(),
        Strategy::random(1.0 / m as f64).unwrap(),
    )
    .unwrap()
}

fn reactive(m: usize) -> SystemConfig {
    SystemConfig::new(m, SourceParams::new(0.01, 0.1).unwrap(), Strategy::Reactive).unwrap()
}

fn de_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("de_step");
    for points in [1001, 4001] {
        let grid = LlrGrid::new(40.0, points).unwrap();
        for (name, cfg) in [("random", random(10)), ("reactive", reactive(10))] {
            let mut de = DensityEvolution::new(&cfg, grid).unwrap();
            for _ in 0..50 {
                de.step();
            }
            g.bench_function(BenchmarkId::new(name, points), |b| {
                b.iter(|| black_box(de.apply(de.density())))
            });
        }
    }
    g.finish();
}

fn filter_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("filter_1000_slots");
    let (trace, _) = sample_trace(&random(10), 1000, 1);
    let rec = RandomRecursion::new(&random(10)).unwrap();
    g.bench_function("random", |b| {
        b.iter(|| {
            trace
                .iter()
                .fold(LogRatio::ZERO, |l, &y| rec.step(l, y).unwrap())
        })
    });
    let (trace, _) = sample_trace(&reactive(10), 1000, 1);
    let rec = MyopicRecursion::new(&reactive(10)).unwrap();
    g.bench_function("myopic", |b| {
        b.iter(|| {
            trace
                .iter()
                .fold(LogRatio::ZERO, |l, &y| rec.step(l, y).unwrap())
        })
    });
    for m in [10, 50] {
        let cfg = reactive(m);
        let (trace, _) = sample_trace(&cfg, 1000, 1);
        let hmm = ReactiveHmm::new(&cfg).unwrap();
        g.bench_function(BenchmarkId::new("hmm", m), |b| {
            b.iter(|| {
                trace
                    .iter()
                    .fold(hmm.initial(), |f, &y| hmm.step(&f, y).unwrap())
            })
        });
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulation");
    for m in [10, 50] {
        let mut ch = ChannelSim::new(random(m), 7);
        g.bench_function(BenchmarkId::new("channel_slot", m), |b| {
            b.iter(|| black_box(ch.slot()))
        });
    }
    for (name, cfg) in [("random", random(10)), ("reactive", reactive(10))] {
        let sim = SimConfig {
            horizon: 11_000,
            burn_in: 1000,
            ..SimConfig::new(cfg)
        };
        g.bench_function(BenchmarkId::new("replication_11k_slots", name), |b| {
            b.iter(|| run_replication(&sim, 7).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, de_step, filter_step, simulation);
criterion_main!(benches);
