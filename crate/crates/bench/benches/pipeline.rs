use criterion::{black_box, criterion_group, criterion_main, Criterion};

use avert_bench::{agent, crowded_frame, highway_scene};
use avert_core::analysis::spearman;
use avert_core::effort::MdrMode;
use avert_core::gate::{rsb_first_collision, sat_first_collision, GateKind, SatRollout};
use avert_core::matching::match_frame;
use avert_core::model::{ClassLabel, ReachParams};
use avert_core::pipeline::evaluate_scene;

fn bench_matching(c: &mut Criterion) {
    let frame = crowded_frame(30, 7);
    c.bench_function("match_frame_30x30", |b| {
        b.iter(|| match_frame(black_box(&frame), 0, ClassLabel::Car, 2.0))
    });
}

fn bench_gates(c: &mut Criterion) {
    let params = ReachParams::default();
    let ego = agent("ego", 0.0, 0.0, 0.0, 10.0, 0.0);
    let obj = agent("o", 42.0, 3.0, 0.1, 4.0, -0.5);
    c.bench_function("rsb_first_collision", |b| {
        b.iter(|| rsb_first_collision(black_box(&ego), black_box(&obj), &params))
    });
    c.bench_function("sat_first_collision", |b| {
        b.iter(|| {
            sat_first_collision(
                black_box(&ego),
                black_box(&obj),
                SatRollout::for_false_negative(-1.0),
                &params,
            )
        })
    });
}

fn bench_spearman(c: &mut Criterion) {
    let xs: Vec<f64> = (0..10_000).map(|i| ((i * 2654435761u64 as usize) % 9973) as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|v| (v * 1.7).sin()).collect();
    c.bench_function("spearman_10k", |b| {
        b.iter(|| spearman(black_box(&xs), black_box(&ys)).unwrap())
    });
}

fn bench_scene(c: &mut Criterion) {
    let params = ReachParams::default();
    let scene = highway_scene(40, 20, 11);
    for gate in [GateKind::Rsb, GateKind::Sat] {
        c.bench_function(&format!("evaluate_scene_40f_20obj_{gate}"), |b| {
            b.iter(|| {
                evaluate_scene(
                    black_box(&scene),
                    &[ClassLabel::Car],
                    2.0,
                    gate,
                    MdrMode::Consistent,
                    &params,
                )
            })
        });
    }
}

criterion_group!(benches, bench_matching, bench_gates, bench_spearman, bench_scene);
criterion_main!(benches);
