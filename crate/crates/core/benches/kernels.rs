use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use seawake::flowlab::{extrapolate_sequence, farneback_flow, lk_track, FlowParams, Frame, TrackParams};
use seawake::geoproject::ClipTiming;
use seawake::metrics::temporal_smoothness;
use seawake::synthscene::{generate_scene, synth_model, Background, MotionScript, VesselScript};

fn script() -> MotionScript {
    MotionScript {
        vessels: vec![
            VesselScript {
                id: 1,
                waypoints: vec![[0.0, 80.0, 120.0].into(), [2.0, 108.0, 120.0].into()],
                radius_px: 5.0,
                intensity: 0.95,
            },
            VesselScript {
                id: 2,
                waypoints: vec![[0.0, 200.0, 160.0].into(), [2.0, 200.0, 132.0].into()],
                radius_px: 5.0,
                intensity: 0.9,
            },
        ],
        background: Background {
            seed: 5,
            octaves: 4,
            drift: [0.5, 0.0],
            amplitude: 0.08,
        },
    }
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let all = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("sequential", one), ("parallel", all)]
}

fn kernels(c: &mut Criterion) {
    let s = script();
    let timing = ClipTiming::new(0.0, 7.0, 14, 320, 256).unwrap();
    let model = synth_model(&s, &timing, 23.7, 37.9, 100.0, 28.3).unwrap();
    let scene = generate_scene(&s, &timing, &model).unwrap();
    let luma: Vec<Frame> = scene.frames.iter().map(Frame::to_luma).collect();
    let seeds: Vec<_> = scene.ground_truth.iter().map(|g| g.points[0]).collect();
    let flow = FlowParams::default();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_with_input(BenchmarkId::new("farneback_flow", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| farneback_flow(&luma[0], &luma[13], &flow).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("temporal_smoothness", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| temporal_smoothness(&scene.frames, &flow).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("extrapolate_sequence", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| extrapolate_sequence(&scene.frames[0], &scene.frames[13], 12, &flow).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("lk_track", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| lk_track(&scene.frames, &seeds, &TrackParams::default()).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("generate_scene", name), &pool, |b, pool| {
            b.iter(|| pool.install(|| generate_scene(&s, &timing, &model).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
