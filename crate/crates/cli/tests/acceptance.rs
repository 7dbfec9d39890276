//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seawake::conditioning::{build_payload, parse_payload, serialize_payload, vessel_box, Role};
use seawake::flowlab::{farneback_flow, lk_track, FlowParams, Frame, TrackParams};
use seawake::geoproject::{
    inverse_project, rotate, unrotate_frame, Anchor, CameraFrameModel, ClipTiming, EastNorth, LocalOrigin, Pixel,
    PixelTrajectory,
};
use seawake::metrics::{psnr, temporal_smoothness, EvaluationReport};
use seawake::synthscene::{generate_scene, synth_model, value_noise, water, Background, MotionScript, VesselScript};
use seawake::telemetry::{GeoFix, TelemetryLog};
use seawake_cli::commands::TrajectoryDoc;
use seawake_cli::frames_io::{frame_name, read_frame};

type Check = Result<(), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> Check {
    ensure!(
        elapsed.as_secs_f64() < limit_s,
        "took {:.2} s, limit {limit_s} s",
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn clip_timing() -> ClipTiming {
    ClipTiming::new(0.0, 7.0, 14, 1024, 576).unwrap()
}

fn projection_round_trip() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lon0 = rng.gen_range(-170.0..170.0);
    let lat0 = rng.gen_range(-60.0..60.0);
    let theta = rng.gen_range(0.0..360.0);
    let origin = LocalOrigin::new(lon0, lat0).unwrap();
    let anchor = Anchor {
        center: Pixel::new(512.0, 288.0),
        fix: GeoFix::new(1, 0.0, lon0, lat0),
    };
    let model = CameraFrameModel::new(origin, theta, 28.3, BTreeMap::from([(1, anchor)]), clip_timing()).unwrap();
    let (mut worst_deg, mut worst_px) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let fix = GeoFix::new(1, 0.0, lon0 + rng.gen_range(-0.01..0.01), lat0 + rng.gen_range(-0.01..0.01));
        let p = model.project_fix(&fix, 1).map_err(|e| e.to_string())?;
        let back = inverse_project(p, 0.0, &model, 1).map_err(|e| e.to_string())?;
        worst_deg = worst_deg.max((back.lon - fix.lon).abs()).max((back.lat - fix.lat).abs());

        let q = Pixel::new(rng.gen_range(0.0..1024.0), rng.gen_range(0.0..576.0));
        let g = inverse_project(q, 0.0, &model, 1).map_err(|e| e.to_string())?;
        let q2 = model.project_fix(&g, 1).map_err(|e| e.to_string())?;
        worst_px = worst_px.max(q2.distance(q));
    }
    ensure!(worst_deg < 1e-9, "geo round trip error {worst_deg:e} deg");
    ensure!(worst_px < 1e-6, "pixel round trip error {worst_px:e} px");
    within(start.elapsed(), 1.0)
}

fn rotation_properties() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let v = EastNorth {
            e: rng.gen_range(-1e4..1e4),
            n: rng.gen_range(-1e4..1e4),
        };
        let theta = rng.gen_range(-360.0..360.0);
        let f = rotate(v, theta);
        let norm = v.norm();
        ensure!((f.norm() - norm).abs() <= 1e-9 * norm, "norm changed for {v:?} at {theta}");
        let back = unrotate_frame(f.fx, f.fy, theta);
        let err = (back.e - v.e).hypot(back.n - v.n);
        ensure!(err <= 1e-9 * norm, "inverse error {err:e} for {v:?} at {theta}");
    }
    within(start.elapsed(), 1.0)
}

fn scale_fixture() -> Check {
    // Two vessels 6 m east / 8 m north apart, symmetric about (0, 0).
    let m_lat = seawake::geoproject::METRES_PER_DEG_LAT;
    let log = TelemetryLog::from_fixes([
        GeoFix::new(1, 0.0, -3.0 / m_lat, -4.0 / m_lat),
        GeoFix::new(1, 1.0, -3.0 / m_lat, -4.0 / m_lat),
        GeoFix::new(2, 0.0, 3.0 / m_lat, 4.0 / m_lat),
        GeoFix::new(2, 1.0, 3.0 / m_lat, 4.0 / m_lat),
    ])
    .map_err(|e| e.to_string())?;
    let centres = [(1, Pixel::new(100.0, 100.0)), (2, Pixel::new(100.0, 383.0))];
    let (model, est) = CameraFrameModel::from_log(&log, 100.0, None, clip_timing(), &centres).map_err(|e| e.to_string())?;
    let est = est.ok_or("no scale estimate")?;
    ensure!((est.metre_distance - 10.0).abs() < 1e-9, "metre distance {}", est.metre_distance);
    ensure!((est.pixel_distance - 283.0).abs() < 1e-9, "pixel distance {}", est.pixel_distance);
    ensure!((model.scale() - 28.3).abs() < 1e-9, "scale {}", model.scale());
    Ok(())
}

fn payload_contract() -> Check {
    let timing = clip_timing();
    let track = |id, x: f64, y: f64| PixelTrajectory {
        vessel_id: id,
        points: (0..14).map(|i| Pixel::new(x + 0.8 * i as f64, y - 2.1 * i as f64)).collect(),
        timestamps: (0..14).map(|i| timing.frame_time(i)).collect(),
    };
    let (a, b) = (track(99999, 430.0, 330.0), track(100000, 560.0, 350.0));
    let payload = build_payload(
        &timing,
        [
            (vessel_box(a.points[0], 40.0, &timing).map_err(|e| e.to_string())?, &a),
            (vessel_box(b.points[0], 40.0, &timing).map_err(|e| e.to_string())?, &b),
        ],
        35.0,
        30.0,
        "frame_0001.png",
    )
    .map_err(|e| e.to_string())?;
    let entries = payload.entries();
    ensure!(entries.len() == 6, "{} entries", entries.len());
    let corners: Vec<_> = entries.iter().filter(|e| e.role != Role::Vessel).collect();
    ensure!(corners.len() == 4, "{} corner entries", corners.len());
    for c in &corners {
        ensure!(c.trajectory.len() == 14, "corner trajectory has {} points", c.trajectory.len());
        ensure!(c.trajectory.iter().all(|&p| p == c.trajectory[0]), "corner trajectory moves");
        ensure!(c.bbox.w == 35.0 && c.bbox.h == 35.0, "corner box {:?}", c.bbox);
        let gaps = [c.bbox.x, c.bbox.y, 1024.0 - c.bbox.x - 35.0, 576.0 - c.bbox.y - 35.0];
        ensure!(
            gaps.iter().filter(|&&g| g == 30.0).count() == 2,
            "corner box {:?} not inset 30 px from its two edges",
            c.bbox
        );
    }
    let bytes = serialize_payload(&payload);
    let back = parse_payload(&bytes).map_err(|e| e.to_string())?;
    ensure!(back == payload, "parsed payload differs");
    ensure!(serialize_payload(&back) == bytes, "re-serialised bytes differ");
    Ok(())
}

fn noise_frame(bg: &Background, w: usize, h: usize, dx: f64, dy: f64) -> Frame {
    Frame::from_fn(w, h, 1, |x, y, _| 0.5 + 0.8 * value_noise(bg, x as f64 - dx, y as f64 - dy)).unwrap()
}

fn flow_errors(shift: (f64, f64)) -> Result<Vec<f64>, String> {
    let bg = Background {
        seed: 17,
        octaves: 3,
        drift: [0.0, 0.0],
        amplitude: 1.0,
    };
    let (w, h, margin) = (256, 256, 16);
    let a = noise_frame(&bg, w, h, 0.0, 0.0);
    let b = noise_frame(&bg, w, h, shift.0, shift.1);
    let flow = farneback_flow(&a, &b, &FlowParams::default()).map_err(|e| e.to_string())?;
    let mut errors = Vec::new();
    for y in margin..h - margin {
        for x in margin..w - margin {
            let [u, v] = flow.at(x, y);
            errors.push((u - shift.0).hypot(v - shift.1));
        }
    }
    Ok(errors)
}

fn farneback_shift_recovery() -> Check {
    let start = Instant::now();
    let e = flow_errors((3.0, 0.0))?;
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let good = e.iter().filter(|&&x| x < 0.5).count() as f64 / e.len() as f64;
    ensure!(mean < 0.25, "integer shift mean error {mean:.4} px");
    ensure!(good >= 0.9, "only {:.1}% of pixels under 0.5 px", 100.0 * good);
    let e = flow_errors((1.5, -2.25))?;
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    ensure!(mean < 0.3, "subpixel shift mean error {mean:.4} px");
    within(start.elapsed(), 10.0)
}

fn two_vessel_script(drift: [f64; 2], vessel_step: (f64, f64), fps: f64) -> MotionScript {
    let v = (vessel_step.0 * fps, vessel_step.1 * fps);
    let vessel = |id, x: f64, y: f64, intensity| VesselScript {
        id,
        waypoints: vec![[-1.0, x - v.0, y - v.1].into(), [3.0, x + 3.0 * v.0, y + 3.0 * v.1].into()],
        radius_px: 6.0,
        intensity,
    };
    MotionScript {
        vessels: vec![vessel(99999, 420.0, 330.0, 0.95), vessel(100000, 600.0, 360.0, 0.85)],
        background: Background {
            seed: 2024,
            octaves: 4,
            drift,
            amplitude: 0.08,
        },
    }
}

fn lk_tracking() -> Check {
    let start = Instant::now();
    let timing = clip_timing();
    let script = two_vessel_script([0.0, 0.0], (2.0, 0.0), timing.fps);
    let model = synth_model(&script, &timing, 23.65, 37.94, 100.0, 28.3).map_err(|e| e.to_string())?;
    let scene = generate_scene(&script, &timing, &model).map_err(|e| e.to_string())?;
    let params = TrackParams {
        window: 21,
        pyramid_levels: 3,
        ..TrackParams::default()
    };
    let seeds: Vec<Pixel> = scene.ground_truth.iter().map(|g| g.points[0]).collect();
    let gen_time = start.elapsed();
    let tracks = lk_track(&scene.frames, &seeds, &params).map_err(|e| e.to_string())?;
    let track_time = start.elapsed() - gen_time;
    for (t, g) in tracks.iter().zip(&scene.ground_truth) {
        for (i, (p, q)) in t.points.iter().zip(&g.points).enumerate() {
            ensure!(t.valid[i], "vessel {} lost at frame {i}", g.vessel_id);
            let d = p.distance(*q);
            ensure!(d < 0.5, "vessel {} off by {d:.3} px at frame {i}", g.vessel_id);
        }
    }
    within(track_time, 5.0)
}

fn smoothness_calibration() -> Check {
    let bg = Background {
        seed: 5,
        octaves: 4,
        drift: [2.0, 0.0],
        amplitude: 0.6,
    };
    let (w, h) = (256, 192);
    let still: Vec<Frame> = (0..4).map(|_| noise_frame(&bg, w, h, 0.0, 0.0)).collect();
    let moving: Vec<Frame> = (0..6)
        .map(|i| Frame::from_fn(w, h, 1, |x, y, _| 0.5 + water(&bg, x as f64, y as f64, i)).unwrap())
        .collect();
    let p = FlowParams::default();
    let s0 = temporal_smoothness(&still, &p).map_err(|e| e.to_string())?;
    let s2 = temporal_smoothness(&moving, &p).map_err(|e| e.to_string())?;
    ensure!(s0 < 1e-3, "static video smoothness {s0:e}");
    ensure!((s2 - 2.0).abs() <= 0.3, "2 px/frame video smoothness {s2:.4}");
    Ok(())
}

fn seawake(args: &[&str], cwd: &Path) -> Check {
    let out = Command::new(env!("CARGO_BIN_EXE_seawake"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| format!("cannot run seawake: {e}"))?;
    ensure!(
        out.status.success(),
        "`seawake {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))
}

/// synth -> project -> condition -> evaluate, all through the binary.
fn run_pipeline(root: &Path) -> Check {
    let script = two_vessel_script([0.0, 0.0], (2.0, -0.5), 7.0);
    std::fs::create_dir_all(root).map_err(|e| e.to_string())?;
    std::fs::write(root.join("script.json"), script.to_json()).map_err(|e| e.to_string())?;
    seawake(&["synth", "--script", "script.json", "--out", "scene"], root)?;
    seawake(&["project", "--config", "scene/config.json", "--out", "run"], root)?;
    seawake(&["condition", "--config", "scene/config.json", "--out", "run", "--overlay"], root)?;
    seawake(
        &["evaluate", "--config", "scene/config.json", "--out", "run", "--generated", "scene/frames", "--method", "oracle"],
        root,
    )
}

fn crop(f: &Frame, margin: usize) -> Frame {
    Frame::from_fn(f.width() - 2 * margin, f.height() - 2 * margin, f.channels(), |x, y, c| {
        f.get(x + margin, y + margin, c)
    })
    .unwrap()
}

fn end_to_end_oracle(work: &Path) -> Check {
    let start = Instant::now();
    let root = work.join("pipeline");
    run_pipeline(&root)?;

    let truth: TrajectoryDoc = read_json(&root.join("scene/ground_truth.json"))?;
    let projected: TrajectoryDoc = read_json(&root.join("run/trajectories.json"))?;
    ensure!(truth.trajectories.len() == projected.trajectories.len(), "vessel count differs");
    let mut worst = 0.0f64;
    for (t, p) in truth.trajectories.iter().zip(&projected.trajectories) {
        ensure!(t.vessel_id == p.vessel_id, "vessel order differs");
        for (a, b) in t.points.iter().zip(&p.points) {
            worst = worst.max(a.distance(*b));
        }
    }
    ensure!(worst < 1e-4, "projected paths deviate by {worst:e} px");
    ensure!(root.join("run/payload.json").exists() && root.join("run/overlay.png").exists(), "payload or overlay missing");

    let report: EvaluationReport = read_json(&root.join("run/report.json"))?;
    let err = report.trajectory_error_mean.ok_or("no trajectory error")?;
    ensure!(err < 1.5, "oracle trajectory error {err:.3} px");
    ensure!(report.tracking_validity == 1.0, "tracking validity {}", report.tracking_validity);

    // Pure translation: water and vessels share one velocity.
    let shift = root.join("shift");
    std::fs::create_dir_all(&shift).map_err(|e| e.to_string())?;
    let script = two_vessel_script([0.8, 0.4], (0.8, 0.4), 7.0);
    std::fs::write(shift.join("script.json"), script.to_json()).map_err(|e| e.to_string())?;
    std::fs::write(shift.join("clip.json"), r#"{"n_frames": 16}"#).map_err(|e| e.to_string())?;
    seawake(&["synth", "--config", "clip.json", "--script", "script.json", "--out", "scene"], &shift)?;
    seawake(&["baseline", "--config", "scene/config.json", "--out", "run", "-n", "14"], &shift)?;
    let mid = frame_name(9);
    let generated = read_frame(&shift.join("run/baseline").join(&mid)).map_err(|e| e.to_string())?;
    let truth = read_frame(&shift.join("scene/frames").join(&mid)).map_err(|e| e.to_string())?;
    let db = psnr(&crop(&generated, 32), &crop(&truth, 32)).map_err(|e| e.to_string())?;
    ensure!(db > 30.0, "baseline midpoint PSNR {db:.2} dB");
    ensure!(
        shift.join("run/baseline").join(frame_name(15)).exists() && !shift.join("run/baseline").join(frame_name(16)).exists(),
        "baseline frame numbering"
    );
    within(start.elapsed(), 60.0)
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(work: &Path) -> Check {
    let (a, b) = (work.join("det_a"), work.join("det_b"));
    run_pipeline(&a)?;
    run_pipeline(&b)?;
    let (fa, fb) = (files_under(&a), files_under(&b));
    ensure!(fa == fb, "runs produced different file sets");
    ensure!(fa.iter().any(|p| p.ends_with("payload.json")), "no payload produced");
    ensure!(fa.iter().any(|p| p.ends_with("report.json")), "no report produced");
    ensure!(fa.iter().filter(|p| p.extension().is_some_and(|e| e == "png")).count() >= 14, "no frames produced");
    for rel in &fa {
        let (x, y) = (std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap());
        ensure!(x == y, "{} differs between runs", rel.display());
    }
    Ok(())
}

fn main() {
    let work = tempfile::tempdir().expect("temporary directory");
    let criteria: Vec<Criterion> = vec![
        ("projection round-trip", Box::new(projection_round_trip)),
        ("rotation properties", Box::new(rotation_properties)),
        ("scale fixture", Box::new(scale_fixture)),
        ("payload contract", Box::new(payload_contract)),
        ("farneback shift recovery", Box::new(farneback_shift_recovery)),
        ("lk tracking", Box::new(lk_tracking)),
        ("temporal smoothness calibration", Box::new(smoothness_calibration)),
        ("end-to-end oracle", Box::new(|| end_to_end_oracle(work.path()))),
        ("determinism", Box::new(|| determinism(work.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("PASS {:>2} {name} ({secs:.2} s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
