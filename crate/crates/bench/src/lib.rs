//! Input builders shared by the benchmarks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use avert_core::model::{AgentState, ClassLabel, Frame, Scene, Vec2};

pub fn agent(id: &str, x: f64, y: f64, heading: f64, vx: f64, vy: f64) -> AgentState {
    AgentState {
        id: id.to_string(),
        class_label: ClassLabel::Car,
        position: Vec2::new(x, y),
        heading,
        length: 4.5,
        width: 1.8,
        velocity: Vec2::new(vx, vy),
        accel_lon: 0.0,
        confidence: 1.0,
    }
}

/// A frame with `n` ground-truth objects and `n` detections, most of them
/// matchable, scattered over a 100 m x 30 m patch.
pub fn crowded_frame(n: usize, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gt = Vec::with_capacity(n);
    let mut det = Vec::with_capacity(n);
    for i in 0..n {
        let x = rng.gen_range(-50.0..50.0);
        let y = rng.gen_range(-15.0..15.0);
        gt.push(agent(&format!("g{i}"), x, y, 0.0, 8.0, 0.0));
        // Jitter keeps ~85% of pairs inside a 2 m matching threshold.
        let dx = rng.gen_range(-1.5..1.5);
        let dy = rng.gen_range(-1.5..1.5);
        det.push(agent(&format!("d{i}"), x + dx, y + dy, 0.0, 8.0, 0.0));
    }
    Frame {
        timestamp: 0.0,
        ego: agent("ego", -80.0, 0.0, 0.0, 12.0, 0.0),
        gt_objects: gt,
        detections: det,
    }
}

/// A multi-frame scene with a moving ego, a handful of tracked objects,
/// one persistent miss, and one persistent phantom.
pub fn highway_scene(n_frames: usize, n_objects: usize, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_cycle = 0.5;
    let lanes = [-3.5, 0.0, 3.5];
    let inits: Vec<(f64, f64, f64)> = (0..n_objects)
        .map(|_| {
            (
                rng.gen_range(5.0..120.0),
                lanes[rng.gen_range(0..lanes.len())],
                rng.gen_range(0.0..15.0),
            )
        })
        .collect();

    let frames = (0..n_frames)
        .map(|k| {
            let t = k as f64 * t_cycle;
            let ego_x = 10.0 * t;
            let mut gt = Vec::new();
            let mut det = Vec::new();
            for (i, (x0, lane, v)) in inits.iter().enumerate() {
                let obj = agent(&format!("o{i}"), x0 + v * t, *lane, 0.0, *v, 0.0);
                // Object 0 is never detected; the rest are tracked.
                if i != 0 {
                    let mut d = obj.clone();
                    d.id = format!("t{i}");
                    d.confidence = 0.85;
                    det.push(d);
                }
                gt.push(obj);
            }
            let mut ghost = agent("ghost", ego_x + 30.0, 0.0, 0.0, 0.0, 0.0);
            ghost.confidence = 0.7;
            det.push(ghost);
            Frame {
                timestamp: t,
                ego: agent("ego", ego_x, 0.0, 0.0, 10.0, 0.0),
                gt_objects: gt,
                detections: det,
            }
        })
        .collect();

    Scene {
        scene_id: format!("bench-{seed}"),
        t_cycle,
        frames,
    }
}
