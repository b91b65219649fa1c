//! Parametric scene generation with analytically known expected metrics.
//!
//! Each template injects exactly one perception error into an otherwise
//! clean scene and emits a sidecar of expected per-frame demands and
//! track-level scores. The sidecar values come from closed-form oracles in
//! this module that share only the parameter constants with the evaluation
//! pipeline, so a full-pipeline run can be checked end to end against them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentState, ClassLabel, Frame, ReachParams, Scene, Vec2};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid template parameter `{name}`: {msg}")]
    InvalidParam { name: &'static str, msg: String },
    #[error("physically inconsistent template: {0}")]
    Inconsistent(String),
}

/// Scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateKind {
    /// In-path lead vehicle present in ground truth but never detected.
    LeadMiss,
    /// Phantom detection held at constant range ahead of the ego with a
    /// static velocity report, the way persistent sensor ghosts appear.
    PhantomStatic,
    /// Missed object in a neighbouring lane converging laterally.
    CutInConverge,
    /// Missed object passing in a parallel lane with clearance.
    AdjacentPass,
}

impl std::fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TemplateKind::LeadMiss => "lead-miss",
            TemplateKind::PhantomStatic => "phantom-static",
            TemplateKind::CutInConverge => "cut-in-converge",
            TemplateKind::AdjacentPass => "adjacent-pass",
        };
        write!(f, "{s}")
    }
}

/// Template parameters. `gap` is the initial bumper-to-bumper longitudinal
/// gap; lateral fields place and move the object sideways relative to the
/// ego path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTemplate {
    pub kind: TemplateKind,
    pub gap: f64,
    pub ego_speed: f64,
    pub obj_speed: f64,
    pub obj_accel: f64,
    pub lateral_offset: f64,
    pub lateral_rate: f64,
    pub n_frames: usize,
    pub t_cycle: f64,
    pub scene_id: String,
}

impl ScenarioTemplate {
    /// Template defaults; gaps are chosen so the default scenes land in
    /// well-separated gate bands rather than on grid boundaries.
    pub fn defaults(kind: TemplateKind) -> ScenarioTemplate {
        let base = ScenarioTemplate {
            kind,
            gap: 25.0,
            ego_speed: 10.0,
            obj_speed: 0.0,
            obj_accel: 0.0,
            lateral_offset: 0.0,
            lateral_rate: 0.0,
            n_frames: 1,
            t_cycle: 0.5,
            scene_id: format!("synth-{kind}"),
        };
        match kind {
            TemplateKind::LeadMiss => base,
            TemplateKind::PhantomStatic => ScenarioTemplate {
                n_frames: 3,
                ..base
            },
            TemplateKind::CutInConverge => ScenarioTemplate {
                gap: 37.8,
                lateral_offset: 3.0,
                lateral_rate: -1.0,
                ..base
            },
            TemplateKind::AdjacentPass => ScenarioTemplate {
                gap: 5.5,
                obj_speed: 10.0,
                lateral_offset: 3.0,
                ..base
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidecarGateFrame {
    pub gated: bool,
    pub t_coll: Option<f64>,
    pub a_brake: f64,
    pub lea: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarFrame {
    pub identity: String,
    pub frame_index: usize,
    /// Bumper-to-bumper longitudinal gap at this frame.
    pub r: f64,
    pub rsb: SidecarGateFrame,
    pub sat: SidecarGateFrame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidecarTrackGate {
    pub n_gated: usize,
    pub fsr: Option<f64>,
    pub mdr: Option<f64>,
    pub lea_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarTrack {
    pub identity: String,
    pub kind: String,
    pub rsb: SidecarTrackGate,
    pub sat: SidecarTrackGate,
}

/// Expected metrics emitted next to a generated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub scene_id: String,
    pub template: String,
    /// Braking-demand resolution the expectations assume.
    pub mdr_mode: String,
    pub frames: Vec<SidecarFrame>,
    pub tracks: Vec<SidecarTrack>,
}

impl Sidecar {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sidecar serializes");
        s.push('\n');
        s
    }
}

// ---------------------------------------------------------------------------
// Closed-form oracles (independent of the evaluation modules)
// ---------------------------------------------------------------------------

/// Relative geometry of one frame with both agents heading +x: the ego sits
/// at the origin moving at `ego_v`, the object centre at `(dx, dy)` with
/// world velocity `(obj_vx, obj_vy)` and longitudinal acceleration
/// `obj_accel`.
struct RelGeom {
    dx: f64,
    dy: f64,
    ego_v: f64,
    obj_vx: f64,
    obj_vy: f64,
    obj_accel: f64,
    ego_len: f64,
    ego_wid: f64,
    obj_len: f64,
    obj_wid: f64,
}

fn grid_ceil(tau: f64, params: &ReachParams) -> Option<f64> {
    let k = ((tau - 1e-12) / params.dt).ceil().max(0.0);
    let t = k * params.dt;
    if t <= params.t_horizon + 1e-12 {
        Some(t)
    } else {
        None
    }
}

fn oracle_rsb_tcoll(g: &RelGeom, params: &ReachParams) -> Option<f64> {
    let growth = params.a_lon_max.max(params.a_lon_min.abs());
    let half_len = 0.5 * (g.ego_len + g.obj_len);
    let dvx = g.obj_vx - g.ego_v;
    let dvy = g.obj_vy;

    if g.dy == 0.0 && dvy == 0.0 {
        // Co-axial: the gap |dx + dvx*tau| meets half_len + growth*tau^2 at
        // the root of growth*tau^2 - s*dvx*tau + (half_len - |dx|) = 0,
        // with s the sign of dx.
        let (adx, advx) = if g.dx >= 0.0 { (g.dx, dvx) } else { (-g.dx, -dvx) };
        if adx <= half_len {
            return Some(0.0);
        }
        let disc = advx * advx + 4.0 * growth * (adx - half_len);
        let tau = (advx + disc.sqrt()) / (2.0 * growth);
        return grid_ceil(tau, params);
    }

    // General axis-aligned case: scan the gate grid with the support-radius
    // inequality written out for +x-aligned ellipses.
    let steps = (params.t_horizon / params.dt).round() as usize;
    for k in 0..=steps {
        let tau = k as f64 * params.dt;
        let ddx = g.dx + dvx * tau;
        let ddy = g.dy + dvy * tau;
        let dist = (ddx * ddx + ddy * ddy).sqrt();
        if dist == 0.0 {
            return Some(tau);
        }
        let (ux, uy) = (ddx / dist, ddy / dist);
        let rho = |len: f64, wid: f64| {
            let sl = 0.5 * len + 0.5 * growth * tau * tau;
            let st = 0.5 * wid + 0.5 * params.a_lat_max * tau * tau;
            ((sl * ux) * (sl * ux) + (st * uy) * (st * uy)).sqrt()
        };
        if dist <= rho(g.ego_len, g.ego_wid) + rho(g.obj_len, g.obj_wid) {
            return Some(tau);
        }
    }
    None
}

/// Longitudinal travel under constant acceleration with the stop clamp,
/// restated for the oracle path.
fn oracle_lon_disp(v0: f64, a: f64, t: f64) -> f64 {
    if a == 0.0 {
        return v0 * t;
    }
    if v0 == 0.0 {
        return if a > 0.0 { 0.5 * a * t * t } else { 0.0 };
    }
    let t_stop = -v0 / a;
    if t_stop > 0.0 && t_stop < t {
        0.5 * v0 * t_stop
    } else {
        v0 * t + 0.5 * a * t * t
    }
}

fn oracle_sat_tcoll(g: &RelGeom, params: &ReachParams) -> Option<f64> {
    let half_len = 0.5 * (g.ego_len + g.obj_len);
    let half_wid = 0.5 * (g.ego_wid + g.obj_wid);

    if g.dy == 0.0 && g.obj_vy == 0.0 && g.obj_accel == 0.0 {
        // Co-axial constant velocity: pure 1-D closure.
        let (adx, advx) = {
            let dvx = g.obj_vx - g.ego_v;
            if g.dx >= 0.0 {
                (g.dx, dvx)
            } else {
                (-g.dx, -dvx)
            }
        };
        if adx <= half_len {
            return Some(0.0);
        }
        if advx >= 0.0 {
            return None; // opening or holding the gap
        }
        return grid_ceil((adx - half_len) / -advx, params);
    }

    let steps = (params.t_horizon / params.dt).round() as usize;
    for k in 0..=steps {
        let tau = k as f64 * params.dt;
        let rel_dx = g.dx + oracle_lon_disp(g.obj_vx, g.obj_accel, tau) - g.ego_v * tau;
        let rel_dy = g.dy + g.obj_vy * tau;
        if rel_dx.abs() <= half_len && rel_dy.abs() <= half_wid {
            return Some(tau);
        }
    }
    None
}

fn oracle_fp_brake(v_ego: f64, v_obj: f64, r: f64, params: &ReachParams) -> f64 {
    let dv = v_ego - v_obj;
    if dv <= 0.0 {
        return 0.0;
    }
    let d = r - dv * params.t_react;
    if d <= 0.0 {
        return params.a_brake_max;
    }
    (dv * dv / (2.0 * d)).min(params.a_brake_max)
}

fn oracle_fn_brake(v_ego: f64, v_obj: f64, a_obj: f64, r: f64, params: &ReachParams) -> f64 {
    let tr = params.t_react;
    let u0 = v_ego - v_obj;
    let dvr = u0 - a_obj * tr;
    if dvr <= 0.0 {
        return 0.0;
    }
    let d = r - u0 * tr + 0.5 * a_obj * tr * tr;
    if d <= 0.0 {
        return params.a_brake_max;
    }
    (dvr * dvr / (2.0 * d) - a_obj).clamp(0.0, params.a_brake_max)
}

fn oracle_lea(d_y: f64, v_rel_y: f64, t_coll: f64, widths_half_sum: f64, params: &ReachParams) -> f64 {
    let w_clear = widths_half_sum + params.safety_margin;
    let t_eva = t_coll - params.t_react;
    if t_eva <= 0.0 {
        return params.a_lat_cap;
    }
    let sign = if d_y > 0.0 {
        1.0
    } else if d_y < 0.0 {
        -1.0
    } else if v_rel_y > 0.0 {
        1.0
    } else if v_rel_y < 0.0 {
        -1.0
    } else {
        1.0
    };
    let c = sign * v_rel_y;
    let widen = ((w_clear - d_y.abs()).max(0.0) - c * t_eva).max(0.0);
    let cross = ((w_clear + d_y.abs()) + c * t_eva).max(0.0);
    (2.0 * widen.min(cross) / (t_eva * t_eva)).min(params.a_lat_cap)
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

fn make_agent(
    id: &str,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    accel: f64,
    confidence: f64,
    params: &ReachParams,
) -> AgentState {
    AgentState {
        id: id.to_string(),
        class_label: ClassLabel::Car,
        position: Vec2::new(x, y),
        heading: 0.0,
        length: params.default_length,
        width: params.default_width,
        velocity: Vec2::new(vx, vy),
        accel_lon: accel,
        confidence,
    }
}

const DET_SCORE: f64 = 0.9;

/// Generates the scene and its expected-metric sidecar.
pub fn generate(
    template: &ScenarioTemplate,
    params: &ReachParams,
) -> Result<(Scene, Sidecar), SynthError> {
    let bad = |name: &'static str, msg: String| SynthError::InvalidParam { name, msg };
    if template.n_frames < 1 {
        return Err(bad("n_frames", "must be >= 1".to_string()));
    }
    if !(template.t_cycle > 0.0) {
        return Err(bad("t_cycle", "must be > 0".to_string()));
    }
    if !(template.gap > 0.0) {
        return Err(bad(
            "gap",
            format!("must be > 0 (object would overlap the ego), got {}", template.gap),
        ));
    }
    if template.ego_speed < 0.0 {
        return Err(bad("ego_speed", "must be >= 0".to_string()));
    }
    if template.obj_speed < 0.0 {
        return Err(bad("obj_speed", "must be >= 0".to_string()));
    }

    let is_phantom = template.kind == TemplateKind::PhantomStatic;
    let identity = if is_phantom { "fp-0" } else { "fn-0" };
    let half_len = params.default_length; // (L_ego + L_obj) / 2 with equal defaults
    let obj_x0 = template.gap + half_len;

    let mut frames = Vec::with_capacity(template.n_frames);
    let mut side_frames = Vec::with_capacity(template.n_frames);
    let mut rsb_frames: Vec<SidecarGateFrame> = Vec::new();
    let mut sat_frames: Vec<SidecarGateFrame> = Vec::new();

    for k in 0..template.n_frames {
        let t = k as f64 * template.t_cycle;
        let ego_x = template.ego_speed * t;
        let ego = make_agent("ego", ego_x, 0.0, template.ego_speed, 0.0, 0.0, 1.0, params);

        // Object state and frame-relative geometry.
        let (obj, r, d_y, obj_v_lon) = if is_phantom {
            // Constant relative range and a static velocity report.
            let x = ego_x + obj_x0;
            let obj = make_agent(
                identity,
                x,
                template.lateral_offset,
                template.obj_speed,
                template.lateral_rate,
                0.0,
                DET_SCORE,
                params,
            );
            (obj, template.gap, template.lateral_offset, template.obj_speed)
        } else {
            let v = template.obj_speed + template.obj_accel * t;
            if v < 0.0 {
                return Err(SynthError::Inconsistent(format!(
                    "object speed becomes negative at frame {k}; shorten the scene or soften obj_accel"
                )));
            }
            let x = obj_x0 + template.obj_speed * t + 0.5 * template.obj_accel * t * t;
            let y = template.lateral_offset + template.lateral_rate * t;
            let r = x - ego_x - half_len;
            if r <= 0.0 {
                return Err(SynthError::Inconsistent(format!(
                    "object reaches the ego bumper at frame {k} (gap {r:.3})"
                )));
            }
            let obj = make_agent(
                identity,
                x,
                y,
                v,
                template.lateral_rate,
                template.obj_accel,
                1.0,
                params,
            );
            (obj, r, y, v)
        };

        let geom = RelGeom {
            dx: obj.position.x - ego_x,
            dy: d_y,
            ego_v: template.ego_speed,
            obj_vx: obj.velocity.x,
            obj_vy: obj.velocity.y,
            obj_accel: obj.accel_lon,
            ego_len: params.default_length,
            ego_wid: params.default_width,
            obj_len: params.default_length,
            obj_wid: params.default_width,
        };

        let widths_half_sum = 0.5 * (params.default_width + params.default_width);
        let gate_frame = |t_coll: Option<f64>| match t_coll {
            Some(tc) => {
                let a_brake = if is_phantom {
                    oracle_fp_brake(template.ego_speed, obj_v_lon, r, params)
                } else {
                    oracle_fn_brake(template.ego_speed, obj_v_lon, obj.accel_lon, r, params)
                };
                SidecarGateFrame {
                    gated: true,
                    t_coll: Some(tc),
                    a_brake,
                    lea: oracle_lea(d_y, template.lateral_rate, tc, widths_half_sum, params),
                }
            }
            None => SidecarGateFrame {
                gated: false,
                t_coll: None,
                a_brake: 0.0,
                lea: 0.0,
            },
        };

        let rsb = gate_frame(oracle_rsb_tcoll(&geom, params));
        let sat = gate_frame(oracle_sat_tcoll(&geom, params));
        rsb_frames.push(rsb);
        sat_frames.push(sat);
        side_frames.push(SidecarFrame {
            identity: identity.to_string(),
            frame_index: k,
            r,
            rsb,
            sat,
        });

        let (gt, det) = if is_phantom {
            (vec![], vec![obj])
        } else {
            (vec![obj], vec![])
        };
        frames.push(Frame {
            timestamp: t,
            ego,
            gt_objects: gt,
            detections: det,
        });
    }

    let track_gate = |gf: &[SidecarGateFrame]| {
        let gated: Vec<&SidecarGateFrame> = gf.iter().filter(|f| f.gated).collect();
        let n_gated = gated.len();
        let sum_brake: f64 = gated.iter().map(|f| f.a_brake).sum();
        let lea_peak = gated.iter().map(|f| f.lea).fold(0.0f64, f64::max);
        let max_brake = gated.iter().map(|f| f.a_brake).fold(0.0f64, f64::max);
        SidecarTrackGate {
            n_gated,
            fsr: is_phantom.then_some(template.t_cycle * sum_brake),
            mdr: (!is_phantom).then_some(max_brake),
            lea_peak,
        }
    };

    let sidecar = Sidecar {
        scene_id: template.scene_id.clone(),
        template: template.kind.to_string(),
        mdr_mode: "consistent".to_string(),
        frames: side_frames,
        tracks: vec![SidecarTrack {
            identity: identity.to_string(),
            kind: if is_phantom { "FP" } else { "FN" }.to_string(),
            rsb: track_gate(&rsb_frames),
            sat: track_gate(&sat_frames),
        }],
    };

    let scene = Scene {
        scene_id: template.scene_id.clone(),
        t_cycle: template.t_cycle,
        frames,
    };
    Ok((scene, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effort::MdrMode;
    use crate::gate::GateKind;
    use crate::pipeline::evaluate_scene;

    fn params() -> ReachParams {
        ReachParams::default()
    }

    #[test]
    fn lead_miss_expected_mdr() {
        let t = ScenarioTemplate::defaults(TemplateKind::LeadMiss);
        let (_, sidecar) = generate(&t, &params()).unwrap();
        let mdr = sidecar.tracks[0].rsb.mdr.unwrap();
        assert!((mdr - 25.0 / 11.0).abs() < 1e-12); // 2.2727...
        assert!((sidecar.frames[0].rsb.t_coll.unwrap() - 1.7).abs() < 1e-9);
    }

    #[test]
    fn phantom_static_expected_fsr() {
        let t = ScenarioTemplate::defaults(TemplateKind::PhantomStatic);
        let (_, sidecar) = generate(&t, &params()).unwrap();
        let fsr = sidecar.tracks[0].rsb.fsr.unwrap();
        assert!((fsr - 37.5 / 11.0).abs() < 1e-12); // 3.4090...
        assert!(sidecar.frames.iter().all(|f| (f.rsb.a_brake - 25.0 / 11.0).abs() < 1e-12));
    }

    #[test]
    fn cut_in_expected_lea() {
        let t = ScenarioTemplate::defaults(TemplateKind::CutInConverge);
        let (_, sidecar) = generate(&t, &params()).unwrap();
        assert!((sidecar.frames[0].rsb.t_coll.unwrap() - 2.3).abs() < 1e-9);
        assert!((sidecar.frames[0].rsb.lea - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adjacent_pass_sat_gated_out() {
        let t = ScenarioTemplate::defaults(TemplateKind::AdjacentPass);
        let (_, sidecar) = generate(&t, &params()).unwrap();
        assert!(!sidecar.frames[0].sat.gated);
        assert!(sidecar.frames[0].rsb.gated);
        assert_eq!(sidecar.frames[0].rsb.lea, 0.0);
    }

    #[test]
    fn inconsistent_params_rejected() {
        let mut t = ScenarioTemplate::defaults(TemplateKind::LeadMiss);
        t.gap = -1.0;
        assert!(matches!(
            generate(&t, &params()),
            Err(SynthError::InvalidParam { name: "gap", .. })
        ));

        // Fast ego overruns the object in a long scene.
        let mut t = ScenarioTemplate::defaults(TemplateKind::LeadMiss);
        t.gap = 3.0;
        t.n_frames = 4;
        assert!(matches!(generate(&t, &params()), Err(SynthError::Inconsistent(_))));

        let mut t = ScenarioTemplate::defaults(TemplateKind::LeadMiss);
        t.n_frames = 0;
        assert!(generate(&t, &params()).is_err());
    }

    #[test]
    fn round_trip_through_pipeline() {
        let p = params();
        for kind in [
            TemplateKind::LeadMiss,
            TemplateKind::PhantomStatic,
            TemplateKind::CutInConverge,
            TemplateKind::AdjacentPass,
        ] {
            let t = ScenarioTemplate::defaults(kind);
            let (scene, sidecar) = generate(&t, &p).unwrap();
            for (gate, side) in [(GateKind::Rsb, 0usize), (GateKind::Sat, 1)] {
                let eval = evaluate_scene(
                    &scene,
                    &[ClassLabel::Car],
                    2.0,
                    gate,
                    MdrMode::Consistent,
                    &p,
                );
                let records = &eval.class_results[0].records;
                assert_eq!(records.len(), 1, "{kind:?}");
                let rec = &records[0];
                let expect = &sidecar.tracks[0];
                let tg = if side == 0 { &expect.rsb } else { &expect.sat };
                assert_eq!(rec.n_gated, tg.n_gated, "{kind:?} {gate:?}");
                match (rec.fsr, tg.fsr) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-6, "{kind:?} fsr"),
                    (None, None) => {}
                    other => panic!("fsr mismatch {other:?}"),
                }
                match (rec.mdr, tg.mdr) {
                    (Some(a), Some(b)) => assert!((a - b).abs() < 1e-6, "{kind:?} mdr"),
                    (None, None) => {}
                    other => panic!("mdr mismatch {other:?}"),
                }
                assert!((rec.lea_peak - tg.lea_peak).abs() < 1e-6, "{kind:?} lea");
            }
        }
    }
}
