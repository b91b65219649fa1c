//! Effort metrics: per-frame braking demands and the track-level scores
//! FSR (cumulative speed reduction imposed by a persistent phantom),
//! MDR (peak braking demand imposed by a missed object), and LEA
//! (minimum lateral acceleration needed to evade a predicted collision).
//!
//! All demands are computed only for error frames whose object-ego pair
//! passes the selected collision gate, and are capped by the vehicle
//! capability limits so aggregates stay finite.

use serde::{Deserialize, Serialize};

use crate::gate::{rsb_first_collision, sat_first_collision, GateKind, SatRollout};
use crate::matching::{ErrorKind, ErrorTrack};
use crate::model::{ReachParams, RelativeKinematics, Scene};

/// Which closed form resolves the braking demand for a missed object.
///
/// The constant-acceleration avoidance equation admits two readings that
/// differ in the sign of the half term on the ego side. `Consistent`
/// (the default) uses the gap-consumption derivation, which reduces exactly
/// to the phantom-braking demand when the object does not accelerate.
/// `AsPrinted` solves the literal equation for audit purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdrMode {
    Consistent,
    AsPrinted,
}

impl std::fmt::Display for MdrMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MdrMode::Consistent => write!(f, "consistent"),
            MdrMode::AsPrinted => write!(f, "as-printed"),
        }
    }
}

/// Braking demand for a phantom object ahead, assuming it keeps constant
/// velocity: the constant deceleration that equalizes speeds exactly at
/// contact distance after the reaction time.
///
/// Not closing costs nothing; a gap already consumed within the reaction
/// distance saturates at the emergency cap.
pub fn fp_brake_demand(k: &RelativeKinematics, params: &ReachParams) -> f64 {
    if !k.ahead {
        return 0.0;
    }
    let dv = k.v_ego - k.v_obj_lon;
    if dv <= 0.0 {
        return 0.0;
    }
    let d = k.r - dv * params.t_react;
    if d <= 0.0 {
        return params.a_brake_max;
    }
    (dv * dv / (2.0 * d)).min(params.a_brake_max)
}

/// Detailed result of [`fn_brake_demand`], exposing the unclamped root for
/// residual audits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FnBrakeDemand {
    /// Demand clamped to `[0, a_brake_max]`.
    pub value: f64,
    /// Root before clamping, when the equation was actually solved.
    pub unclamped: Option<f64>,
    /// Set when `AsPrinted` found no positive root and saturated.
    pub no_positive_root: bool,
}

/// Braking demand for a missed object ahead, accounting for the object's
/// own longitudinal acceleration. See [`MdrMode`] for the two resolutions.
pub fn fn_brake_demand(k: &RelativeKinematics, params: &ReachParams, mode: MdrMode) -> f64 {
    fn_brake_demand_detailed(k, params, mode).value
}

pub fn fn_brake_demand_detailed(
    k: &RelativeKinematics,
    params: &ReachParams,
    mode: MdrMode,
) -> FnBrakeDemand {
    let saturated = |no_root: bool| FnBrakeDemand {
        value: params.a_brake_max,
        unclamped: None,
        no_positive_root: no_root,
    };
    let zero = FnBrakeDemand {
        value: 0.0,
        unclamped: None,
        no_positive_root: false,
    };

    if !k.ahead {
        return zero;
    }
    let a_obj = k.a_obj_lon;
    let t_react = params.t_react;
    let u0 = k.v_ego - k.v_obj_lon;
    // Closing speed at the end of the reaction phase.
    let dvr = u0 - a_obj * t_react;
    if dvr <= 0.0 {
        return zero;
    }
    // Gap remaining when braking starts.
    let d = k.r - u0 * t_react + 0.5 * a_obj * t_react * t_react;
    if d <= 0.0 {
        return saturated(false);
    }

    let unclamped = match mode {
        MdrMode::Consistent => dvr * dvr / (2.0 * d) - a_obj,
        MdrMode::AsPrinted => {
            // Substituting x = dvr / (a_brake + a_obj) turns the literal
            // avoidance equation into a_obj*x^2 - 3*dvr*x + 2*d = 0; the
            // smaller positive root is x = 2*d / q with
            // q = (3*dvr + sqrt(disc)) / 2, numerically stable as a_obj -> 0.
            let disc = 9.0 * dvr * dvr - 8.0 * a_obj * d;
            if disc < 0.0 {
                return saturated(true);
            }
            let q = 0.5 * (3.0 * dvr + disc.sqrt());
            let x = 2.0 * d / q;
            if !(x > 0.0) {
                return saturated(true);
            }
            dvr / x - a_obj
        }
    };

    FnBrakeDemand {
        value: unclamped.clamp(0.0, params.a_brake_max),
        unclamped: Some(unclamped),
        no_positive_root: false,
    }
}

/// Residual of the literal constant-acceleration avoidance equation at a
/// candidate braking demand: |LHS - RHS| with both sides evaluated exactly
/// as written. Used to audit `AsPrinted` roots.
pub fn as_printed_residual(k: &RelativeKinematics, params: &ReachParams, a_brake: f64) -> f64 {
    let t = params.t_react;
    let v_ego = k.v_ego;
    let v_obj = k.v_obj_lon;
    let a_obj = k.a_obj_lon;
    let denom = a_brake + a_obj;
    let dvr = v_ego - v_obj - a_obj * t;
    let lhs = v_ego * t + v_ego * dvr / denom + 0.5 * dvr * dvr / denom;
    let rhs = k.r
        + v_obj * t
        + v_obj * dvr / denom
        + 0.5 * a_obj * (t + dvr / denom) * (t + dvr / denom);
    (lhs - rhs).abs()
}

/// Minimum lateral acceleration to evade a collision predicted at `t_coll`,
/// choosing the cheaper of widening the current lateral gap or crossing to
/// the object's other side.
///
/// The lateral closing rate (negative when the gap is shrinking) shifts
/// demand between the two strategies: convergence raises the widening
/// demand and lowers the crossing demand. With no evasion window left the
/// demand saturates at the lateral capability cap.
pub fn lea_frame(
    k: &RelativeKinematics,
    t_coll: f64,
    w_ego: f64,
    w_obj: f64,
    params: &ReachParams,
) -> f64 {
    let w_clear = 0.5 * (w_ego + w_obj) + params.safety_margin;
    let t_eva = t_coll - params.t_react;
    if t_eva <= 0.0 {
        return params.a_lat_cap;
    }

    // Signed rate of change of |d_y|; at d_y = 0 any lateral motion widens.
    let sign = if k.d_y > 0.0 {
        1.0
    } else if k.d_y < 0.0 {
        -1.0
    } else if k.v_rel_y > 0.0 {
        1.0
    } else if k.v_rel_y < 0.0 {
        -1.0
    } else {
        1.0
    };
    let closing_rate = sign * k.v_rel_y;

    let y_widen = (w_clear - k.d_y.abs()).max(0.0);
    let y_cross = w_clear + k.d_y.abs();
    let y_eff_widen = y_widen - closing_rate * t_eva;
    let y_eff_cross = y_cross + closing_rate * t_eva;

    let demand = |y_eff: f64| 2.0 * y_eff.max(0.0) / (t_eva * t_eva);
    demand(y_eff_widen)
        .min(demand(y_eff_cross))
        .min(params.a_lat_cap)
}

/// Per-frame effort for one track occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameEffort {
    pub frame_index: usize,
    pub gated: bool,
    /// Collision time reported by the gate, present iff gated.
    pub t_coll: Option<f64>,
    pub a_brake: f64,
    pub lea: f64,
}

/// Track-level effort scores.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackEffort {
    pub kind: ErrorKind,
    pub identity: String,
    pub frames: Vec<FrameEffort>,
    /// Cumulative speed reduction (m/s); phantom tracks only.
    pub fsr: Option<f64>,
    /// Peak braking demand (m/s^2); missed-object tracks only.
    pub mdr: Option<f64>,
    /// Peak lateral evasion demand over gated frames (m/s^2).
    pub lea_peak: f64,
    /// Number of gated error frames.
    pub n_gated: usize,
    /// Gated error duration: `n_gated * t_cycle` (s).
    pub duration: f64,
}

/// Scores one error track: gates every occurrence, computes the per-frame
/// demands for gated occurrences, and aggregates.
///
/// Ungated occurrences contribute zeros and are excluded from the gated
/// frame count. Objects behind the ego receive no braking demand (braking
/// cannot address them) but are still scored for lateral evasion.
pub fn score_track(
    track: &ErrorTrack,
    scene: &Scene,
    gate_kind: GateKind,
    mdr_mode: MdrMode,
    params: &ReachParams,
) -> TrackEffort {
    let mut frames = Vec::with_capacity(track.occurrences.len());
    for (frame_index, k) in &track.occurrences {
        let frame = &scene.frames[*frame_index];
        let obj = match track.kind {
            ErrorKind::FalseNegative => frame.gt_by_id(&track.identity),
            ErrorKind::FalsePositive => frame.det_by_id(&track.identity),
        }
        .expect("track occurrence refers to an object present in its frame");

        let gate = match gate_kind {
            GateKind::Rsb => rsb_first_collision(&frame.ego, obj, params),
            GateKind::Sat => {
                let rollout = match track.kind {
                    ErrorKind::FalsePositive => SatRollout::for_false_positive(),
                    ErrorKind::FalseNegative => SatRollout::for_false_negative(obj.accel_lon),
                };
                sat_first_collision(&frame.ego, obj, rollout, params)
            }
        };

        let effort = match gate.t_coll {
            Some(t_coll) => {
                let a_brake = match track.kind {
                    ErrorKind::FalsePositive => fp_brake_demand(k, params),
                    ErrorKind::FalseNegative => fn_brake_demand(k, params, mdr_mode),
                };
                FrameEffort {
                    frame_index: *frame_index,
                    gated: true,
                    t_coll: Some(t_coll),
                    a_brake,
                    lea: lea_frame(k, t_coll, frame.ego.width, obj.width, params),
                }
            }
            None => FrameEffort {
                frame_index: *frame_index,
                gated: false,
                t_coll: None,
                a_brake: 0.0,
                lea: 0.0,
            },
        };
        frames.push(effort);
    }

    let gated: Vec<&FrameEffort> = frames.iter().filter(|f| f.gated).collect();
    let n_gated = gated.len();
    let duration = n_gated as f64 * scene.t_cycle;
    let max_brake = gated.iter().map(|f| f.a_brake).fold(0.0f64, f64::max);
    let lea_peak = gated.iter().map(|f| f.lea).fold(0.0f64, f64::max);
    let mean_brake = if n_gated == 0 {
        0.0
    } else {
        gated.iter().map(|f| f.a_brake).sum::<f64>() / n_gated as f64
    };

    let (fsr, mdr) = match track.kind {
        ErrorKind::FalsePositive => (Some(duration * mean_brake), None),
        ErrorKind::FalseNegative => (None, Some(max_brake)),
    };

    TrackEffort {
        kind: track.kind,
        identity: track.identity.clone(),
        frames,
        fsr,
        mdr,
        lea_peak,
        n_gated,
        duration,
    }
}
