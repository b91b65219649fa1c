//! Established criticality metrics used for comparison (TTC, THW, DRAC,
//! TET, BTN, STN) and the four-zone severity classification.

use serde::{Deserialize, Serialize};

use crate::model::{ReachParams, RelativeKinematics};

/// Reporting cap applied to classical TTC values (s). Internal comparisons
/// use the uncapped value via [`ttc_classical_raw`].
pub const TTC_REPORT_CAP: f64 = 10.0;

/// Classical time-to-collision under constant velocity: gap over closing
/// speed, defined only for an object ahead that the ego is closing on.
/// Uncapped.
pub fn ttc_classical_raw(k: &RelativeKinematics) -> Option<f64> {
    let dv = k.v_ego - k.v_obj_lon;
    if k.ahead && dv > 0.0 {
        Some(k.r / dv)
    } else {
        None
    }
}

/// Classical TTC clamped to the reporting cap of 10 s.
pub fn ttc_classical(k: &RelativeKinematics) -> Option<f64> {
    ttc_classical_raw(k).map(|t| t.min(TTC_REPORT_CAP))
}

/// Time headway: gap over ego speed.
pub fn thw(k: &RelativeKinematics) -> Option<f64> {
    if k.v_ego > 0.0 {
        Some(k.r / k.v_ego)
    } else {
        None
    }
}

/// Deceleration rate to avoid crash, the constant-velocity special case of
/// required longitudinal deceleration. Capped at the braking limit.
pub fn drac(k: &RelativeKinematics, params: &ReachParams) -> f64 {
    let dv = k.v_ego - k.v_obj_lon;
    if dv > 0.0 && k.r > 0.0 {
        (dv * dv / (2.0 * k.r)).min(params.a_brake_max)
    } else {
        0.0
    }
}

/// Brake threat number: DRAC normalized by the braking capability, in [0, 1].
pub fn btn(k: &RelativeKinematics, params: &ReachParams) -> f64 {
    drac(k, params) / params.a_brake_max
}

/// Time exposed below the TTC threshold, accumulated over a track's gated
/// frames: cycle time times the number of gated frames whose TTC is defined
/// and under the threshold.
pub fn tet_track(frames: &[(bool, Option<f64>)], t_cycle: f64, params: &ReachParams) -> f64 {
    let n = frames
        .iter()
        .filter(|(gated, ttc)| *gated && matches!(ttc, Some(t) if *t < params.ttc_tet_threshold))
        .count();
    t_cycle * n as f64
}

/// Steer threat number: lateral evasion demand over the lateral
/// reachable-set bound.
pub fn stn(lea: f64, params: &ReachParams) -> f64 {
    lea / params.a_lat_max
}

/// Metric families with severity thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SeverityMetric {
    Ttc,
    Btn,
    Mdr,
    Fsr,
    Lea,
}

impl std::fmt::Display for SeverityMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SeverityMetric::Ttc => "TTC",
            SeverityMetric::Btn => "BTN",
            SeverityMetric::Mdr => "MDR",
            SeverityMetric::Fsr => "FSR",
            SeverityMetric::Lea => "LEA",
        };
        write!(f, "{s}")
    }
}

/// Operational severity zones, ordered from benign to worst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeverityZone {
    Safe,
    Moderate,
    Critical,
    Imminent,
}

impl std::fmt::Display for SeverityZone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SeverityZone::Safe => "safe",
            SeverityZone::Moderate => "moderate",
            SeverityZone::Critical => "critical",
            SeverityZone::Imminent => "imminent",
        };
        write!(f, "{s}")
    }
}

/// Classifies a metric value into a severity zone.
///
/// Bands are lower-exclusive/upper-inclusive on the printed boundaries:
/// MDR (2, 4, 6), FSR (1, 2.5, 5), LEA (1, 2, 4) and BTN (0.4, 0.7, 1.0)
/// escalate with value; TTC (3, 2, 1) escalates as it shrinks, with the
/// boundary value falling into the more severe zone. An undefined TTC
/// (not closing) is safe.
pub fn classify(metric: SeverityMetric, value: Option<f64>) -> SeverityZone {
    let Some(v) = value else {
        return SeverityZone::Safe;
    };
    let increasing = |v: f64, b: [f64; 3]| {
        if v <= b[0] {
            SeverityZone::Safe
        } else if v <= b[1] {
            SeverityZone::Moderate
        } else if v <= b[2] {
            SeverityZone::Critical
        } else {
            SeverityZone::Imminent
        }
    };
    match metric {
        SeverityMetric::Ttc => {
            if v > 3.0 {
                SeverityZone::Safe
            } else if v > 2.0 {
                SeverityZone::Moderate
            } else if v > 1.0 {
                SeverityZone::Critical
            } else {
                SeverityZone::Imminent
            }
        }
        SeverityMetric::Btn => increasing(v, [0.4, 0.7, 1.0]),
        SeverityMetric::Mdr => increasing(v, [2.0, 4.0, 6.0]),
        SeverityMetric::Fsr => increasing(v, [1.0, 2.5, 5.0]),
        SeverityMetric::Lea => increasing(v, [1.0, 2.0, 4.0]),
    }
}

/// Per-track representatives of the classical metrics, taken at their most
/// critical values over the track's gated frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackClassic {
    pub min_ttc: Option<f64>,
    pub min_thw: Option<f64>,
    pub max_drac: f64,
    pub tet: f64,
    pub min_abs_dy: Option<f64>,
}

/// Collects per-track classical scores from the gated occurrences of a
/// track. `occurrences` pairs each frame's kinematics with its gated flag.
pub fn track_classic(
    occurrences: &[(RelativeKinematics, bool)],
    t_cycle: f64,
    params: &ReachParams,
) -> TrackClassic {
    let gated = || occurrences.iter().filter(|(_, g)| *g);
    let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |acc: Option<f64>, v| {
        Some(acc.map_or(v, |a| a.min(v)))
    });

    let min_ttc = fold_min(&mut gated().filter_map(|(k, _)| ttc_classical(k)));
    let min_thw = fold_min(&mut gated().filter_map(|(k, _)| thw(k)));
    let min_abs_dy = fold_min(&mut gated().map(|(k, _)| k.d_y.abs()));
    let max_drac = gated().map(|(k, _)| drac(k, params)).fold(0.0f64, f64::max);
    let tet_frames: Vec<(bool, Option<f64>)> = occurrences
        .iter()
        .map(|(k, g)| (*g, ttc_classical_raw(k)))
        .collect();
    let tet = tet_track(&tet_frames, t_cycle, params);

    TrackClassic {
        min_ttc,
        min_thw,
        max_drac,
        tet,
        min_abs_dy,
    }
}
