//! Domain model: evaluation parameters, agents, frames, scenes, scene-file
//! ingestion, and the ego-frame kinematic projection used by every
//! downstream module.
//!
//! Scene files are line-delimited JSON: the first line is a header carrying
//! `scene_id` and `t_cycle`, and every following line is one frame with the
//! ego state, the ground-truth object list, and the detection list.

use std::collections::HashSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while loading or validating scenes and configuration.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: parse error: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: field `{field}` {msg}")]
    Field {
        line: usize,
        field: &'static str,
        msg: String,
    },
    #[error("invariant violation: {field}: {msg}")]
    Invariant { field: &'static str, msg: String },
    #[error("scene contains no frames")]
    EmptyScene,
    #[error("config line {line}: unknown key `{key}`")]
    UnknownConfigKey { line: usize, key: String },
    #[error("config line {line}: invalid value for `{key}`: {msg}")]
    BadConfigValue { line: usize, key: String, msg: String },
}

/// 2-D vector in world coordinates (metres / metres-per-second).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Left-hand normal (rotation by +90 degrees).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn from_heading(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Evaluation parameters: reachable-set growth bounds, capability caps,
/// default vehicle dimensions, and timing constants.
///
/// Growth bounds (`a_lon_max`, `a_lon_min`, `a_lat_max`) shape the reachable
/// sets used for collision filtering and are deliberately smaller than the
/// capability limits (`a_brake_max`, `a_lat_cap`) that cap the computed
/// effort values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachParams {
    /// Forward acceleration bound for reachable-set growth (m/s^2, > 0).
    pub a_lon_max: f64,
    /// Braking bound for reachable-set growth (m/s^2, < 0).
    pub a_lon_min: f64,
    /// Lateral acceleration bound for reachable-set growth (m/s^2, > 0).
    pub a_lat_max: f64,
    /// Emergency-braking capability cap on braking demand (m/s^2).
    pub a_brake_max: f64,
    /// Lateral-acceleration capability cap on evasion demand (m/s^2).
    pub a_lat_cap: f64,
    /// Default vehicle length (m), used by the scenario generator.
    pub default_length: f64,
    /// Default vehicle width (m), used by the scenario generator.
    pub default_width: f64,
    /// Lateral safety margin added to the clearance width (m).
    pub safety_margin: f64,
    /// System reaction time, sensor to actuator (s).
    pub t_react: f64,
    /// Collision-prediction horizon (s).
    pub t_horizon: f64,
    /// Collision-gate time step (s).
    pub dt: f64,
    /// Default annotation period between frames (s); the scene header
    /// value takes precedence for loaded scenes.
    pub t_cycle: f64,
    /// TTC threshold used by the time-exposed-TTC accumulation (s).
    pub ttc_tet_threshold: f64,
}

impl Default for ReachParams {
    fn default() -> Self {
        ReachParams {
            a_lon_max: 2.0,
            a_lon_min: -3.0,
            a_lat_max: 2.0,
            a_brake_max: 10.0,
            a_lat_cap: 5.0,
            default_length: 4.5,
            default_width: 1.8,
            safety_margin: 0.5,
            t_react: 0.3,
            t_horizon: 5.0,
            dt: 0.1,
            t_cycle: 0.5,
            ttc_tet_threshold: 2.0,
        }
    }
}

impl ReachParams {
    /// Longitudinal growth rate for reachable sets: the larger magnitude of
    /// the forward and braking bounds.
    pub fn a_lon_growth(&self) -> f64 {
        self.a_lon_max.max(self.a_lon_min.abs())
    }

    /// Checks every parameter invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), ModelError> {
        fn check(cond: bool, field: &'static str, msg: &str) -> Result<(), ModelError> {
            if cond {
                Ok(())
            } else {
                Err(ModelError::Invariant {
                    field,
                    msg: msg.to_string(),
                })
            }
        }
        check(self.a_lon_max > 0.0, "a_lon_max", "must be > 0")?;
        check(self.a_lon_min < 0.0, "a_lon_min", "must be < 0")?;
        check(self.a_lat_max > 0.0, "a_lat_max", "must be > 0")?;
        check(self.a_brake_max > 0.0, "a_brake_max", "must be > 0")?;
        check(self.a_lat_cap > 0.0, "a_lat_cap", "must be > 0")?;
        check(self.dt > 0.0, "dt", "must be > 0")?;
        check(self.dt <= self.t_horizon, "dt", "must be <= t_horizon")?;
        check(self.t_react >= 0.0, "t_react", "must be >= 0")?;
        check(self.t_cycle > 0.0, "t_cycle", "must be > 0")?;
        check(self.default_length > 0.0, "default_length", "must be > 0")?;
        check(self.default_width > 0.0, "default_width", "must be > 0")?;
        check(self.safety_margin > 0.0, "safety_margin", "must be > 0")?;
        check(
            self.ttc_tet_threshold > 0.0,
            "ttc_tet_threshold",
            "must be > 0",
        )?;
        Ok(())
    }

    /// Applies flat `key = value` overrides from a config file. Unknown keys
    /// are an error; the merged parameters are re-validated.
    pub fn apply_config(&mut self, text: &str) -> Result<(), ModelError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| ModelError::Parse {
                line,
                msg: format!("expected `key = value`, got `{stripped}`"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|e| ModelError::BadConfigValue {
                line,
                key: key.to_string(),
                msg: format!("{e}"),
            })?;
            match key {
                "a_lon_max" => self.a_lon_max = value,
                "a_lon_min" => self.a_lon_min = value,
                "a_lat_max" => self.a_lat_max = value,
                "a_brake_max" => self.a_brake_max = value,
                "a_lat_cap" => self.a_lat_cap = value,
                "default_length" => self.default_length = value,
                "default_width" => self.default_width = value,
                "safety_margin" => self.safety_margin = value,
                "t_react" => self.t_react = value,
                "t_horizon" => self.t_horizon = value,
                "dt" => self.dt = value,
                "t_cycle" => self.t_cycle = value,
                "ttc_tet_threshold" => self.ttc_tet_threshold = value,
                _ => {
                    return Err(ModelError::UnknownConfigKey {
                        line,
                        key: key.to_string(),
                    })
                }
            }
        }
        self.validate()
    }
}

/// Object class used for per-class matching and reporting. Unrecognized
/// labels in scene files fold into `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Car,
    Truck,
    Other,
}

impl ClassLabel {
    pub fn from_scene_label(s: &str) -> ClassLabel {
        match s {
            "car" => ClassLabel::Car,
            "truck" => ClassLabel::Truck,
            _ => ClassLabel::Other,
        }
    }

    pub fn parse_strict(s: &str) -> Option<ClassLabel> {
        match s {
            "car" => Some(ClassLabel::Car),
            "truck" => Some(ClassLabel::Truck),
            "other" => Some(ClassLabel::Other),
            _ => None,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassLabel::Car => write!(f, "car"),
            ClassLabel::Truck => write!(f, "truck"),
            ClassLabel::Other => write!(f, "other"),
        }
    }
}

/// One agent (ego, ground-truth object, or detection) at one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: String,
    pub class_label: ClassLabel,
    pub position: Vec2,
    /// Heading angle in world frame (rad).
    pub heading: f64,
    pub length: f64,
    pub width: f64,
    pub velocity: Vec2,
    /// Signed acceleration along the agent's heading (m/s^2, positive
    /// forward). Always zero for detections.
    pub accel_lon: f64,
    /// Detection confidence in [0, 1]; ground truth is fixed at 1.
    pub confidence: f64,
}

impl AgentState {
    pub fn heading_vec(&self) -> Vec2 {
        Vec2::from_heading(self.heading)
    }
}

/// One annotation frame: timestamp, ego state, and the two object lists.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub timestamp: f64,
    pub ego: AgentState,
    pub gt_objects: Vec<AgentState>,
    pub detections: Vec<AgentState>,
}

impl Frame {
    pub fn gt_by_id(&self, id: &str) -> Option<&AgentState> {
        self.gt_objects.iter().find(|o| o.id == id)
    }

    pub fn det_by_id(&self, id: &str) -> Option<&AgentState> {
        self.detections.iter().find(|o| o.id == id)
    }
}

/// A time-ordered sequence of frames with a fixed annotation period.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scene_id: String,
    pub t_cycle: f64,
    pub frames: Vec<Frame>,
}

/// Ego-frame projection of one object at one frame.
///
/// `r` is the bumper-to-bumper longitudinal gap (centre gap minus the half
/// length sum, clamped at zero); `d_y` is the signed lateral centre offset,
/// positive to the ego's left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeKinematics {
    pub r: f64,
    pub d_y: f64,
    /// Object speed component along the ego heading (m/s).
    pub v_obj_lon: f64,
    /// Ego speed component along its own heading (m/s).
    pub v_ego: f64,
    /// Object-minus-ego lateral velocity in the ego frame (m/s).
    pub v_rel_y: f64,
    /// Object's signed longitudinal acceleration (m/s^2).
    pub a_obj_lon: f64,
    /// Whether the object centre lies forward of the ego centre.
    pub ahead: bool,
}

/// Projects an object into the ego frame.
///
/// The object's own heading is ignored for the longitudinal gap: its extent
/// enters through its length along the ego axis, which keeps the braking
/// model one-dimensional. Total function; no failure cases.
pub fn project_to_ego(ego: &AgentState, obj: &AgentState) -> RelativeKinematics {
    let h = ego.heading_vec();
    let n = h.perp();
    let dp = obj.position - ego.position;
    let g = dp.dot(h);
    let half_sum = 0.5 * (ego.length + obj.length);
    RelativeKinematics {
        r: (g.abs() - half_sum).max(0.0),
        d_y: dp.dot(n),
        v_obj_lon: obj.velocity.dot(h),
        v_ego: ego.velocity.dot(h),
        v_rel_y: (obj.velocity - ego.velocity).dot(n),
        a_obj_lon: obj.accel_lon,
        ahead: g > 0.0,
    }
}

// ---------------------------------------------------------------------------
// Scene file I/O
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    scene_id: String,
    t_cycle: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EgoRecord {
    x: f64,
    y: f64,
    heading: f64,
    vx: f64,
    vy: f64,
    #[serde(default)]
    a: f64,
    length: f64,
    width: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GtRecord {
    id: String,
    class: String,
    x: f64,
    y: f64,
    heading: f64,
    vx: f64,
    vy: f64,
    #[serde(default)]
    a: f64,
    length: f64,
    width: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetRecord {
    id: String,
    class: String,
    x: f64,
    y: f64,
    heading: f64,
    vx: f64,
    vy: f64,
    #[serde(default)]
    a: f64,
    length: f64,
    width: f64,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    t: f64,
    ego: EgoRecord,
    gt: Vec<GtRecord>,
    det: Vec<DetRecord>,
}

const EGO_ID: &str = "ego";

fn check_agent_fields(
    line: usize,
    length: f64,
    width: f64,
    heading: f64,
    confidence: f64,
) -> Result<(), ModelError> {
    if !(length > 0.0) {
        return Err(ModelError::Field {
            line,
            field: "length",
            msg: format!("must be > 0, got {length}"),
        });
    }
    if !(width > 0.0) {
        return Err(ModelError::Field {
            line,
            field: "width",
            msg: format!("must be > 0, got {width}"),
        });
    }
    if !heading.is_finite() {
        return Err(ModelError::Field {
            line,
            field: "heading",
            msg: "must be finite".to_string(),
        });
    }
    if !(0.0..=1.0).contains(&confidence) {
        return Err(ModelError::Field {
            line,
            field: "confidence",
            msg: format!("out of range [0, 1], got {confidence}"),
        });
    }
    Ok(())
}

fn check_unique_ids(line: usize, which: &'static str, ids: &[&str]) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(*id) {
            return Err(ModelError::Field {
                line,
                field: which,
                msg: format!("duplicate id `{id}`"),
            });
        }
    }
    Ok(())
}

/// Parses a scene from its line-delimited text form and validates every
/// frame and scene invariant.
pub fn parse_scene_str(text: &str) -> Result<Scene, ModelError> {
    let mut header: Option<HeaderRecord> = None;
    let mut frames: Vec<Frame> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            let h: HeaderRecord =
                serde_json::from_str(raw).map_err(|e| ModelError::Parse {
                    line,
                    msg: format!("bad header: {e}"),
                })?;
            if !(h.t_cycle > 0.0) {
                return Err(ModelError::Field {
                    line,
                    field: "t_cycle",
                    msg: format!("must be > 0, got {}", h.t_cycle),
                });
            }
            header = Some(h);
            continue;
        }

        let rec: FrameRecord = serde_json::from_str(raw).map_err(|e| ModelError::Parse {
            line,
            msg: format!("{e}"),
        })?;

        check_agent_fields(line, rec.ego.length, rec.ego.width, rec.ego.heading, 1.0)?;
        let ego = AgentState {
            id: EGO_ID.to_string(),
            class_label: ClassLabel::Car,
            position: Vec2::new(rec.ego.x, rec.ego.y),
            heading: rec.ego.heading,
            length: rec.ego.length,
            width: rec.ego.width,
            velocity: Vec2::new(rec.ego.vx, rec.ego.vy),
            accel_lon: rec.ego.a,
            confidence: 1.0,
        };

        let mut gt_objects = Vec::with_capacity(rec.gt.len());
        for g in &rec.gt {
            check_agent_fields(line, g.length, g.width, g.heading, 1.0)?;
            gt_objects.push(AgentState {
                id: g.id.clone(),
                class_label: ClassLabel::from_scene_label(&g.class),
                position: Vec2::new(g.x, g.y),
                heading: g.heading,
                length: g.length,
                width: g.width,
                velocity: Vec2::new(g.vx, g.vy),
                accel_lon: g.a,
                confidence: 1.0,
            });
        }
        let mut detections = Vec::with_capacity(rec.det.len());
        for d in &rec.det {
            check_agent_fields(line, d.length, d.width, d.heading, d.score)?;
            detections.push(AgentState {
                id: d.id.clone(),
                class_label: ClassLabel::from_scene_label(&d.class),
                position: Vec2::new(d.x, d.y),
                heading: d.heading,
                length: d.length,
                width: d.width,
                velocity: Vec2::new(d.vx, d.vy),
                // Phantoms have no physical dynamics: constant velocity.
                accel_lon: 0.0,
                confidence: d.score,
            });
        }

        check_unique_ids(line, "gt ids", &gt_objects.iter().map(|o| o.id.as_str()).collect::<Vec<_>>())?;
        check_unique_ids(
            line,
            "det ids",
            &detections.iter().map(|o| o.id.as_str()).collect::<Vec<_>>(),
        )?;

        frames.push(Frame {
            timestamp: rec.t,
            ego,
            gt_objects,
            detections,
        });
    }

    let header = header.ok_or(ModelError::EmptyScene)?;
    if frames.is_empty() {
        return Err(ModelError::EmptyScene);
    }

    for pair in frames.windows(2) {
        let dt = pair[1].timestamp - pair[0].timestamp;
        if dt <= 0.0 {
            return Err(ModelError::Invariant {
                field: "timestamps",
                msg: format!(
                    "must be strictly increasing ({} then {})",
                    pair[0].timestamp, pair[1].timestamp
                ),
            });
        }
        if (dt - header.t_cycle).abs() > 0.1 * header.t_cycle {
            return Err(ModelError::Invariant {
                field: "timestamps",
                msg: format!(
                    "frame spacing {dt} deviates more than 10% from t_cycle {}",
                    header.t_cycle
                ),
            });
        }
    }

    Ok(Scene {
        scene_id: header.scene_id,
        t_cycle: header.t_cycle,
        frames,
    })
}

/// Loads and validates a scene file.
pub fn load_scene(path: &Path) -> Result<Scene, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scene_str(&text)
}

/// Serializes a scene back to its line-delimited form. Inverse of
/// [`parse_scene_str`] up to float formatting (shortest round-trip).
pub fn scene_to_jsonl(scene: &Scene) -> String {
    let mut out = String::new();
    let header = HeaderRecord {
        scene_id: scene.scene_id.clone(),
        t_cycle: scene.t_cycle,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for frame in &scene.frames {
        let rec = FrameRecord {
            t: frame.timestamp,
            ego: EgoRecord {
                x: frame.ego.position.x,
                y: frame.ego.position.y,
                heading: frame.ego.heading,
                vx: frame.ego.velocity.x,
                vy: frame.ego.velocity.y,
                a: frame.ego.accel_lon,
                length: frame.ego.length,
                width: frame.ego.width,
            },
            gt: frame
                .gt_objects
                .iter()
                .map(|o| GtRecord {
                    id: o.id.clone(),
                    class: o.class_label.to_string(),
                    x: o.position.x,
                    y: o.position.y,
                    heading: o.heading,
                    vx: o.velocity.x,
                    vy: o.velocity.y,
                    a: o.accel_lon,
                    length: o.length,
                    width: o.width,
                })
                .collect(),
            det: frame
                .detections
                .iter()
                .map(|o| DetRecord {
                    id: o.id.clone(),
                    class: o.class_label.to_string(),
                    x: o.position.x,
                    y: o.position.y,
                    heading: o.heading,
                    vx: o.velocity.x,
                    vy: o.velocity.y,
                    a: o.accel_lon,
                    length: o.length,
                    width: o.width,
                    score: o.confidence,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("frame serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn agent(id: &str, x: f64, y: f64, heading: f64, vx: f64, vy: f64, len: f64) -> AgentState {
        AgentState {
            id: id.to_string(),
            class_label: ClassLabel::Car,
            position: Vec2::new(x, y),
            heading,
            length: len,
            width: 1.8,
            velocity: Vec2::new(vx, vy),
            accel_lon: 0.0,
            confidence: 1.0,
        }
    }

    const SCENE_3F: &str = r#"{"scene_id":"s1","t_cycle":0.5}
{"t":0.0,"ego":{"x":0,"y":0,"heading":0,"vx":10,"vy":0,"length":4.5,"width":1.8},"gt":[{"id":"g1","class":"car","x":30,"y":0,"heading":0,"vx":0,"vy":0,"length":4.5,"width":1.8}],"det":[]}
{"t":0.5,"ego":{"x":5,"y":0,"heading":0,"vx":10,"vy":0,"length":4.5,"width":1.8},"gt":[],"det":[{"id":"d1","class":"car","x":30,"y":0,"heading":0,"vx":0,"vy":0,"length":4.5,"width":1.8,"score":0.9}]}
{"t":1.0,"ego":{"x":10,"y":0,"heading":0,"vx":10,"vy":0,"length":4.5,"width":1.8},"gt":[],"det":[]}
"#;

    #[test]
    fn load_well_formed_scene() {
        let scene = parse_scene_str(SCENE_3F).unwrap();
        assert_eq!(scene.frames.len(), 3);
        assert_eq!(scene.t_cycle, 0.5);
        assert_eq!(scene.scene_id, "s1");
        assert_eq!(scene.frames[0].gt_objects.len(), 1);
        assert_eq!(scene.frames[1].detections[0].confidence, 0.9);
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        let text = SCENE_3F.replace("\"t\":1.0", "\"t\":0.25");
        let err = parse_scene_str(&text).unwrap_err();
        assert!(matches!(err, ModelError::Invariant { field: "timestamps", .. }), "{err}");
    }

    #[test]
    fn confidence_out_of_range_rejected() {
        let text = SCENE_3F.replace("\"score\":0.9", "\"score\":1.4");
        let err = parse_scene_str(&text).unwrap_err();
        match err {
            ModelError::Field { field, msg, .. } => {
                assert_eq!(field, "confidence");
                assert!(msg.contains("out of range"), "{msg}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn frame_spacing_tolerance() {
        // 0.5 +/- 10% allows 0.46, rejects 0.4.
        let ok = SCENE_3F.replace("\"t\":1.0", "\"t\":0.96");
        assert!(parse_scene_str(&ok).is_ok());
        let bad = SCENE_3F.replace("\"t\":1.0", "\"t\":0.9");
        assert!(parse_scene_str(&bad).is_err());
    }

    #[test]
    fn empty_scene_rejected() {
        let err = parse_scene_str("{\"scene_id\":\"s\",\"t_cycle\":0.5}\n").unwrap_err();
        assert!(matches!(err, ModelError::EmptyScene));
        let err = parse_scene_str("").unwrap_err();
        assert!(matches!(err, ModelError::EmptyScene));
    }

    #[test]
    fn missing_ego_rejected() {
        let text = "{\"scene_id\":\"s\",\"t_cycle\":0.5}\n{\"t\":0.0,\"gt\":[],\"det\":[]}\n";
        let err = parse_scene_str(text).unwrap_err();
        assert!(matches!(err, ModelError::Parse { .. }), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = r#"{"scene_id":"s","t_cycle":0.5}
{"t":0.0,"ego":{"x":0,"y":0,"heading":0,"vx":0,"vy":0,"length":4.5,"width":1.8},"gt":[{"id":"g","class":"car","x":1,"y":0,"heading":0,"vx":0,"vy":0,"length":4.5,"width":1.8},{"id":"g","class":"car","x":9,"y":0,"heading":0,"vx":0,"vy":0,"length":4.5,"width":1.8}],"det":[]}
"#;
        assert!(parse_scene_str(text).is_err());
    }

    #[test]
    fn detection_accel_forced_to_zero() {
        let text = SCENE_3F.replace("\"width\":1.8,\"score\":0.9", "\"width\":1.8,\"a\":2.5,\"score\":0.9");
        let scene = parse_scene_str(&text).unwrap();
        assert_eq!(scene.frames[1].detections[0].accel_lon, 0.0);
    }

    #[test]
    fn jsonl_round_trip() {
        let scene = parse_scene_str(SCENE_3F).unwrap();
        let text = scene_to_jsonl(&scene);
        let back = parse_scene_str(&text).unwrap();
        assert_eq!(scene, back);
    }

    #[test]
    fn projection_static_lead() {
        let ego = agent("ego", 0.0, 0.0, 0.0, 0.0, 0.0, 4.5);
        let obj = agent("o", 30.0, 0.0, 0.0, 0.0, 0.0, 4.5);
        let k = project_to_ego(&ego, &obj);
        assert_eq!(k.r, 25.5);
        assert_eq!(k.d_y, 0.0);
        assert!(k.ahead);
    }

    #[test]
    fn projection_coincident_clamps_r() {
        let ego = agent("ego", 0.0, 0.0, 0.0, 0.0, 0.0, 4.5);
        let obj = agent("o", 0.0, 0.0, 0.0, 0.0, 0.0, 4.5);
        let k = project_to_ego(&ego, &obj);
        assert_eq!(k.r, 0.0);
        assert!(!k.ahead);
    }

    #[test]
    fn projection_lateral_components() {
        let ego = agent("ego", 0.0, 0.0, 0.0, 8.0, 0.0, 4.5);
        let obj = agent("o", 10.0, 3.0, 0.0, 0.0, -1.0, 4.5);
        let k = project_to_ego(&ego, &obj);
        assert_eq!(k.d_y, 3.0);
        assert_eq!(k.v_rel_y, -1.0);
        assert_eq!(k.v_ego, 8.0);
    }

    #[test]
    fn config_overrides_and_unknown_key() {
        let mut p = ReachParams::default();
        p.apply_config("a_lon_max = 2.5\n# comment\nt_react=0.2\n").unwrap();
        assert_eq!(p.a_lon_max, 2.5);
        assert_eq!(p.t_react, 0.2);
        let err = p.apply_config("bogus = 1\n").unwrap_err();
        assert!(matches!(err, ModelError::UnknownConfigKey { .. }));
        let err = p.apply_config("dt = -0.1\n").unwrap_err();
        assert!(matches!(err, ModelError::Invariant { field: "dt", .. }));
    }

    proptest! {
        // Rigid motions (proper rotations + translations) applied to both
        // agents leave every projected quantity unchanged.
        #[test]
        fn projection_rotation_equivariant(
            ex in -50.0..50.0f64, ey in -50.0..50.0f64,
            ox in -50.0..50.0f64, oy in -50.0..50.0f64,
            eh in -3.14..3.14f64,
            evx in -20.0..20.0f64, evy in -20.0..20.0f64,
            ovx in -20.0..20.0f64, ovy in -20.0..20.0f64,
            phi in -3.14..3.14f64,
            tx in -100.0..100.0f64, ty in -100.0..100.0f64,
        ) {
            let rot = |v: Vec2| Vec2::new(
                phi.cos() * v.x - phi.sin() * v.y,
                phi.sin() * v.x + phi.cos() * v.y,
            );
            let shift = Vec2::new(tx, ty);
            let mut ego = agent("ego", ex, ey, eh, evx, evy, 4.5);
            let mut obj = agent("o", ox, oy, eh + 0.4, ovx, ovy, 4.0);
            let k0 = project_to_ego(&ego, &obj);

            ego.position = rot(ego.position) + shift;
            ego.velocity = rot(ego.velocity);
            ego.heading += phi;
            obj.position = rot(obj.position) + shift;
            obj.velocity = rot(obj.velocity);
            obj.heading += phi;
            let k1 = project_to_ego(&ego, &obj);

            prop_assert!((k0.r - k1.r).abs() < 1e-9);
            prop_assert!((k0.d_y - k1.d_y).abs() < 1e-9);
            prop_assert!((k0.v_ego - k1.v_ego).abs() < 1e-9);
            prop_assert!((k0.v_obj_lon - k1.v_obj_lon).abs() < 1e-9);
            prop_assert!((k0.v_rel_y - k1.v_rel_y).abs() < 1e-9);
            prop_assert_eq!(k0.ahead, k1.ahead);
        }

        #[test]
        fn projection_r_non_negative(
            ex in -50.0..50.0f64, ey in -50.0..50.0f64,
            ox in -50.0..50.0f64, oy in -50.0..50.0f64,
            eh in -3.2..3.2f64,
        ) {
            let ego = agent("ego", ex, ey, eh, 0.0, 0.0, 4.5);
            let obj = agent("o", ox, oy, 0.0, 0.0, 0.0, 4.0);
            prop_assert!(project_to_ego(&ego, &obj).r >= 0.0);
        }
    }
}
