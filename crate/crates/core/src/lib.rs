//! Deterministic evaluation engine that converts 3D-perception errors into
//! physical collision-avoidance effort.
//!
//! False positives and false negatives found by matching detections against
//! ground truth are gated by a reachability-based collision check and then
//! scored: phantom tracks accumulate the speed loss their braking would
//! impose (FSR), missed objects record the peak braking demand they would
//! have caused (MDR), and every gated pair gets the minimum lateral
//! acceleration that would evade the predicted collision (LEA). Classical
//! criticality metrics, severity zones, aggregate tables, and rank
//! correlations round out the reports.

pub mod analysis;
pub mod classic;
pub mod effort;
pub mod gate;
pub mod matching;
pub mod model;
pub mod pipeline;
pub mod synth;

pub use analysis::{AggregateRow, Report, TrackRecord};
pub use classic::{SeverityMetric, SeverityZone, TrackClassic};
pub use effort::{FrameEffort, MdrMode, TrackEffort};
pub use gate::{GateKind, GateResult, ReachEllipsoid};
pub use matching::{ErrorKind, ErrorTrack, FrameMatchResult};
pub use model::{
    AgentState, ClassLabel, Frame, ModelError, ReachParams, RelativeKinematics, Scene, Vec2,
};
pub use synth::{ScenarioTemplate, Sidecar, TemplateKind};
