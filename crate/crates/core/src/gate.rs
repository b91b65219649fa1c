//! Collision gates: decide per object-ego pair whether a dynamically
//! plausible collision exists within the prediction horizon, and at which
//! grid time it first occurs.
//!
//! Two gates are provided. The reachable-set gate (RSB) encloses each agent
//! in an ellipsoid whose centre moves at constant velocity and whose
//! semi-axes grow quadratically under the acceleration bounds; it is
//! deliberately conservative. The SAT gate forward-propagates both agents
//! as oriented bounding boxes along a single kinematic rollout and tests
//! overlap with the separating-axis theorem; it admits far fewer pairs.

use serde::{Deserialize, Serialize};

use crate::model::{AgentState, ReachParams, Vec2};

/// Which collision gate to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Rsb,
    Sat,
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GateKind::Rsb => write!(f, "rsb"),
            GateKind::Sat => write!(f, "sat"),
        }
    }
}

/// Gate verdict for one pair. `t_coll` is present iff a collision was
/// predicted; it always lies on the gate time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateResult {
    pub gate_kind: GateKind,
    pub t_coll: Option<f64>,
}

impl GateResult {
    pub fn collides(&self) -> bool {
        self.t_coll.is_some()
    }
}

/// Ellipsoidal over-approximation of an agent's reachable positions at one
/// prediction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachEllipsoid {
    pub center: Vec2,
    /// Unit vector along the agent heading.
    pub axis_lon: Vec2,
    pub semi_lon: f64,
    pub semi_lat: f64,
}

/// Reachable set of `agent` at prediction time `tau`.
///
/// The centre propagates at constant velocity; the semi-axes start at the
/// vehicle half-dimensions and grow as half the acceleration bound times
/// tau squared. The longitudinal growth uses the larger magnitude of the
/// forward and braking bounds so the set over-approximates both manoeuvres.
pub fn reach_ellipsoid(agent: &AgentState, tau: f64, params: &ReachParams) -> ReachEllipsoid {
    ReachEllipsoid {
        center: agent.position + agent.velocity * tau,
        axis_lon: agent.heading_vec(),
        semi_lon: 0.5 * agent.length + 0.5 * params.a_lon_growth() * tau * tau,
        semi_lat: 0.5 * agent.width + 0.5 * params.a_lat_max * tau * tau,
    }
}

fn support_radius(e: &ReachEllipsoid, u: Vec2) -> f64 {
    let lon = e.semi_lon * e.axis_lon.dot(u);
    let lat = e.semi_lat * e.axis_lon.perp().dot(u);
    (lon * lon + lat * lat).sqrt()
}

/// Centre-line support test for two ellipsoids.
///
/// Reports separation only when the projections onto the centre-to-centre
/// direction leave a gap, which certifies true disjointness; the test is
/// exact for circles and conservative (never falsely separating) for
/// ellipses. Coincident centres always overlap.
pub fn ellipsoids_overlap(e1: &ReachEllipsoid, e2: &ReachEllipsoid) -> bool {
    let d = e2.center - e1.center;
    let dist = d.norm();
    if dist == 0.0 {
        return true;
    }
    let u = d * (1.0 / dist);
    dist <= support_radius(e1, u) + support_radius(e2, u)
}

fn grid_steps(params: &ReachParams) -> usize {
    (params.t_horizon / params.dt).round() as usize
}

/// Earliest reachable-set overlap between ego and object on the time grid
/// `{0, dt, 2*dt, ..., t_horizon}`, both endpoints included.
pub fn rsb_first_collision(
    ego: &AgentState,
    obj: &AgentState,
    params: &ReachParams,
) -> GateResult {
    let steps = grid_steps(params);
    for k in 0..=steps {
        let tau = k as f64 * params.dt;
        let e1 = reach_ellipsoid(ego, tau, params);
        let e2 = reach_ellipsoid(obj, tau, params);
        if ellipsoids_overlap(&e1, &e2) {
            return GateResult {
                gate_kind: GateKind::Rsb,
                t_coll: Some(tau),
            };
        }
    }
    GateResult {
        gate_kind: GateKind::Rsb,
        t_coll: None,
    }
}

/// Constant longitudinal accelerations applied along each agent's own
/// heading during the SAT rollout. The ego always rolls out at constant
/// velocity; phantoms do too, while missed objects use their estimated
/// acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatRollout {
    pub ego_accel: f64,
    pub obj_accel: f64,
}

impl SatRollout {
    pub fn for_false_positive() -> Self {
        SatRollout {
            ego_accel: 0.0,
            obj_accel: 0.0,
        }
    }

    pub fn for_false_negative(obj_accel: f64) -> Self {
        SatRollout {
            ego_accel: 0.0,
            obj_accel,
        }
    }
}

/// Longitudinal displacement after time `t` under constant acceleration,
/// with speed clamped at zero: a decelerating agent stops instead of
/// reversing.
fn displacement_with_stop(v0: f64, a: f64, t: f64) -> f64 {
    if a == 0.0 {
        return v0 * t;
    }
    if v0 == 0.0 {
        // At rest: forward acceleration moves, braking holds.
        return if a > 0.0 { 0.5 * a * t * t } else { 0.0 };
    }
    let t_stop = -v0 / a;
    if t_stop > 0.0 && t_stop < t {
        v0 * t_stop + 0.5 * a * t_stop * t_stop
    } else {
        v0 * t + 0.5 * a * t * t
    }
}

fn rollout_center(agent: &AgentState, accel: f64, tau: f64) -> Vec2 {
    let h = agent.heading_vec();
    let n = h.perp();
    let v_lon = agent.velocity.dot(h);
    let v_lat = agent.velocity.dot(n);
    agent.position + h * displacement_with_stop(v_lon, accel, tau) + n * (v_lat * tau)
}

struct Obb {
    corners: [Vec2; 4],
    axes: [Vec2; 2],
}

impl Obb {
    fn new(center: Vec2, heading: f64, length: f64, width: f64) -> Self {
        let ax = Vec2::from_heading(heading);
        let ay = ax.perp();
        let dx = ax * (0.5 * length);
        let dy = ay * (0.5 * width);
        Obb {
            corners: [
                center + dx + dy,
                center + dx - dy,
                center - dx - dy,
                center - dx + dy,
            ],
            axes: [ax, ay],
        }
    }

    fn project(&self, axis: Vec2) -> (f64, f64) {
        let mut lo = self.corners[0].dot(axis);
        let mut hi = lo;
        for c in &self.corners[1..] {
            let p = c.dot(axis);
            lo = lo.min(p);
            hi = hi.max(p);
        }
        (lo, hi)
    }
}

fn obbs_overlap(a: &Obb, b: &Obb) -> bool {
    for axis in a.axes.iter().chain(b.axes.iter()) {
        let (lo_a, hi_a) = a.project(*axis);
        let (lo_b, hi_b) = b.project(*axis);
        if hi_a < lo_b || hi_b < lo_a {
            return false;
        }
    }
    true
}

/// Earliest oriented-bounding-box overlap under the rollout, scanning the
/// same grid as the reachable-set gate. Overlap requires intersection on
/// all four candidate separating axes.
pub fn sat_first_collision(
    ego: &AgentState,
    obj: &AgentState,
    rollout: SatRollout,
    params: &ReachParams,
) -> GateResult {
    let steps = grid_steps(params);
    for k in 0..=steps {
        let tau = k as f64 * params.dt;
        let box_e = Obb::new(
            rollout_center(ego, rollout.ego_accel, tau),
            ego.heading,
            ego.length,
            ego.width,
        );
        let box_o = Obb::new(
            rollout_center(obj, rollout.obj_accel, tau),
            obj.heading,
            obj.length,
            obj.width,
        );
        if obbs_overlap(&box_e, &box_o) {
            return GateResult {
                gate_kind: GateKind::Sat,
                t_coll: Some(tau),
            };
        }
    }
    GateResult {
        gate_kind: GateKind::Sat,
        t_coll: None,
    }
}
