//! Switching model predictive tracking on a kinematic unicycle.

mod mpc;
mod qp;

pub use mpc::{reference_inputs, rollout, solve_mpc, MpcSolution};
pub use qp::{solve_qp, QpError, QpProblem, QpSolution};

use nalgebra::{Matrix3, Matrix3x2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_angle, polyline_length, project_on_polyline, sample_polyline, Point2};
use crate::worldmodel::{nearest_obstacle_distance, Obstacle};

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("cloud reference requested at step {0} but none is available")]
    MissingCloud(usize),
    #[error("reference length {got} does not match horizon + 1 = {want}")]
    ReferenceLength { got: usize, want: usize },
    #[error("invalid controller config: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.yaw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub v: f64,
    pub omega: f64,
}

impl ControlInput {
    pub const STOP: ControlInput = ControlInput { v: 0.0, omega: 0.0 };

    pub fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub fn clamped(self, cfg: &MpcConfig) -> Self {
        Self {
            v: self.v.clamp(0.0, cfg.v_max),
            omega: self.omega.clamp(-cfg.omega_max, cfg.omega_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcConfig {
    pub horizon: usize,
    pub dt: f64,
    /// Position tracking weight.
    pub w_s: f64,
    /// Weight on deviation of the inputs from the reference inputs.
    pub lambda: f64,
    /// Required clearance between footprint and inflated obstacle (m).
    pub d0: f64,
    /// Footprint radius (m).
    pub r_v: f64,
    pub v_max: f64,
    pub omega_max: f64,
    /// Linear penalty on clearance slack.
    pub slack_weight: f64,
    pub outer_iterations: usize,
    pub max_sweeps: usize,
    pub tolerance: f64,
    /// Constraint tightening that absorbs linearization error (m).
    pub margin: f64,
    /// Obstacles further than this from a predicted point get no constraint at that step (m).
    pub constraint_range: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 15,
            dt: 0.2,
            w_s: 0.37,
            lambda: 0.2,
            d0: 0.3,
            r_v: 1.4,
            v_max: 8.0,
            omega_max: 1.0,
            slack_weight: 1e3,
            outer_iterations: 3,
            max_sweeps: 500,
            tolerance: 1e-6,
            margin: 0.1,
            constraint_range: 6.0,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), ControlError> {
        if self.horizon < 1 {
            return Err(ControlError::InvalidConfig("horizon must be at least 1"));
        }
        if !(self.dt > 0.0) {
            return Err(ControlError::InvalidConfig("dt must be positive"));
        }
        if !(self.w_s > 0.0 && self.lambda > 0.0) {
            return Err(ControlError::InvalidConfig("weights must be positive"));
        }
        if !(self.d0 >= 0.0 && self.r_v >= 0.0 && self.margin >= 0.0) {
            return Err(ControlError::InvalidConfig("clearances must be non-negative"));
        }
        if !(self.v_max > 0.0 && self.omega_max > 0.0) {
            return Err(ControlError::InvalidConfig("input bounds must be positive"));
        }
        Ok(())
    }
}

/// One Euler step of the unicycle.
pub fn step_dynamics(s: &VehicleState, u: &ControlInput, dt: f64) -> VehicleState {
    VehicleState::new(
        s.x + u.v * s.yaw.cos() * dt,
        s.y + u.v * s.yaw.sin() * dt,
        s.yaw + u.omega * dt,
    )
}

/// Affine model `s' ≈ A s + B u + c` of [`step_dynamics`] around `(s_ref, u_ref)`.
pub fn linearize(s_ref: &VehicleState, u_ref: &ControlInput, dt: f64) -> (Matrix3<f64>, Matrix3x2<f64>, Vector3<f64>) {
    let (sin, cos) = s_ref.yaw.sin_cos();
    let a = Matrix3::new(
        1.0, 0.0, -u_ref.v * sin * dt, //
        0.0, 1.0, u_ref.v * cos * dt, //
        0.0, 0.0, 1.0,
    );
    let b = Matrix3x2::new(
        cos * dt, 0.0, //
        sin * dt, 0.0, //
        0.0, dt,
    );
    // Unwrapped yaw keeps c continuous; the step itself is not wrapped here.
    let next = Vector3::new(
        s_ref.x + u_ref.v * cos * dt,
        s_ref.y + u_ref.v * sin * dt,
        s_ref.yaw + u_ref.omega * dt,
    );
    let c = next - a * s_ref.as_vector() - b * nalgebra::Vector2::new(u_ref.v, u_ref.omega);
    (a, b, c)
}

/// Local and optional cloud references with a per-step selector.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePair {
    pub local: Vec<VehicleState>,
    pub cloud: Option<Vec<VehicleState>>,
    pub z: Vec<bool>,
}

/// Per-step switch between the local and cloud references.
pub fn select_reference(pair: &ReferencePair) -> Result<Vec<VehicleState>, ControlError> {
    if let Some(cloud) = &pair.cloud {
        if cloud.len() != pair.local.len() {
            return Err(ControlError::ReferenceLength {
                got: cloud.len(),
                want: pair.local.len(),
            });
        }
    }
    pair.local
        .iter()
        .enumerate()
        .map(|(h, local)| {
            if pair.z.get(h).copied().unwrap_or(false) {
                pair.cloud.as_ref().map(|c| c[h]).ok_or(ControlError::MissingCloud(h))
            } else {
                Ok(*local)
            }
        })
        .collect()
}

/// `H + 1` states along `line` starting at the projection of `p`, spaced `speed · dt`.
pub fn reference_along(line: &[Point2], p: Point2, speed: f64, cfg: &MpcConfig) -> Vec<VehicleState> {
    let s0 = project_on_polyline(p, line).arc_length;
    let total = polyline_length(line);
    (0..=cfg.horizon)
        .map(|h| {
            let s = (s0 + speed * cfg.dt * h as f64).min(total);
            let (q, heading) = sample_polyline(line, s);
            VehicleState::new(q.x, q.y, heading)
        })
        .collect()
}

/// Selector with hysteresis: the cloud is used only when available and the local reference is
/// obstructed or far from the vehicle, and every value is held for a minimum number of ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingPolicy {
    z: bool,
    held: usize,
    pub min_hold: usize,
    pub lateral_trigger: f64,
    pub clearance_factor: f64,
}

impl Default for SwitchingPolicy {
    fn default() -> Self {
        Self {
            z: false,
            held: usize::MAX,
            min_hold: 5,
            lateral_trigger: 1.0,
            clearance_factor: 1.5,
        }
    }
}

impl SwitchingPolicy {
    pub fn z(&self) -> bool {
        self.z
    }

    /// Raw trigger condition before hysteresis and availability.
    pub fn wants_cloud(&self, state: &VehicleState, local_ref: &[VehicleState], obstacles: &[Obstacle], cfg: &MpcConfig) -> bool {
        let threshold = self.clearance_factor * cfg.d0 + cfg.r_v;
        let obstructed = local_ref
            .iter()
            .any(|s| nearest_obstacle_distance(s.position(), obstacles) < threshold);
        let line: Vec<Point2> = local_ref.iter().map(|s| s.position()).collect();
        let lateral = project_on_polyline(state.position(), &line).distance;
        obstructed || lateral > self.lateral_trigger
    }

    /// Selector value for the next tick.
    pub fn update(
        &mut self,
        state: &VehicleState,
        local_ref: &[VehicleState],
        obstacles: &[Obstacle],
        cloud_available: bool,
        cfg: &MpcConfig,
    ) -> bool {
        let want = cloud_available && self.wants_cloud(state, local_ref, obstacles, cfg);
        // Losing the cloud overrides the hold.
        let locked = self.held < self.min_hold && cloud_available;
        if want != self.z && !locked {
            self.z = want;
            self.held = 0;
        }
        self.held = self.held.saturating_add(1);
        self.z
    }
}
