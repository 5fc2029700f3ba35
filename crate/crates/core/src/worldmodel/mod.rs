//! World representation: obstacles, occupancy grid, ego-polar topology encoding.

mod grid;
mod scenario_file;
mod topology;

pub use grid::{shift_map, Cell, GridMap, GridSpec};
pub use scenario_file::{MapRecord, ObstacleRecord, PoseRecord, ScenarioFile, ShiftRecord, XyRecord};
pub use topology::{
    ego_polar, parse_topology, quantize_distance, quantize_orientation, serialize_topology,
    topology_from_obstacles, TopologyGraph, TopologyNode, CATEGORY_VOCABULARY,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{normalize_angle, Point2};

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("obstacle {id}: radius must be positive, got {radius}")]
    BadRadius { id: u32, radius: f64 },
    #[error("obstacle {id}: empty category")]
    EmptyCategory { id: u32 },
    #[error("invalid category {0:?}")]
    BadCategory(String),
    #[error("cell size must be positive, got {0}")]
    BadCellSize(f64),
    #[error("grid must have at least one cell")]
    EmptyGrid,
    #[error("centerline needs at least two points, got {0}")]
    ShortCenterline(usize),
    #[error("topology line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("node value out of range: {0}")]
    NodeValue(String),
}

/// A disc obstacle in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: u32,
    pub center: Point2,
    pub radius: f64,
    pub category: String,
    /// Vehicles and other movable agents are flagged dynamic and inflated multiplicatively.
    pub dynamic: bool,
}

impl Obstacle {
    pub fn new(
        id: u32,
        center: Point2,
        radius: f64,
        category: impl Into<String>,
        dynamic: bool,
    ) -> Result<Self, WorldError> {
        let category = category.into();
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(WorldError::BadRadius { id, radius });
        }
        if category.is_empty() {
            return Err(WorldError::EmptyCategory { id });
        }
        Ok(Self {
            id,
            center,
            radius,
            category,
            dynamic,
        })
    }

    /// Signed distance from `p` to the disc boundary (negative inside).
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        p.distance(self.center) - self.radius
    }
}

/// Enlarges obstacle radii for safety margins.
///
/// Dynamic obstacles are scaled by `vehicle_factor`; static ones grow by `static_extra` meters.
pub fn inflate(obstacles: &[Obstacle], vehicle_factor: f64, static_extra: f64) -> Vec<Obstacle> {
    debug_assert!(vehicle_factor >= 1.0 && static_extra >= 0.0);
    obstacles
        .iter()
        .map(|o| {
            let radius = if o.dynamic {
                o.radius * vehicle_factor
            } else {
                o.radius + static_extra
            };
            Obstacle { radius, ..o.clone() }
        })
        .collect()
}

/// Distance from `p` to the nearest obstacle boundary, clamped at zero. Infinite when empty.
pub fn nearest_obstacle_distance(p: Point2, obstacles: &[Obstacle]) -> f64 {
    obstacles
        .iter()
        .map(|o| o.boundary_distance(p).max(0.0))
        .fold(f64::INFINITY, f64::min)
}

/// Ego position and heading in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EgoPose {
    pub position: Point2,
    pub yaw: f64,
}

impl EgoPose {
    pub fn new(position: Point2, yaw: f64) -> Self {
        Self {
            position,
            yaw: normalize_angle(yaw),
        }
    }
}
