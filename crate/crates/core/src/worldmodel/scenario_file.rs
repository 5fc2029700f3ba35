//! JSON scenario document shared by the CLI and the simulator.

use serde::{Deserialize, Serialize};

use super::{inflate, shift_map, GridMap, GridSpec, Obstacle, WorldError};
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyRecord {
    pub x: f64,
    pub y: f64,
}

impl From<XyRecord> for Point2 {
    fn from(r: XyRecord) -> Self {
        Point2::new(r.x, r.y)
    }
}

impl From<Point2> for XyRecord {
    fn from(p: Point2) -> Self {
        XyRecord { x: p.x, y: p.y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShiftRecord {
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRecord {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub category: String,
    #[serde(default)]
    pub dynamic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub origin: XyRecord,
    #[serde(default = "default_cell_size")]
    pub cell_size: f64,
    pub width: u32,
    pub height: u32,
}

fn default_cell_size() -> f64 {
    3.0
}

fn default_vehicle_factor() -> f64 {
    1.1
}

fn default_target_speed() -> f64 {
    4.2
}

fn default_capture_radius() -> f64 {
    2.0
}

/// On-disk scenario description. Obstacle radii are physical; inflation happens on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    pub map: MapRecord,
    pub centerline: Vec<XyRecord>,
    pub obstacles: Vec<ObstacleRecord>,
    pub start: PoseRecord,
    pub goal: XyRecord,
    /// Grid, start and goal displacement relative to the obstacles.
    #[serde(default)]
    pub shift: ShiftRecord,
    #[serde(default = "default_target_speed")]
    pub target_speed: f64,
    #[serde(default = "default_capture_radius")]
    pub capture_radius: f64,
    #[serde(default = "default_vehicle_factor")]
    pub vehicle_factor: f64,
    #[serde(default)]
    pub static_extra: f64,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn raw_obstacles(&self) -> Result<Vec<Obstacle>, WorldError> {
        self.obstacles
            .iter()
            .enumerate()
            .map(|(k, o)| {
                Obstacle::new(
                    k as u32,
                    Point2::new(o.x, o.y),
                    o.radius,
                    o.category.clone(),
                    o.dynamic,
                )
            })
            .collect()
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            origin: self.map.origin.into(),
            cell_size: self.map.cell_size,
            width: self.map.width,
            height: self.map.height,
        }
    }

    /// Inflated, shifted planning map.
    pub fn grid_map(&self) -> Result<GridMap, WorldError> {
        self.grid_map_with(&self.raw_obstacles()?)
    }

    /// Same as [`Self::grid_map`] over an alternative set of raw obstacles.
    pub fn grid_map_with(&self, raw: &[Obstacle]) -> Result<GridMap, WorldError> {
        let inflated = inflate(raw, self.vehicle_factor, self.static_extra);
        let base = GridMap::new(
            self.grid_spec(),
            inflated,
            self.centerline.iter().map(|&p| p.into()).collect(),
            Point2::new(self.start.x, self.start.y),
            self.goal.into(),
        )?;
        if self.shift.dx == 0.0 && self.shift.dy == 0.0 {
            Ok(base)
        } else {
            Ok(shift_map(&base, self.shift.dx, self.shift.dy))
        }
    }
}
