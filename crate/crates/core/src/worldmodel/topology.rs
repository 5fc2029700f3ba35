//! Ego-polar scene encoding and its line-oriented text form.
//!
//! Each node serializes to one line:
//!
//! ```text
//! <ref>car</ref><box>12,40,96,88</box> dist=12.3 orient=-4.5
//! ```
//!
//! with `<box>-</box>` when no image-plane box is known. Distances are quantized to 0.1 m and
//! orientations to 0.5°, zero along the ego forward axis and positive to the left.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EgoPose, Obstacle, WorldError};
use crate::geometry::Point2;

/// Semantic classes known to the encoder. Categories outside this list are accepted.
pub const CATEGORY_VOCABULARY: [&str; 49] = [
    "car", "truck", "van", "bus", "motorcycle", "bicycle", "pedestrian", "barrier", "cone",
    "traffic_sign", "traffic_light", "pole", "bollard", "trash_can", "bench", "box",
    "construction_sign", "warning_triangle", "water_barrier", "fence", "guard_rail", "hydrant",
    "mailbox", "planter", "street_lamp", "bus_stop", "vending_machine", "advertisement",
    "tree", "bush", "rock", "debris", "tire", "barrel", "pallet", "crate", "shopping_cart",
    "stroller", "wheelchair", "animal", "road_work", "manhole", "speed_bump", "parked_trailer",
    "scooter", "kiosk", "table", "chair", "bag",
];

const DIST_STEP_INV: f64 = 10.0;
const ORIENT_STEP_INV: f64 = 2.0;

/// Rounds a distance to the nearest 0.1 m.
pub fn quantize_distance(d: f64) -> f64 {
    (d * DIST_STEP_INV).round() / DIST_STEP_INV + 0.0
}

/// Rounds an orientation to the nearest 0.5° and wraps it into [-180, 180).
pub fn quantize_orientation(deg: f64) -> f64 {
    let mut halves = (deg * ORIENT_STEP_INV).round() as i64;
    halves = (halves + 360).rem_euclid(720) - 360;
    halves as f64 / ORIENT_STEP_INV + 0.0
}

/// Quantized range (m) and bearing (deg) of `object` as seen from `ego`.
pub fn ego_polar(object: Point2, ego: &EgoPose) -> (f64, f64) {
    let rel = (object - ego.position).rotated(-ego.yaw);
    let range = rel.norm();
    if range == 0.0 {
        return (0.0, 0.0);
    }
    let bearing = rel.y.atan2(rel.x).to_degrees();
    (quantize_distance(range), quantize_orientation(bearing))
}

fn is_quantized(value: f64, inv_step: f64) -> bool {
    let scaled = value * inv_step;
    (scaled - scaled.round()).abs() <= 1e-9 * inv_step.max(1.0)
}

fn valid_category(category: &str) -> bool {
    !category.is_empty()
        && !category
            .chars()
            .any(|c| c == '<' || c == '>' || c.is_control())
}

/// One encoded object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyNode {
    bbox: Option<[i32; 4]>,
    distance: f64,
    orientation: f64,
    category: String,
}

impl TopologyNode {
    /// Builds a node; `distance` and `orientation` are quantized here.
    pub fn new(
        category: impl Into<String>,
        bbox: Option<[i32; 4]>,
        distance: f64,
        orientation: f64,
    ) -> Result<Self, WorldError> {
        let category = category.into();
        if !valid_category(&category) {
            return Err(WorldError::BadCategory(category));
        }
        if !(distance >= 0.0) || !distance.is_finite() {
            return Err(WorldError::NodeValue(format!("distance {distance}")));
        }
        if !orientation.is_finite() {
            return Err(WorldError::NodeValue(format!("orientation {orientation}")));
        }
        Ok(Self {
            bbox,
            distance: quantize_distance(distance),
            orientation: quantize_orientation(orientation),
            category,
        })
    }

    pub fn bbox(&self) -> Option<[i32; 4]> {
        self.bbox
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    /// Lateral offset from the ego forward axis in meters (positive left).
    pub fn lateral_offset(&self) -> f64 {
        self.distance * self.orientation.to_radians().sin()
    }

    fn order(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.orientation.total_cmp(&other.orientation))
            .then_with(|| self.category.cmp(&other.category))
            .then(self.bbox.cmp(&other.bbox))
    }
}

/// Scene encoded as ego-polar nodes sorted by distance, then orientation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopologyGraph {
    nodes: Vec<TopologyNode>,
    pub ego: EgoPose,
}

impl TopologyGraph {
    pub fn new(mut nodes: Vec<TopologyNode>, ego: EgoPose) -> Self {
        nodes.sort_by(|a, b| a.order(b));
        Self { nodes, ego }
    }

    pub fn nodes(&self) -> &[TopologyNode] {
        &self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Encodes world obstacles relative to `ego`; no bounding boxes in simulator mode.
pub fn topology_from_obstacles(obstacles: &[Obstacle], ego: EgoPose) -> TopologyGraph {
    let nodes = obstacles
        .iter()
        .map(|o| {
            let (d, phi) = ego_polar(o.center, &ego);
            TopologyNode {
                bbox: None,
                distance: d,
                orientation: phi,
                category: o.category.clone(),
            }
        })
        .collect();
    TopologyGraph::new(nodes, ego)
}

pub fn serialize_topology(graph: &TopologyGraph) -> String {
    let mut out = String::new();
    for (idx, node) in graph.nodes.iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        let _ = write!(out, "<ref>{}</ref>", node.category);
        match node.bbox {
            Some([x1, y1, x2, y2]) => {
                let _ = write!(out, "<box>{x1},{y1},{x2},{y2}</box>");
            }
            None => out.push_str("<box>-</box>"),
        }
        let _ = write!(out, " dist={:.1} orient={:.1}", node.distance, node.orientation);
    }
    out
}

/// Inverse of [`serialize_topology`]. The ego pose is not part of the text and comes back as default.
pub fn parse_topology(text: &str) -> Result<TopologyGraph, WorldError> {
    if text.is_empty() {
        return Ok(TopologyGraph::default());
    }
    let nodes = text
        .split('\n')
        .enumerate()
        .map(|(idx, line)| {
            parse_line(line).map_err(|message| WorldError::Parse {
                line: idx + 1,
                message,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TopologyGraph::new(nodes, EgoPose::default()))
}

fn parse_line(line: &str) -> Result<TopologyNode, String> {
    let rest = line
        .strip_prefix("<ref>")
        .ok_or_else(|| "expected <ref>".to_string())?;
    let (category, rest) = rest
        .split_once("</ref>")
        .ok_or_else(|| "unterminated <ref>".to_string())?;
    if !valid_category(category) {
        return Err(format!("invalid category {category:?}"));
    }
    let rest = rest
        .strip_prefix("<box>")
        .ok_or_else(|| "expected <box>".to_string())?;
    let (box_text, rest) = rest
        .split_once("</box>")
        .ok_or_else(|| "unterminated <box>".to_string())?;
    let bbox = if box_text == "-" {
        None
    } else {
        let coords = box_text
            .split(',')
            .map(|v| v.parse::<i32>().map_err(|_| format!("bad box coordinate {v:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        let arr: [i32; 4] = coords
            .try_into()
            .map_err(|v: Vec<i32>| format!("box needs 4 coordinates, got {}", v.len()))?;
        Some(arr)
    };
    let rest = rest
        .strip_prefix(" dist=")
        .ok_or_else(|| "expected ' dist='".to_string())?;
    let (dist_text, orient_text) = rest
        .split_once(" orient=")
        .ok_or_else(|| "expected ' orient='".to_string())?;
    let distance = parse_one_decimal(dist_text)?;
    let orientation = parse_one_decimal(orient_text)?;
    if distance < 0.0 {
        return Err(format!("negative distance {dist_text}"));
    }
    if !is_quantized(orientation, ORIENT_STEP_INV) {
        return Err(format!("orientation {orient_text} is not a multiple of 0.5"));
    }
    if !(-180.0..180.0).contains(&orientation) {
        return Err(format!("orientation {orient_text} outside [-180, 180)"));
    }
    Ok(TopologyNode {
        bbox,
        distance: quantize_distance(distance),
        orientation: quantize_orientation(orientation),
        category: category.to_string(),
    })
}

fn parse_one_decimal(text: &str) -> Result<f64, String> {
    let (int_part, frac) = text
        .split_once('.')
        .ok_or_else(|| format!("expected one decimal in {text:?}"))?;
    let digits = int_part.strip_prefix('-').unwrap_or(int_part);
    if digits.is_empty()
        || !digits.bytes().all(|b| b.is_ascii_digit())
        || frac.len() != 1
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(format!("malformed number {text:?}"));
    }
    text.parse::<f64>().map_err(|e| format!("{text:?}: {e}"))
}
