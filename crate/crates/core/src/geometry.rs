//! Planar geometry helpers shared by the world model, planner and controller.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

/// World-frame point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Rotates the vector by `angle` radians (counter-clockwise).
    pub fn rotated(self, angle: f64) -> Point2 {
        let (s, c) = angle.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Closest point on segment `a`-`b` to `p`, with the segment parameter in [0, 1].
pub fn project_on_segment(p: Point2, a: Point2, b: Point2) -> (Point2, f64) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= f64::EPSILON {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (a + ab * t, t)
}

/// Result of projecting a point onto a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineProjection {
    pub point: Point2,
    /// Arc length from the first vertex to `point`.
    pub arc_length: f64,
    pub distance: f64,
}

/// Projects `p` onto the polyline, returning the nearest point.
///
/// Ties between segments resolve to the earliest segment. Panics on an empty polyline.
pub fn project_on_polyline(p: Point2, line: &[Point2]) -> PolylineProjection {
    assert!(!line.is_empty(), "polyline must not be empty");
    if line.len() == 1 {
        return PolylineProjection {
            point: line[0],
            arc_length: 0.0,
            distance: p.distance(line[0]),
        };
    }
    let mut best = PolylineProjection {
        point: line[0],
        arc_length: 0.0,
        distance: f64::INFINITY,
    };
    let mut walked = 0.0;
    for w in line.windows(2) {
        let (q, t) = project_on_segment(p, w[0], w[1]);
        let seg = w[0].distance(w[1]);
        let d = if t > 0.0 && t < 1.0 {
            // Perpendicular form is exact for points on the segment.
            let (ab, ap) = (w[1] - w[0], p - w[0]);
            (ab.x * ap.y - ab.y * ap.x).abs() / seg
        } else {
            p.distance(q)
        };
        if d < best.distance {
            best = PolylineProjection {
                point: q,
                arc_length: walked + t * seg,
                distance: d,
            };
        }
        walked += seg;
    }
    best
}

/// Unsigned distance from `p` to the polyline.
pub fn distance_to_polyline(p: Point2, line: &[Point2]) -> f64 {
    project_on_polyline(p, line).distance
}

pub fn polyline_length(line: &[Point2]) -> f64 {
    line.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Point and unit tangent heading at arc length `s`, clamped to the polyline ends.
pub fn sample_polyline(line: &[Point2], s: f64) -> (Point2, f64) {
    assert!(!line.is_empty(), "polyline must not be empty");
    if line.len() == 1 {
        return (line[0], 0.0);
    }
    let mut remaining = s.max(0.0);
    for w in line.windows(2) {
        let seg = w[0].distance(w[1]);
        let heading = (w[1].y - w[0].y).atan2(w[1].x - w[0].x);
        if remaining <= seg {
            let t = if seg > f64::EPSILON { remaining / seg } else { 0.0 };
            return (w[0] + (w[1] - w[0]) * t, heading);
        }
        remaining -= seg;
    }
    let n = line.len();
    let heading = (line[n - 1].y - line[n - 2].y).atan2(line[n - 1].x - line[n - 2].x);
    (line[n - 1], heading)
}

/// Distance from a disc center to an axis-aligned rectangle `[min, max]` (0 inside).
pub fn point_rect_distance(p: Point2, min: Point2, max: Point2) -> f64 {
    let dx = (min.x - p.x).max(0.0).max(p.x - max.x);
    let dy = (min.y - p.y).max(0.0).max(p.y - max.y);
    dx.hypot(dy)
}

/// Serde adapter writing non-finite distances as `null` and reading `null` back as infinity.
pub mod serde_unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
