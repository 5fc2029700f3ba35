use serde::{Deserialize, Serialize};

use crate::geometry::{distance_to_polyline, Point2};

/// One control tick: the state at `t` and the command applied from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
    pub z: u8,
    pub min_clearance: f64,
    pub lat_dev: f64,
    pub solve_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    /// Time of goal capture, or of the last row when the goal was never reached (s).
    pub finish_time: f64,
    pub traj_length: f64,
    pub avg_lat_dev: f64,
    /// Range of the commanded speed (m/s).
    pub speed_var: f64,
    pub max_lat_dev: f64,
    /// Smallest footprint clearance to an inflated obstacle over the run (m).
    pub min_clearance: f64,
    pub success: bool,
}

pub fn compute_metrics(trace: &[TraceRow], centerline: &[Point2], goal: Point2, capture_radius: f64) -> ScenarioMetrics {
    assert!(!trace.is_empty(), "trace must not be empty");
    let capture = trace
        .iter()
        .find(|r| Point2::new(r.x, r.y).distance(goal) <= capture_radius)
        .map(|r| r.t);
    let traj_length = trace
        .windows(2)
        .map(|w| Point2::new(w[0].x, w[0].y).distance(Point2::new(w[1].x, w[1].y)))
        .sum();
    let devs: Vec<f64> = trace.iter().map(|r| distance_to_polyline(Point2::new(r.x, r.y), centerline)).collect();
    let max_lat_dev = devs.iter().copied().fold(0.0, f64::max);
    let avg_lat_dev = (devs.iter().sum::<f64>() / devs.len() as f64).min(max_lat_dev);
    let (lo, hi) = trace
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.v_cmd), hi.max(r.v_cmd)));
    let min_clearance = trace.iter().map(|r| r.min_clearance).fold(f64::INFINITY, f64::min);
    ScenarioMetrics {
        finish_time: capture.unwrap_or(trace.last().unwrap().t),
        traj_length,
        avg_lat_dev,
        speed_var: hi - lo,
        max_lat_dev,
        min_clearance,
        success: capture.is_some() && min_clearance >= 0.0,
    }
}
