use std::fmt::Write as _;
use std::io;

use super::{BenchmarkRow, TraceRow};
use crate::geometry::Point2;
use crate::worldmodel::{Cell, GridMap, Obstacle};

pub fn write_trace_csv<W: io::Write>(out: W, trace: &[TraceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in trace {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_benchmark_csv<W: io::Write>(out: W, rows: &[BenchmarkRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario", "scheme", "runs", "successes", "ftime", "tlen", "avg_ld", "svar", "mlat", "min_clearance",
    ])?;
    let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.scheme.to_string(),
            r.runs.to_string(),
            r.successes.to_string(),
            cell(r.finish_time),
            cell(r.traj_length),
            cell(r.avg_lat_dev),
            cell(r.speed_var),
            cell(r.max_lat_dev),
            cell(r.min_clearance),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Everything drawn over one map.
#[derive(Debug, Clone, Default)]
pub struct SvgLayers<'a> {
    pub map: Option<&'a GridMap>,
    pub obstacles: &'a [Obstacle],
    pub centerline: &'a [Point2],
    /// `(color, polyline)` pairs drawn in order.
    pub paths: Vec<(&'static str, Vec<Point2>)>,
    pub markers: Vec<Point2>,
}

const SCALE: f64 = 8.0;
const PAD: f64 = 3.0;

pub fn render_svg(layers: &SvgLayers) -> String {
    let mut pts: Vec<Point2> = layers.centerline.to_vec();
    for (_, p) in &layers.paths {
        pts.extend_from_slice(p);
    }
    for o in layers.obstacles {
        pts.push(Point2::new(o.center.x - o.radius, o.center.y - o.radius));
        pts.push(Point2::new(o.center.x + o.radius, o.center.y + o.radius));
    }
    if let Some(m) = layers.map {
        let s = m.spec();
        pts.push(s.origin);
        pts.push(Point2::new(
            s.origin.x + s.cell_size * s.width as f64,
            s.origin.y + s.cell_size * s.height as f64,
        ));
    }
    if pts.is_empty() {
        pts.push(Point2::new(0.0, 0.0));
    }
    let min_x = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - PAD;
    let max_x = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) + PAD;
    let min_y = pts.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - PAD;
    let max_y = pts.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) + PAD;
    let px = |p: Point2| ((p.x - min_x) * SCALE, (max_y - p.y) * SCALE);
    let (w, h) = ((max_x - min_x) * SCALE, (max_y - min_y) * SCALE);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(m) = layers.map {
        let s = m.spec();
        for j in 0..s.height as i32 {
            for i in 0..s.width as i32 {
                let c = Cell::new(i, j);
                let (lo, hi) = m.cell_bounds(c);
                let (x, y) = px(Point2::new(lo.x, hi.y));
                let fill = if m.is_blocked(c) { "#ddd" } else { "none" };
                let _ = writeln!(
                    svg,
                    r##"<rect x="{x:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="{fill}" stroke="#eee"/>"##,
                    (hi.x - lo.x) * SCALE,
                    (hi.y - lo.y) * SCALE
                );
            }
        }
    }
    for o in layers.obstacles {
        let (x, y) = px(o.center);
        let fill = if o.dynamic { "#f4a" } else { "#a86" };
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.1}" cy="{y:.1}" r="{:.1}" fill="{fill}" fill-opacity="0.5"/>"#,
            o.radius * SCALE
        );
    }
    let polyline = |svg: &mut String, line: &[Point2], color: &str, dash: &str| {
        let coords: Vec<String> = line
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.1},{y:.1}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            coords.join(" ")
        );
    };
    polyline(&mut svg, layers.centerline, "#999", r#" stroke-dasharray="4 3""#);
    for (color, line) in &layers.paths {
        polyline(&mut svg, line, color, "");
    }
    for &m in &layers.markers {
        let (x, y) = px(m);
        let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="red"/>"#);
    }
    svg.push_str("</svg>\n");
    svg
}
