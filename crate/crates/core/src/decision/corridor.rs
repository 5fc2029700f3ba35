use serde::{Deserialize, Serialize};

use super::{Directive, DirectivePlan, DriveStyle};
use crate::worldmodel::TopologyGraph;

/// Thresholds of the lane-level decision maker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorridorConfig {
    /// Objects further than this are ignored (m).
    pub lookahead: f64,
    pub lane_width: f64,
    /// An object blocks a lane when its lateral distance to the lane center is below this (m).
    pub block_half_width: f64,
    /// Furthest lane used on either side of the ego lane.
    pub max_lane_offset: i32,
    /// Free stretch of the ego lane needed before returning to it (m). A neighbor lane counts as
    /// usable only when it stays free for two lane widths past the blocker.
    pub return_gap: f64,
    /// Any object closer than this makes the plan cautious (m).
    pub cautious_distance: f64,
    /// A detour keeping at least this lateral distance from every object is driven aggressively (m).
    pub open_clearance: f64,
    /// Goal bearings within ±this are treated as straight ahead (deg).
    pub bearing_deadband: f64,
    /// Distance covered by one `keep` (m).
    pub keep_length: f64,
    /// A lane change starts this far before the object it avoids (m).
    pub lead: f64,
    /// The return starts this far past the last ego-lane blocker (m).
    pub pass_margin: f64,
}

impl Default for CorridorConfig {
    fn default() -> Self {
        Self {
            lookahead: 60.0,
            lane_width: 3.0,
            block_half_width: 2.0,
            max_lane_offset: 1,
            return_gap: 20.0,
            cautious_distance: 8.0,
            open_clearance: 2.4,
            bearing_deadband: 5.0,
            keep_length: 6.0,
            lead: 4.5,
            pass_margin: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Ahead {
    s: f64,
    l: f64,
}

fn shift(dir: i32) -> Directive {
    if dir > 0 {
        Directive::Left
    } else {
        Directive::Right
    }
}

/// Lane-level stand-in for a language-model decision maker.
///
/// Objects become `(longitudinal, lateral)` points in the ego frame. Whenever one blocks the lane
/// being driven, the plan moves to the neighboring lane whose next blocker is furthest ahead,
/// preferring the side away from the object on ties. It returns to the ego lane once that lane
/// stays free for `return_gap`, and at the end of the plan. Runs of `keep` place each lane change
/// `lead` before its object and each return `pass_margin` past the last ego-lane blocker.
pub fn corridor_decide(graph: &TopologyGraph, goal_bearing: f64, cfg: &CorridorConfig) -> DirectivePlan {
    let mut objs: Vec<Ahead> = graph
        .nodes()
        .iter()
        .filter(|n| n.distance() <= cfg.lookahead && n.orientation().abs() < 90.0)
        .map(|n| {
            let th = n.orientation().to_radians();
            Ahead {
                s: n.distance() * th.cos(),
                l: n.distance() * th.sin(),
            }
        })
        .collect();
    objs.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.l.total_cmp(&b.l)));

    let w = cfg.lane_width;
    let blocks = |o: &Ahead, lane: i32| (o.l - lane as f64 * w).abs() < cfg.block_half_width;
    // Distance from `from` to the first object at or beyond it that blocks `lane`.
    let free_run = |lane: i32, from: f64| {
        objs.iter()
            .filter(|o| o.s >= from && blocks(o, lane))
            .map(|o| o.s - from)
            .fold(f64::INFINITY, f64::min)
    };

    let mut directives = Vec::new();
    let mut reasoning = Vec::new();
    // Longitudinal position the directives emitted so far bring the ego to.
    let mut cursor = 0.0;
    let hold = |directives: &mut Vec<Directive>, cursor: &mut f64, until: f64| {
        let k = ((until - *cursor) / cfg.keep_length).floor().max(0.0);
        for _ in 0..k as usize {
            directives.push(Directive::Keep);
        }
        *cursor += k * cfg.keep_length;
    };
    let change = |directives: &mut Vec<Directive>, cursor: &mut f64, dir: i32| {
        directives.push(shift(dir));
        *cursor += w;
    };
    let mut lane = 0i32;
    let mut last_ego_block: Option<f64> = None;
    let mut dodges = 0;
    let mut open = true;
    let go_back = |directives: &mut Vec<Directive>, cursor: &mut f64, lane: i32, from: f64| {
        hold(directives, cursor, from + cfg.pass_margin);
        for _ in 0..lane.abs() {
            change(directives, cursor, -lane.signum());
        }
        directives.push(Directive::Keep);
        *cursor += cfg.keep_length;
    };
    for o in &objs {
        if lane != 0 && last_ego_block.map_or(true, |s| o.s - s >= cfg.return_gap) {
            let from = last_ego_block.unwrap_or(cursor);
            go_back(&mut directives, &mut cursor, lane, from);
            reasoning.push(format!("ego lane free from {from:.1} m: return"));
            lane = 0;
        }
        if blocks(o, 0) {
            last_ego_block = Some(o.s);
        }
        if blocks(o, lane) {
            let away = if o.l > lane as f64 * w { -1 } else { 1 };
            let from = o.s - w;
            let pick = [lane + away, lane - away]
                .into_iter()
                .filter(|k| k.abs() <= cfg.max_lane_offset && !blocks(o, *k))
                .map(|k| (k, free_run(k, from)))
                .filter(|&(_, run)| run >= 2.0 * w)
                .fold(None, |best: Option<(i32, f64)>, (k, run)| match best {
                    Some((_, r)) if r >= run => best,
                    _ => Some((k, run)),
                });
            match pick {
                Some((k, run)) => {
                    reasoning.push(format!(
                        "object at {:.1} m, {:+.1} m blocks lane {lane}: lane {k} is free for {}",
                        o.s,
                        o.l,
                        if run.is_finite() { format!("{run:.1} m") } else { "the lookahead".to_string() }
                    ));
                    hold(&mut directives, &mut cursor, o.s - cfg.lead);
                    change(&mut directives, &mut cursor, k - lane);
                    lane = k;
                    dodges += 1;
                }
                None => reasoning.push(format!("object at {:.1} m blocks every lane: hold", o.s)),
            }
        }
        if (o.l - lane as f64 * w).abs() < cfg.open_clearance {
            open = false;
        }
    }
    if lane != 0 {
        let from = last_ego_block.unwrap_or(cursor);
        go_back(&mut directives, &mut cursor, lane, from);
    } else if goal_bearing > cfg.bearing_deadband {
        directives.push(Directive::Left);
    } else if goal_bearing < -cfg.bearing_deadband {
        directives.push(Directive::Right);
    } else if directives.is_empty() {
        directives.push(Directive::Keep);
    }

    let style = if graph.nodes().iter().any(|n| n.distance() < cfg.cautious_distance) {
        DriveStyle::Cautious
    } else if dodges > 0 && open {
        DriveStyle::Aggressive
    } else {
        DriveStyle::Normal
    };
    if reasoning.is_empty() {
        reasoning.push("ego lane clear".to_string());
    }
    DirectivePlan {
        reasoning: reasoning.join("; "),
        directives,
        style,
    }
}
