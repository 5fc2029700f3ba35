use serde::{Deserialize, Serialize};

use super::{Directive, DirectivePlan, DriveStyle};
use crate::worldmodel::TopologyGraph;

/// Thresholds of the rule-based decision maker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    /// Objects further than this are ignored (m).
    pub lookahead: f64,
    /// Half-width of the corridor around the forward axis that counts as blocking (m).
    pub corridor_half_width: f64,
    /// Any object closer than this makes the plan cautious (m).
    pub cautious_distance: f64,
    /// Goal bearings within ±this are treated as straight ahead (deg).
    pub bearing_deadband: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        Self {
            lookahead: 30.0,
            corridor_half_width: 2.0,
            cautious_distance: 8.0,
            bearing_deadband: 5.0,
        }
    }
}

/// Deterministic stand-in for a language-model decision maker.
///
/// Every object ahead inside the corridor yields a lateral move away from its side followed by
/// `keep`; the plan closes with a move that undoes the net lateral shift, or follows the goal
/// bearing when there is none.
pub fn rule_decide(graph: &TopologyGraph, goal_bearing: f64, cfg: &RuleConfig) -> DirectivePlan {
    let mut directives = Vec::new();
    let mut reasoning = Vec::new();
    let mut net_left = 0i32;
    for node in graph.nodes() {
        if node.distance() > cfg.lookahead {
            break;
        }
        let ahead = node.orientation().abs() < 90.0;
        if !ahead || node.lateral_offset().abs() > cfg.corridor_half_width {
            continue;
        }
        let dodge = if node.orientation() > 0.0 {
            Directive::Right
        } else {
            Directive::Left
        };
        net_left += if dodge == Directive::Left { 1 } else { -1 };
        reasoning.push(format!(
            "{} at {:.1} m, {:.1} deg blocks the corridor: {}",
            node.category(),
            node.distance(),
            node.orientation(),
            dodge
        ));
        directives.push(dodge);
        directives.push(Directive::Keep);
    }
    let closing = match net_left.signum() {
        1 => Directive::Right,
        -1 => Directive::Left,
        _ if goal_bearing > cfg.bearing_deadband => Directive::Left,
        _ if goal_bearing < -cfg.bearing_deadband => Directive::Right,
        _ => Directive::Keep,
    };
    directives.push(closing);

    let cautious = graph
        .nodes()
        .iter()
        .any(|n| n.distance() < cfg.cautious_distance);
    let style = if cautious {
        DriveStyle::Cautious
    } else {
        DriveStyle::Normal
    };
    if reasoning.is_empty() {
        reasoning.push("corridor clear".to_string());
    }
    DirectivePlan {
        reasoning: reasoning.join("; "),
        directives,
        style,
    }
}
