//! Feedback loop that tunes the planner's semantic costs for a scene, with warm starts from memory.

mod signature;
mod store;

pub use signature::{directive_hash, scene_signature, SceneSignature};
pub use store::{MemoryEntry, SceneMetrics, SceneStore};

use std::io;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::decision::Directive;
use crate::geometry::Point2;
use crate::planner::{plan_on_map, AlignmentCategory, Move, PlanResult, PlannerConfig, SemanticCosts};
use crate::worldmodel::GridMap;

/// Where a lateral directive was realized and how far the nearest inflated obstacle was.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvent {
    pub world_location: Point2,
    #[serde(with = "crate::geometry::serde_unbounded")]
    pub nearest_obstacle_distance: f64,
}

/// Event summary returned by the planner; full paths are kept separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerFeedback {
    pub trial_index: u32,
    pub trigger_events: Vec<TriggerEvent>,
    pub wrong_count: usize,
    pub overact_count: usize,
    pub realized_ok: bool,
    pub oscillation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { d_min: 1.0, d_max: 6.0 }
    }
}

/// True when at least two FL/FR sign changes fall inside some window of four consecutive moves.
pub fn detect_oscillation(moves: &[Move]) -> bool {
    let window = 4.min(moves.len());
    moves.windows(window.max(1)).any(|w| {
        let sides: Vec<i32> = w.iter().map(|m| m.lateral()).filter(|&s| s != 0).collect();
        sides.windows(2).filter(|p| p[0] != p[1]).count() >= 2
    })
}

pub fn feedback_from_plan(result: &PlanResult, trial_index: u32) -> PlannerFeedback {
    let trigger_events = if result.success {
        result
            .events
            .iter()
            .filter(|e| e.category == AlignmentCategory::Correct && result.requested[e.directive_index].is_lateral())
            .map(|e| TriggerEvent {
                world_location: e.world_location,
                nearest_obstacle_distance: e.nearest_obstacle_distance,
            })
            .collect()
    } else {
        Vec::new()
    };
    PlannerFeedback {
        trial_index,
        trigger_events,
        wrong_count: result.count(AlignmentCategory::Wrong),
        overact_count: result.count(AlignmentCategory::Overact),
        realized_ok: result.success,
        oscillation: detect_oscillation(&result.moves),
    }
}

/// Runs the planner for one trial and summarizes its events.
pub fn astar_path_generate(
    map: &GridMap,
    guidance: &[Directive],
    theta: &SemanticCosts,
    trial_index: u32,
    cfg: &PlannerConfig,
) -> (Option<PlanResult>, PlannerFeedback) {
    debug_assert!(trial_index >= 1);
    match plan_on_map(map, guidance, theta, cfg) {
        Ok(mut result) => {
            for e in &mut result.events {
                e.trial_index = trial_index;
            }
            let fb = feedback_from_plan(&result, trial_index);
            (Some(result), fb)
        }
        Err(e) => {
            log::warn!("trial {trial_index}: planning failed: {e}");
            let fb = PlannerFeedback {
                trial_index,
                trigger_events: Vec::new(),
                wrong_count: 0,
                overact_count: 0,
                realized_ok: false,
                oscillation: false,
            };
            (None, fb)
        }
    }
}

pub fn acceptable(fb: &PlannerFeedback, th: &Thresholds) -> bool {
    fb.realized_ok
        && fb.wrong_count == 0
        && fb.overact_count == 0
        && !fb.oscillation
        && fb
            .trigger_events
            .iter()
            .all(|t| t.nearest_obstacle_distance >= th.d_min && t.nearest_obstacle_distance <= th.d_max)
}

const DELAY_SCHEDULE: [f64; 3] = [0.5, 0.2, 0.1];
const DELAY_FLOOR: f64 = 0.1;

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Proposes the next costs from the current costs and the trial feedback.
pub trait Refiner {
    fn refine(&self, theta: &SemanticCosts, fb: &PlannerFeedback, th: &Thresholds) -> SemanticCosts;
}

/// Deterministic rules, first match wins: premature triggers lower `c_delay` on a shrinking
/// schedule; late or missed ones raise it; wrong moves raise `c_wrong`; oscillation or
/// overacting raises `c_over`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleRefiner;

impl Refiner for RuleRefiner {
    fn refine(&self, theta: &SemanticCosts, fb: &PlannerFeedback, th: &Thresholds) -> SemanticCosts {
        refine(theta, fb, th)
    }
}

pub fn refine(theta: &SemanticCosts, fb: &PlannerFeedback, th: &Thresholds) -> SemanticCosts {
    let mut next = *theta;
    let premature = fb.trigger_events.iter().any(|t| t.nearest_obstacle_distance > th.d_max);
    let late = !fb.realized_ok || fb.trigger_events.iter().any(|t| t.nearest_obstacle_distance < th.d_min);
    if premature {
        let step = DELAY_SCHEDULE[(fb.trial_index.max(1) as usize - 1).min(DELAY_SCHEDULE.len() - 1)];
        next.c_delay = round6((theta.c_delay - step).max(DELAY_FLOOR));
    } else if late {
        next.c_delay = round6(theta.c_delay + 0.5);
    } else if fb.wrong_count > 0 {
        next.c_wrong = round6(theta.c_wrong + 2.0);
    } else if fb.oscillation || fb.overact_count > 0 {
        next.c_over = round6(theta.c_over + 0.4);
    }
    debug_assert!(next.validate().is_ok() || theta.validate().is_err());
    next
}

/// Warm start: nearest stored scene on normalized numeric features, preferring entries with the
/// same directive hash. Equal distances go to the newer record.
pub fn select_ref_hyperparams(sig: &SceneSignature, store: &SceneStore) -> SemanticCosts {
    let entries = match store.entries() {
        Ok(e) => e,
        Err(e) => {
            log::warn!("memory store unreadable, using defaults: {e}");
            Vec::new()
        }
    };
    nearest_entry(sig, &entries).map_or_else(SemanticCosts::default, MemoryEntry::costs)
}

pub fn nearest_entry<'a>(sig: &SceneSignature, entries: &'a [MemoryEntry]) -> Option<&'a MemoryEntry> {
    let same_hash: Vec<&MemoryEntry> = entries
        .iter()
        .filter(|e| e.signature.directive_hash() == sig.directive_hash())
        .collect();
    let pool: Vec<&MemoryEntry> = if same_hash.is_empty() {
        entries.iter().collect()
    } else {
        same_hash
    };
    let mut scale = [1.0f64; 4];
    for v in pool.iter().map(|e| e.signature.numeric()).chain(std::iter::once(sig.numeric())) {
        for (s, x) in scale.iter_mut().zip(v) {
            *s = s.max(x.abs());
        }
    }
    let dist = |e: &MemoryEntry| {
        e.signature
            .numeric()
            .iter()
            .zip(sig.numeric())
            .zip(scale)
            .map(|((a, b), s)| ((a - b) / s).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut best: Option<(f64, &MemoryEntry)> = None;
    for e in pool {
        let d = dist(e);
        // Later lines win exact ties on both distance and timestamp.
        let better = match best {
            None => true,
            Some((bd, be)) => d < bd || (d == bd && e.ts >= be.ts),
        };
        if better {
            best = Some((d, e));
        }
    }
    best.map(|(_, e)| e)
}

pub fn save_scene(
    sig: &SceneSignature,
    guidance: &[Directive],
    theta: &SemanticCosts,
    metrics: SceneMetrics,
    ts: DateTime<Utc>,
    store: &mut SceneStore,
) -> io::Result<()> {
    let entry = MemoryEntry {
        signature: *sig,
        guidance: guidance.iter().map(|d| d.token().to_string()).collect(),
        theta: theta.as_array(),
        metrics,
        ts,
    };
    store.append(&entry)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub theta: SemanticCosts,
    pub feedback: PlannerFeedback,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementOutcome {
    pub theta: SemanticCosts,
    pub result: Option<PlanResult>,
    pub trials_used: u32,
    pub accepted: bool,
    pub trials: Vec<TrialRecord>,
    /// Set when the accepted scene could not be persisted.
    pub save_error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RefinementConfig {
    pub thresholds: Thresholds,
    pub planner: PlannerConfig,
}

/// Warm start, then generate, check and refine until a trial is acceptable or `k_max` trials ran.
pub fn run_refinement(
    map: &GridMap,
    guidance: &[Directive],
    k_max: u32,
    store: &mut SceneStore,
    cfg: &RefinementConfig,
) -> RefinementOutcome {
    run_refinement_with(map, guidance, k_max, store, cfg, &RuleRefiner)
}

pub fn run_refinement_with(
    map: &GridMap,
    guidance: &[Directive],
    k_max: u32,
    store: &mut SceneStore,
    cfg: &RefinementConfig,
    refiner: &dyn Refiner,
) -> RefinementOutcome {
    let k_max = k_max.max(1);
    let sig = scene_signature(map, guidance);
    let mut theta = select_ref_hyperparams(&sig, store);
    let mut trials = Vec::new();
    let mut last = None;
    for i in 1..=k_max {
        let (result, fb) = astar_path_generate(map, guidance, &theta, i, &cfg.planner);
        trials.push(TrialRecord {
            theta,
            feedback: fb.clone(),
        });
        if acceptable(&fb, &cfg.thresholds) {
            let metrics = SceneMetrics {
                trials: i,
                total_cost: result.as_ref().map_or(0.0, |r| r.total_cost),
                trigger_distances: fb.trigger_events.iter().map(|t| t.nearest_obstacle_distance).collect(),
            };
            let save_error = save_scene(&sig, guidance, &theta, metrics, Utc::now(), store)
                .err()
                .map(|e| {
                    log::error!("could not save accepted scene: {e}");
                    e.to_string()
                });
            return RefinementOutcome {
                theta,
                result,
                trials_used: i,
                accepted: true,
                trials,
                save_error,
            };
        }
        last = result;
        if i < k_max {
            theta = refiner.refine(&theta, &fb, &cfg.thresholds);
        }
    }
    RefinementOutcome {
        theta,
        result: last,
        trials_used: k_max,
        accepted: false,
        trials,
        save_error: None,
    }
}

#[cfg(test)]
mod tests;
