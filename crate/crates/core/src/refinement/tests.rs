use proptest::prelude::*;

use super::*;
use crate::decision::Directive::*;

fn trigger(d: f64) -> TriggerEvent {
    TriggerEvent {
        world_location: Point2::new(0.0, 0.0),
        nearest_obstacle_distance: d,
    }
}

fn perfect(trial_index: u32) -> PlannerFeedback {
    PlannerFeedback {
        trial_index,
        trigger_events: vec![trigger(3.0), trigger(4.5)],
        wrong_count: 0,
        overact_count: 0,
        realized_ok: true,
        oscillation: false,
    }
}

#[test]
fn acceptance_examples() {
    let th = Thresholds::default();
    assert!(acceptable(&perfect(1), &th));
    let far = PlannerFeedback {
        trigger_events: vec![trigger(8.0)],
        ..perfect(1)
    };
    assert!(!acceptable(&far, &th));
    let wrong = PlannerFeedback {
        wrong_count: 1,
        ..perfect(1)
    };
    assert!(!acceptable(&wrong, &th));
    let osc = PlannerFeedback {
        oscillation: true,
        ..perfect(1)
    };
    assert!(!acceptable(&osc, &th));
}

#[test]
fn premature_schedule_reproduces_case_sequence() {
    let th = Thresholds::default();
    let theta = SemanticCosts::default();
    let early = |i| PlannerFeedback {
        trigger_events: vec![trigger(9.0)],
        ..perfect(i)
    };
    let t2 = refine(&theta, &early(1), &th);
    assert_eq!(t2.c_delay, 0.5);
    let t3 = refine(&t2, &early(2), &th);
    assert_eq!(t3.c_delay, 0.3);
    let t4 = refine(&t3, &early(3), &th);
    assert_eq!(t4.c_delay, 0.2);
    let floor = refine(&SemanticCosts { c_delay: 0.15, ..theta }, &early(3), &th);
    assert_eq!(floor.c_delay, 0.1);
}

#[test]
fn rule_precedence() {
    let th = Thresholds::default();
    let theta = SemanticCosts::default();
    let wrong = PlannerFeedback {
        wrong_count: 2,
        ..perfect(1)
    };
    assert_eq!(refine(&theta, &wrong, &th).c_wrong, 7.0);
    let late = PlannerFeedback {
        trigger_events: vec![trigger(0.5)],
        wrong_count: 2,
        ..perfect(1)
    };
    let r = refine(&theta, &late, &th);
    assert_eq!((r.c_delay, r.c_wrong), (1.5, 5.0));
    let missed = PlannerFeedback {
        realized_ok: false,
        trigger_events: vec![],
        ..perfect(1)
    };
    assert_eq!(refine(&theta, &missed, &th).c_delay, 1.5);
    let over = PlannerFeedback {
        overact_count: 1,
        ..perfect(1)
    };
    assert!((refine(&theta, &over, &th).c_over - 1.2).abs() < 1e-12);
    let both = PlannerFeedback {
        trigger_events: vec![trigger(0.5), trigger(7.0)],
        ..perfect(1)
    };
    assert_eq!(refine(&theta, &both, &th).c_delay, 0.5);
}

#[test]
fn oscillation_detector() {
    use crate::planner::Move::*;
    assert!(detect_oscillation(&[FL, FR, FL]));
    assert!(detect_oscillation(&[F, FL, FR, FL, F]));
    assert!(!detect_oscillation(&[FL, F, F, FR, F, F, FL]));
    assert!(!detect_oscillation(&[FL, FL, F, FR]));
    assert!(!detect_oscillation(&[]));
    assert!(!detect_oscillation(&[FL]));
}

fn entry(sig: [f64; 5], c_delay: f64, secs: i64) -> MemoryEntry {
    MemoryEntry {
        signature: SceneSignature(sig),
        guidance: vec!["left".into()],
        theta: [-5.0, c_delay, 5.0, 0.8],
        metrics: SceneMetrics::default(),
        ts: DateTime::from_timestamp(1_700_000_000 + secs, 0).unwrap(),
    }
}

#[test]
fn retrieval_rules() {
    let store = SceneStore::in_memory();
    let sig = SceneSignature([30.0, 4.0, 2.0, 2.0, 77.0]);
    assert_eq!(select_ref_hyperparams(&sig, &store), SemanticCosts::default());

    let exact = entry(sig.0, 0.3, 0);
    let near = entry([30.0, 4.0, 2.0, 2.5, 77.0], 0.5, 10);
    let other_hash = entry([30.0, 4.0, 2.0, 2.0, 78.0], 0.7, 20);
    let pool = vec![near.clone(), exact.clone(), other_hash.clone()];
    assert_eq!(nearest_entry(&sig, &pool).unwrap().theta[1], 0.3);

    // Hash mismatch only counts when nothing with the same hash exists.
    assert_eq!(nearest_entry(&sig, &[other_hash.clone()]).unwrap().theta[1], 0.7);

    // Equal distance: newer timestamp wins regardless of order.
    let older = entry([30.0, 4.0, 2.0, 1.5, 77.0], 0.4, 5);
    let newer = entry([30.0, 4.0, 2.0, 2.5, 77.0], 0.6, 50);
    assert_eq!(nearest_entry(&sig, &[newer.clone(), older.clone()]).unwrap().theta[1], 0.6);
    assert_eq!(nearest_entry(&sig, &[older, newer]).unwrap().theta[1], 0.6);
}

#[test]
fn save_then_retrieve_and_newest_wins() {
    let dir = tempfile::tempdir().unwrap();
    let mut store = SceneStore::open(dir.path().join("mem.jsonl"));
    let sig = SceneSignature([30.0, 4.0, 2.0, 2.0, 77.0]);
    let a = SemanticCosts { c_delay: 0.3, ..SemanticCosts::default() };
    let b = SemanticCosts { c_delay: 0.5, ..SemanticCosts::default() };
    let t0 = DateTime::from_timestamp(1_700_000_000, 0).unwrap();
    save_scene(&sig, &[Left], &a, SceneMetrics::default(), t0, &mut store).unwrap();
    assert_eq!(select_ref_hyperparams(&sig, &store), a);
    save_scene(&sig, &[Left], &b, SceneMetrics::default(), t0 + chrono::Duration::seconds(1), &mut store).unwrap();
    assert_eq!(select_ref_hyperparams(&sig, &store), b);
}

#[test]
fn unwritable_store_still_reports_success() {
    let dir = tempfile::tempdir().unwrap();
    // A directory where the file should be makes the append fail.
    let path = dir.path().join("mem.jsonl");
    std::fs::create_dir(&path).unwrap();
    let mut store = SceneStore::open(&path);
    let m = open_road();
    let out = run_refinement(&m, &[Keep], 3, &mut store, &RefinementConfig::default());
    assert!(out.accepted);
    assert!(out.save_error.is_some());
}

fn open_road() -> GridMap {
    use crate::worldmodel::GridSpec;
    let spec = GridSpec {
        origin: Point2::new(0.0, -4.5),
        cell_size: 3.0,
        width: 12,
        height: 3,
    };
    GridMap::new(
        spec,
        vec![],
        vec![Point2::new(0.0, 0.0), Point2::new(36.0, 0.0)],
        Point2::new(1.5, 0.0),
        Point2::new(34.5, 0.0),
    )
    .unwrap()
}

#[test]
fn impossible_thresholds_exhaust_k_max() {
    let m = open_road();
    let mut store = SceneStore::in_memory();
    let cfg = RefinementConfig {
        thresholds: Thresholds { d_min: 6.0, d_max: 1.0 },
        ..RefinementConfig::default()
    };
    // Any lateral trigger falls outside the empty interval.
    let out = run_refinement(&m, &[Left, Keep, Right], 4, &mut store, &cfg);
    assert!(!out.accepted);
    assert_eq!(out.trials_used, 4);
    assert_eq!(out.trials.len(), 4);
    assert!(store.entries().unwrap().is_empty());
}

#[test]
fn unreachable_goal_feedback() {
    use crate::worldmodel::{GridSpec, Obstacle};
    let spec = GridSpec {
        origin: Point2::new(0.0, -4.5),
        cell_size: 3.0,
        width: 12,
        height: 3,
    };
    let wall = (0..3)
        .map(|j| Obstacle::new(j, Point2::new(16.5, -3.0 + 3.0 * j as f64), 1.4, "barrier", false).unwrap())
        .collect();
    let m = GridMap::new(
        spec,
        wall,
        vec![Point2::new(0.0, 0.0), Point2::new(36.0, 0.0)],
        Point2::new(1.5, 0.0),
        Point2::new(34.5, 0.0),
    )
    .unwrap();
    let (_, fb) = astar_path_generate(&m, &[Left, Keep, Right], &SemanticCosts::default(), 1, &PlannerConfig::default());
    assert!(!fb.realized_ok);
    assert!(fb.trigger_events.is_empty());
}

#[test]
fn accepted_run_writes_exactly_one_record() {
    let m = open_road();
    let mut store = SceneStore::in_memory();
    let out = run_refinement(&m, &[Keep], 3, &mut store, &RefinementConfig::default());
    assert!(out.accepted);
    assert_eq!(out.trials_used, 1);
    assert_eq!(store.entries().unwrap().len(), 1);
    let again = run_refinement(&m, &[Keep], 3, &mut store, &RefinementConfig::default());
    assert!(again.accepted);
    assert_eq!(store.entries().unwrap().len(), 2);
}

fn feedback() -> impl Strategy<Value = PlannerFeedback> {
    (
        1u32..6,
        prop::collection::vec(0.0f64..12.0, 0..4),
        0usize..3,
        0usize..3,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(trial_index, d, wrong_count, overact_count, realized_ok, oscillation)| PlannerFeedback {
            trial_index,
            trigger_events: d.into_iter().map(trigger).collect(),
            wrong_count,
            overact_count,
            realized_ok,
            oscillation,
        })
}

proptest! {
    #[test]
    fn widening_thresholds_keeps_acceptance(fb in feedback(), lo in 0.0f64..3.0, hi in 3.0f64..9.0,
                                            widen_lo in 0.0f64..1.0, widen_hi in 0.0f64..3.0) {
        let narrow = Thresholds { d_min: lo, d_max: hi };
        let wide = Thresholds { d_min: (lo - widen_lo).max(0.0), d_max: hi + widen_hi };
        if acceptable(&fb, &narrow) {
            prop_assert!(acceptable(&fb, &wide));
        }
    }

    #[test]
    fn refinement_is_deterministic_and_valid(fb in feedback(), c_delay in 0.1f64..3.0) {
        let theta = SemanticCosts { c_delay, ..SemanticCosts::default() };
        let th = Thresholds::default();
        let a = refine(&theta, &fb, &th);
        prop_assert_eq!(a, refine(&theta, &fb, &th));
        prop_assert!(a.validate().is_ok());
    }
}
