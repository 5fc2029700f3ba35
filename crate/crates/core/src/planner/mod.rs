//! Semantic-guided A* over a forward-only grid template.

mod moves;
mod search;
mod semantics;

pub use moves::{move_label, Move};
pub use search::{
    heuristic, plan, audit_moves, realized_sequence, repulsive_field, PlanEvent, PlanResult, PlannerConfig, SearchState, SemanticAudit,
};
pub use semantics::{semantic_step_cost, AlignmentCategory, SemanticCosts, StepSemantics};

use thiserror::Error;

use crate::worldmodel::Cell;

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("step {from:?} -> {to:?} is not a template move")]
    NotATemplateMove { from: Cell, to: Cell },
    #[error("start cell {0:?} is blocked or outside the map")]
    BlockedStart(Cell),
    #[error("goal cell {0:?} is blocked or outside the map")]
    BlockedGoal(Cell),
    #[error("no unblocked cell to snap to")]
    NoFreeCell,
    #[error("invalid semantic costs {0:?}")]
    InvalidCosts(SemanticCosts),
    #[error("invalid planner config {0:?}")]
    InvalidConfig(PlannerConfig),
}


/// Plans between the map's snapped start and goal cells.
pub fn plan_on_map(
    map: &crate::worldmodel::GridMap,
    directives: &[crate::decision::Directive],
    costs: &SemanticCosts,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    let start = map.start_cell().ok_or(PlanError::NoFreeCell)?;
    let goal = map.goal_cell().ok_or(PlanError::NoFreeCell)?;
    plan(map, start, goal, directives, costs, cfg)
}
