//! Alignment of a grid move with the pending directive, and the soft cost it earns.

use serde::{Deserialize, Serialize};

use super::{Move, PlanError};
use crate::decision::Directive;

/// Soft costs per alignment category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemanticCosts {
    pub c_corr: f64,
    pub c_delay: f64,
    pub c_wrong: f64,
    pub c_over: f64,
}

impl Default for SemanticCosts {
    fn default() -> Self {
        Self {
            c_corr: -5.0,
            c_delay: 1.0,
            c_wrong: 5.0,
            c_over: 0.8,
        }
    }
}

impl SemanticCosts {
    pub fn new(c_corr: f64, c_delay: f64, c_wrong: f64, c_over: f64) -> Result<Self, PlanError> {
        let costs = Self {
            c_corr,
            c_delay,
            c_wrong,
            c_over,
        };
        costs.validate()?;
        Ok(costs)
    }

    /// All-zero costs turn the search into plain geometric A*. Not a valid tuning point.
    pub const fn vanilla() -> Self {
        Self {
            c_corr: 0.0,
            c_delay: 0.0,
            c_wrong: 0.0,
            c_over: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let all_finite = self.as_array().iter().all(|v| v.is_finite());
        if all_finite && self.c_corr < 0.0 && self.c_wrong > 0.0 && self.c_delay >= 0.0 && self.c_over >= 0.0 {
            Ok(())
        } else {
            Err(PlanError::InvalidCosts(*self))
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.c_corr, self.c_delay, self.c_wrong, self.c_over]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            c_corr: v[0],
            c_delay: v[1],
            c_wrong: v[2],
            c_over: v[3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlignmentCategory {
    Correct,
    Delay,
    Wrong,
    Overact,
    Neutral,
}

/// Outcome of scoring one move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSemantics {
    pub cost: f64,
    pub completed: bool,
    pub category: AlignmentCategory,
    /// Consecutive forward moves counted toward a pending `keep`.
    pub keep_run: u32,
}

/// Scores `curr` against the pending directive (`None` once every directive is realized).
///
/// `last_lateral` is the most recent lateral directive already realized; a sideways move that
/// repeats it is an overact. Without one, the previous move's side plays that role.
pub fn semantic_step_cost(
    prev: Move,
    curr: Move,
    pending: Option<Directive>,
    last_lateral: Option<Directive>,
    costs: &SemanticCosts,
    keep_run: u32,
    n_keep: u32,
) -> StepSemantics {
    use AlignmentCategory::*;
    let step = |category, completed, keep_run| {
        let cost = match category {
            Correct => costs.c_corr,
            Delay => costs.c_delay,
            Wrong => costs.c_wrong,
            Overact => costs.c_over,
            Neutral => 0.0,
        };
        StepSemantics {
            cost,
            completed,
            category,
            keep_run,
        }
    };
    let repeated = last_lateral.or(prev.as_directive());
    let sideways = |m: Move| {
        if m.as_directive() == repeated {
            step(Overact, false, 0)
        } else {
            step(Wrong, false, 0)
        }
    };
    match pending {
        Some(d) if d.is_lateral() => {
            if curr == Move::for_directive(d) {
                step(Correct, true, 0)
            } else if curr == Move::F {
                step(Delay, false, 0)
            } else {
                step(Wrong, false, 0)
            }
        }
        Some(_keep) => {
            if curr == Move::F {
                let run = keep_run + 1;
                if run >= n_keep.max(1) {
                    step(Correct, true, 0)
                } else {
                    step(Delay, false, run)
                }
            } else {
                sideways(curr)
            }
        }
        None => {
            if curr == Move::F {
                step(Neutral, false, 0)
            } else {
                sideways(curr)
            }
        }
    }
}
