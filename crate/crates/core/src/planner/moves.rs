use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::decision::Directive;
use crate::worldmodel::Cell;

/// Motion primitive of the grid template: one column along the route, optionally one row sideways.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    F,
    FL,
    FR,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::F, Move::FL, Move::FR];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Row offset of the move (+1 is left).
    pub fn lateral(self) -> i32 {
        match self {
            Move::F => 0,
            Move::FL => 1,
            Move::FR => -1,
        }
    }

    pub fn apply(self, c: Cell) -> Cell {
        Cell::new(c.i + 1, c.j + self.lateral())
    }

    pub fn length(self) -> f64 {
        match self {
            Move::F => 1.0,
            Move::FL | Move::FR => std::f64::consts::SQRT_2,
        }
    }

    /// The lateral directive a sideways move realizes.
    pub fn as_directive(self) -> Option<Directive> {
        match self {
            Move::F => None,
            Move::FL => Some(Directive::Left),
            Move::FR => Some(Directive::Right),
        }
    }

    pub fn for_directive(d: Directive) -> Move {
        match d {
            Directive::Left => Move::FL,
            Directive::Right => Move::FR,
            Directive::Keep => Move::F,
        }
    }
}

/// Labels a transition of the motion template; the route axis is +i.
pub fn move_label(from: Cell, to: Cell) -> Result<Move, PlanError> {
    match (to.i - from.i, to.j - from.j) {
        (1, 0) => Ok(Move::F),
        (1, 1) => Ok(Move::FL),
        (1, -1) => Ok(Move::FR),
        _ => Err(PlanError::NotATemplateMove { from, to }),
    }
}
