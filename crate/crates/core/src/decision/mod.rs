//! Symbolic driving plans: directives, a deterministic rule-based decision maker, a client for a
//! remote decision service, and the assignment-based consistency score between two plans.

mod assignment;
mod consistency;
mod corridor;
mod remote;
mod rule;

pub use assignment::max_weight_assignment;
pub use corridor::{corridor_decide, CorridorConfig};
pub use consistency::{consistency_score, pair_similarity, ActionSequence, SequenceSource};
pub use remote::{decide_with_fallback, DecideReply, DecideRequest, RemoteDecider, DECISION_URL_ENV};
pub use rule::{rule_decide, RuleConfig};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecisionError {
    #[error("unknown directive token {0:?}")]
    UnknownToken(String),
    #[error("unknown drive style {0:?}")]
    UnknownStyle(String),
    #[error("consistency score undefined for an empty sequence")]
    EmptySequence,
    #[error("decision service timed out after {timeout_s}s")]
    Timeout { timeout_s: f64 },
    #[error("decision service transport error: {message}")]
    Transport { message: String, raw: Option<String> },
    #[error("malformed decision reply: {message}")]
    Schema { message: String, raw: String },
}

/// One symbolic driving instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directive {
    Left,
    Right,
    Keep,
}

impl Directive {
    pub const ALL: [Directive; 3] = [Directive::Left, Directive::Right, Directive::Keep];

    pub fn token(self) -> &'static str {
        match self {
            Directive::Left => "left",
            Directive::Right => "right",
            Directive::Keep => "keep",
        }
    }

    pub fn is_lateral(self) -> bool {
        !matches!(self, Directive::Keep)
    }

    pub fn opposite(self) -> Directive {
        match self {
            Directive::Left => Directive::Right,
            Directive::Right => Directive::Left,
            Directive::Keep => Directive::Keep,
        }
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Directive {
    type Err = DecisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Directive::Left),
            "right" => Ok(Directive::Right),
            "keep" => Ok(Directive::Keep),
            _ => Err(DecisionError::UnknownToken(s.to_string())),
        }
    }
}

/// Parses a comma- or whitespace-separated directive list such as `left,keep,right`.
pub fn parse_directives(text: &str) -> Result<Vec<Directive>, DecisionError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_directives(directives: &[Directive]) -> String {
    directives
        .iter()
        .map(|d| d.token())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveStyle {
    Cautious,
    #[default]
    Normal,
    Aggressive,
}

impl FromStr for DriveStyle {
    type Err = DecisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cautious" => Ok(DriveStyle::Cautious),
            "normal" => Ok(DriveStyle::Normal),
            "aggressive" => Ok(DriveStyle::Aggressive),
            _ => Err(DecisionError::UnknownStyle(s.to_string())),
        }
    }
}

/// Nominal cruise speed in m/s for the normal style.
pub const TARGET_SPEED: f64 = 4.2;

/// Reference velocity for a drive style relative to `v_target`.
pub fn style_velocity(style: DriveStyle, v_target: f64) -> f64 {
    let factor = match style {
        DriveStyle::Cautious => 0.7,
        DriveStyle::Normal => 1.0,
        DriveStyle::Aggressive => 1.15,
    };
    factor * v_target
}

/// A parsed driving plan.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DirectivePlan {
    pub reasoning: String,
    pub directives: Vec<Directive>,
    pub style: DriveStyle,
}

impl DirectivePlan {
    pub fn new(directives: Vec<Directive>) -> Self {
        Self {
            reasoning: String::new(),
            directives,
            style: DriveStyle::Normal,
        }
    }

    pub fn len(&self) -> usize {
        self.directives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directives.is_empty()
    }
}
