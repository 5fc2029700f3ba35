use serde::{Deserialize, Serialize};

use super::{max_weight_assignment, DecisionError, Directive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceSource {
    Vlm,
    Llm,
    Rule,
    #[default]
    Other,
}

/// An ordered, parsed action list produced by one decision source.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActionSequence {
    pub actions: Vec<Directive>,
    pub source: SequenceSource,
}

impl ActionSequence {
    pub fn new(actions: Vec<Directive>, source: SequenceSource) -> Self {
        Self { actions, source }
    }
}

/// Binary token kernel.
pub fn pair_similarity(a: Directive, b: Directive) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Best one-to-one matching of actions, normalized by the shorter sequence length.
pub fn consistency_score(a: &ActionSequence, b: &ActionSequence) -> Result<f64, DecisionError> {
    let (m, n) = (a.actions.len(), b.actions.len());
    if m == 0 || n == 0 {
        return Err(DecisionError::EmptySequence);
    }
    let sim: Vec<Vec<f64>> = a
        .actions
        .iter()
        .map(|&x| b.actions.iter().map(|&y| pair_similarity(x, y)).collect())
        .collect();
    let (total, _) = max_weight_assignment(&sim);
    Ok(total / m.min(n) as f64)
}
