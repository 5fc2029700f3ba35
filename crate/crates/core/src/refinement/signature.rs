use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::decision::{format_directives, Directive};
use crate::geometry::distance_to_polyline;
use crate::worldmodel::GridMap;

/// Scene features used for warm-start retrieval:
/// `[width, height, obstacle count, mean obstacle distance to the centerline, directive hash]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SceneSignature(pub [f64; 5]);

impl SceneSignature {
    pub fn numeric(&self) -> &[f64] {
        &self.0[..4]
    }

    pub fn directive_hash(&self) -> u64 {
        self.0[4] as u64
    }
}

/// 52-bit digest of the directive tokens, exact as an `f64`.
pub fn directive_hash(directives: &[Directive]) -> u64 {
    let digest = Sha256::digest(format_directives(directives).as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head) >> 12
}

pub fn scene_signature(map: &GridMap, guidance: &[Directive]) -> SceneSignature {
    let obstacles = map.obstacles();
    let mean = if obstacles.is_empty() {
        0.0
    } else {
        obstacles
            .iter()
            .map(|o| distance_to_polyline(o.center, map.centerline()))
            .sum::<f64>()
            / obstacles.len() as f64
    };
    SceneSignature([
        map.width() as f64,
        map.height() as f64,
        obstacles.len() as f64,
        mean,
        directive_hash(guidance) as f64,
    ])
}
