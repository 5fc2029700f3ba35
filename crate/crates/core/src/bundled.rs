//! Scenario documents shipped with the crate.

use crate::worldmodel::{shift_map, GridMap, ScenarioFile, WorldError};

const S1: &str = include_str!("../scenarios/s1.json");
const S2: &str = include_str!("../scenarios/s2.json");
const S3: &str = include_str!("../scenarios/s3.json");
const CASE: &str = include_str!("../scenarios/case.json");
const SHIFT_BASE: &str = include_str!("../scenarios/shift_base.json");

/// Translations of the shift-experiment map, in meters.
pub const SHIFTS: [(f64, f64); 3] = [(0.0, 0.0), (-0.5, 0.0), (-0.5, 1.0)];

fn parse(text: &str) -> ScenarioFile {
    ScenarioFile::from_json(text).expect("bundled scenario parses")
}

/// The nominal map and the two misregistered maps of the closed-loop comparison.
pub fn reference_scenarios() -> Vec<ScenarioFile> {
    [S1, S2, S3].into_iter().map(parse).collect()
}

/// Two-object scene for the refinement loop; drive it with `left, keep, right`.
pub fn case_study() -> ScenarioFile {
    parse(CASE)
}

pub fn shift_base() -> ScenarioFile {
    parse(SHIFT_BASE)
}

/// The shift-experiment map under each of [`SHIFTS`].
pub fn shift_maps() -> Result<Vec<GridMap>, WorldError> {
    let base = shift_base().grid_map()?;
    Ok(SHIFTS.iter().map(|&(dx, dy)| shift_map(&base, dx, dy)).collect())
}
