use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_scenario, RunOutput, Scenario, Scheme, SimConfig};
use crate::worldmodel::{ScenarioFile, WorldError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunKey {
    pub scenario: String,
    pub scheme: Scheme,
    pub seed: u64,
}

/// Means over successful runs; `None` when no run of the cell succeeded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub scenario: String,
    pub scheme: Scheme,
    pub runs: usize,
    pub successes: usize,
    pub finish_time: Option<f64>,
    pub traj_length: Option<f64>,
    pub avg_lat_dev: Option<f64>,
    pub speed_var: Option<f64>,
    pub max_lat_dev: Option<f64>,
    pub min_clearance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
    /// Every run in scenario, scheme, seed order.
    pub runs: Vec<RunOutput>,
}

impl BenchmarkReport {
    pub fn row(&self, scenario: &str, scheme: Scheme) -> Option<&BenchmarkRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.scheme == scheme)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn run_benchmark(
    scenarios: &[ScenarioFile],
    schemes: &[Scheme],
    seeds: &[u64],
    cfg: &SimConfig,
) -> Result<BenchmarkReport, WorldError> {
    assert!(!seeds.is_empty(), "at least one seed is required");
    let keys: Vec<(usize, Scheme, u64)> = scenarios
        .iter()
        .enumerate()
        .flat_map(|(k, _)| schemes.iter().flat_map(move |&s| seeds.iter().map(move |&seed| (k, s, seed))))
        .collect();
    let runs = keys
        .par_iter()
        .map(|&(k, scheme, seed)| run_scenario(&Scenario::new(scenarios[k].clone(), seed), scheme, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for file in scenarios {
        for &scheme in schemes {
            let cell: Vec<&RunOutput> = runs.iter().filter(|r| r.scenario == file.name && r.scheme == scheme).collect();
            let ok: Vec<&RunOutput> = cell.iter().copied().filter(|r| r.metrics.success).collect();
            let m = |f: fn(&RunOutput) -> f64| mean(ok.iter().map(|r| f(r)));
            rows.push(BenchmarkRow {
                scenario: file.name.clone(),
                scheme,
                runs: cell.len(),
                successes: ok.len(),
                finish_time: m(|r| r.metrics.finish_time),
                traj_length: m(|r| r.metrics.traj_length),
                avg_lat_dev: m(|r| r.metrics.avg_lat_dev),
                speed_var: m(|r| r.metrics.speed_var),
                max_lat_dev: m(|r| r.metrics.max_lat_dev),
                min_clearance: m(|r| r.metrics.min_clearance),
            });
        }
    }
    Ok(BenchmarkReport { rows, runs })
}
