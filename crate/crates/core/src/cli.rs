//! Command-line surface: `plan`, `tune`, `simulate`, `score` and `benchmark`.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bundled;
use crate::control::MpcConfig;
use crate::decision::{
    consistency_score, decide_with_fallback, format_directives, parse_directives, ActionSequence, Directive,
    RemoteDecider, RuleConfig, SequenceSource, DECISION_URL_ENV,
};
use crate::planner::{plan, PlanError, PlanResult, PlannerConfig, SemanticCosts};
use crate::refinement::{run_refinement, RefinementConfig, SceneStore, Thresholds};
use crate::sim::{
    render_svg, run_benchmark, run_scenario, write_benchmark_csv, write_trace_csv, RunOutput, Scenario, Scheme,
    SimConfig, SvgLayers,
};
use crate::worldmodel::{topology_from_obstacles, EgoPose, GridMap, ScenarioFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PLANNING: i32 = 2;
pub const EXIT_UNACCEPTED: i32 = 3;

const DECISION_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Parser)]
#[command(name = "afsp", version, about = "Semantic-guided planning, refinement and switching MPC in a 2D simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan one guided path on a scenario map.
    Plan(PlanArgs),
    /// Run the refinement loop with scene memory.
    Tune(TuneArgs),
    /// Closed-loop runs of one scenario.
    Simulate(SimulateArgs),
    /// Consistency scores between two files of directive sequences, one per line.
    Score(ScoreArgs),
    /// Every scheme over a scenario set and a seed list.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: afsp-out].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Directive list such as `left,keep,right`; without it the decision maker is asked.
    #[arg(long)]
    guide: Option<String>,
    #[arg(long, env = DECISION_URL_ENV)]
    decision_url: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    guide: Option<String>,
    /// Scene memory file [default: <out>/memory.jsonl].
    #[arg(long)]
    memory: Option<PathBuf>,
    /// Trial budget of the loop.
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long, env = DECISION_URL_ENV)]
    decision_url: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// `mpc`, `astar_mpc` or `afsp`; every scheme when omitted.
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Seeds such as `0,3,7` or `0..10`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    file_a: PathBuf,
    file_b: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Scenario files; the bundled reference set when omitted.
    #[arg(long)]
    scenario: Vec<PathBuf>,
    #[arg(long)]
    scheme: Vec<Scheme>,
    /// Seeds such as `0,3,7` or `0..10` [default: 0..10].
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[command(flatten)]
    common: Common,
}

/// Settings a configuration file may carry. Relative paths are resolved against the file's directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<PathBuf>,
    pub scheme: Option<Scheme>,
    pub guide: Option<String>,
    pub costs: Option<SemanticCosts>,
    pub thresholds: Option<Thresholds>,
    pub planner: Option<PlannerConfig>,
    pub mpc: Option<MpcConfig>,
    pub memory: Option<PathBuf>,
    pub decision_url: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub max_retries: Option<u32>,
    pub out: Option<PathBuf>,
}

/// A failure mapped to an exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult = Result<i32, CliError>;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.scenario, &mut cfg.memory, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(c) = &self.costs {
            c.validate().map_err(|e| CliError::config(e.to_string()))?;
        }
        if let Some(p) = &self.planner {
            p.validate().map_err(|e| CliError::config(e.to_string()))?;
        }
        if let Some(m) = &self.mpc {
            m.validate().map_err(|e| CliError::config(e.to_string()))?;
        }
        if let Some(t) = &self.thresholds {
            if !(t.d_min >= 0.0 && t.d_min <= t.d_max) {
                return Err(CliError::config(format!("thresholds need 0 <= d_min <= d_max, got {t:?}")));
            }
        }
        if self.max_retries == Some(0) {
            return Err(CliError::config("max_retries must be at least 1"));
        }
        if self.seeds.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(CliError::config("seed list is empty"));
        }
        Ok(())
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// Parses `0,3,7`, `0..10` or a mix such as `0..3,9`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range `{part}`"))?;
                let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range `{part}`"))?;
                if a >= b {
                    return Err(format!("empty seed range `{part}`"));
                }
                out.extend(a..b);
            }
            None => out.push(part.parse().map_err(|_| format!("bad seed `{part}`"))?),
        }
    }
    if out.is_empty() {
        return Err("seed list is empty".into());
    }
    Ok(out)
}

/// Writes files below one directory, refusing to replace any input.
struct OutDir {
    root: PathBuf,
    inputs: Vec<PathBuf>,
}

impl OutDir {
    fn new(root: PathBuf, inputs: &[&Path]) -> Result<Self, CliError> {
        fs::create_dir_all(&root).map_err(|e| CliError::config(format!("{}: {e}", root.display())))?;
        let inputs = inputs.iter().filter_map(|p| fs::canonicalize(p).ok()).collect();
        Ok(Self { root, inputs })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::config(format!("{}: {e}", dir.display())))?;
        }
        if fs::canonicalize(&path).is_ok_and(|p| self.inputs.contains(&p)) {
            return Err(CliError::config(format!("refusing to overwrite input {}", path.display())));
        }
        fs::write(&path, bytes).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn out_dir(flag: &Option<PathBuf>, file: &RunConfig, inputs: &[&Path]) -> Result<OutDir, CliError> {
    let root = flag.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("afsp-out"));
    OutDir::new(root, inputs)
}

fn load_scenario(path: Option<&PathBuf>) -> Result<(PathBuf, ScenarioFile), CliError> {
    let path = path.ok_or_else(|| CliError::config("a scenario is required (--scenario or config `scenario`)"))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let file = ScenarioFile::from_json(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok((path.clone(), file))
}

fn build_map(file: &ScenarioFile) -> Result<GridMap, CliError> {
    file.grid_map().map_err(|e| CliError::config(format!("scenario {}: {e}", file.name)))
}

fn parse_guide(text: &str) -> Result<Vec<Directive>, CliError> {
    parse_directives(text).map_err(|e| CliError::config(format!("guide: {e}")))
}

/// The guide, or the decision maker's directives for the scene seen from the start pose.
fn guidance(
    guide: Option<&str>,
    map: &GridMap,
    file: &ScenarioFile,
    url: Option<&str>,
) -> Result<(Vec<Directive>, &'static str), CliError> {
    if let Some(g) = guide {
        return Ok((parse_guide(g)?, "guide"));
    }
    let ego = EgoPose::new(map.start(), file.start.yaw);
    let graph = topology_from_obstacles(map.obstacles(), ego);
    let to_goal = map.goal() - map.start();
    let bearing = (to_goal.y.atan2(to_goal.x) - file.start.yaw).to_degrees();
    let remote = url.filter(|u| !u.trim().is_empty()).map(|u| RemoteDecider::new(u, DECISION_TIMEOUT));
    let decision = decide_with_fallback(remote.as_ref(), &graph, bearing, &RuleConfig::default());
    Ok((decision.directives, if remote.is_some() { "decision service" } else { "rules" }))
}

fn plan_svg(map: &GridMap, result: &PlanResult) -> String {
    render_svg(&SvgLayers {
        map: Some(map),
        obstacles: map.obstacles(),
        centerline: map.centerline(),
        paths: vec![("#1f6feb", result.world_path.clone())],
        markers: result.events.iter().map(|e| e.world_location).collect(),
    })
}

fn cmd_plan(a: PlanArgs) -> CliResult {
    let file_cfg = load_config(&a.common)?;
    file_cfg.validate()?;
    let (scn_path, scn) = load_scenario(a.scenario.as_ref().or(file_cfg.scenario.as_ref()))?;
    let map = build_map(&scn)?;
    let guide = a.guide.as_deref().or(file_cfg.guide.as_deref());
    let url = a.decision_url.as_deref().or(file_cfg.decision_url.as_deref());
    let (directives, source) = guidance(guide, &map, &scn, url)?;
    let costs = file_cfg.costs.unwrap_or_default();
    let pcfg = file_cfg.planner.unwrap_or_default();
    let out = out_dir(&a.common.out, &file_cfg, &[&scn_path])?;

    let start = map.start_cell().ok_or_else(|| planning_failure("no free start cell"))?;
    let goal = map.cell_of(map.goal());
    let result = match plan(&map, start, goal, &directives, &costs, &pcfg) {
        Ok(r) => r,
        Err(e @ (PlanError::BlockedStart(_) | PlanError::BlockedGoal(_))) => {
            return Err(planning_failure(e.to_string()));
        }
        Err(e) => return Err(CliError::config(e.to_string())),
    };
    let dump = out.write("plan.json", result.to_json().as_bytes())?;
    out.write("plan.svg", plan_svg(&map, &result).as_bytes())?;
    println!("directives ({source}): {}", format_directives(&directives));
    println!("realized: {}", format_directives(&result.realized));
    println!("success: {}  cost: {:.3}  expanded: {}", result.success, result.total_cost, result.expanded);
    println!("wrote {}", dump.display());
    Ok(if result.success { EXIT_OK } else { EXIT_PLANNING })
}

fn planning_failure(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_PLANNING,
        message: message.into(),
    }
}

fn cmd_tune(a: TuneArgs) -> CliResult {
    let file_cfg = load_config(&a.common)?;
    file_cfg.validate()?;
    if a.max_retries == Some(0) {
        return Err(CliError::config("--max-retries must be at least 1"));
    }
    let (scn_path, scn) = load_scenario(a.scenario.as_ref().or(file_cfg.scenario.as_ref()))?;
    let map = build_map(&scn)?;
    let guide = a.guide.as_deref().or(file_cfg.guide.as_deref());
    let url = a.decision_url.as_deref().or(file_cfg.decision_url.as_deref());
    let (directives, source) = guidance(guide, &map, &scn, url)?;
    let out = out_dir(&a.common.out, &file_cfg, &[&scn_path])?;
    let memory = a.memory.or(file_cfg.memory).unwrap_or_else(|| out.path("memory.jsonl"));
    if fs::canonicalize(&memory).is_ok_and(|m| fs::canonicalize(&scn_path).is_ok_and(|s| s == m)) {
        return Err(CliError::config("the memory file cannot be the scenario"));
    }
    let k_max = a.max_retries.or(file_cfg.max_retries).unwrap_or(SimConfig::default().k_max);
    let cfg = RefinementConfig {
        thresholds: file_cfg.thresholds.unwrap_or_default(),
        planner: file_cfg.planner.unwrap_or_default(),
    };
    let mut store = SceneStore::open(&memory);
    let outcome = run_refinement(&map, &directives, k_max, &mut store, &cfg);

    println!("directives ({source}): {}", format_directives(&directives));
    for t in &outcome.trials {
        let f = &t.feedback;
        let triggers: Vec<String> = f
            .trigger_events
            .iter()
            .map(|e| format!("({:.1}, {:.1}) d={:.2}", e.world_location.x, e.world_location.y, e.nearest_obstacle_distance))
            .collect();
        println!(
            "trial {}: theta c_corr={} c_delay={} c_wrong={} c_over={} | realized_ok={} wrong={} overact={} oscillation={} triggers [{}]",
            f.trial_index,
            t.theta.c_corr,
            t.theta.c_delay,
            t.theta.c_wrong,
            t.theta.c_over,
            f.realized_ok,
            f.wrong_count,
            f.overact_count,
            f.oscillation,
            triggers.join(", ")
        );
    }
    let report = serde_json::to_string_pretty(&outcome).expect("outcome serializes");
    let written = out.write("tune.json", report.as_bytes())?;
    if let Some(plan) = &outcome.result {
        out.write("tune.svg", plan_svg(&map, plan).as_bytes())?;
    }
    if let Some(e) = &outcome.save_error {
        eprintln!("warning: scene not saved: {e}");
    }
    println!(
        "accepted: {} after {} trial(s); memory {}",
        outcome.accepted,
        outcome.trials_used,
        memory.display()
    );
    println!("wrote {}", written.display());
    Ok(if outcome.accepted { EXIT_OK } else { EXIT_UNACCEPTED })
}

fn sim_config(file_cfg: &RunConfig, max_retries: Option<u32>) -> Result<SimConfig, CliError> {
    if max_retries == Some(0) {
        return Err(CliError::config("--max-retries must be at least 1"));
    }
    let mut cfg = SimConfig::default();
    if let Some(m) = file_cfg.mpc {
        cfg.mpc = m;
    }
    if let Some(p) = file_cfg.planner {
        cfg.planner = p;
    }
    if let Some(t) = file_cfg.thresholds {
        cfg.thresholds = t;
    }
    if let Some(k) = max_retries.or(file_cfg.max_retries) {
        cfg.k_max = k;
    }
    Ok(cfg)
}

fn seeds(flag: Option<&str>, file_cfg: &RunConfig, default: Vec<u64>) -> Result<Vec<u64>, CliError> {
    match flag {
        Some(s) => parse_seeds(s).map_err(CliError::config),
        None => Ok(file_cfg.seeds.clone().unwrap_or(default)),
    }
}

fn run_svg(run: &RunOutput) -> String {
    let mut paths = Vec::new();
    if let Some(p) = run.cloud.as_ref().and_then(|c| c.path()) {
        paths.push(("#2da44e", p.to_vec()));
    }
    paths.push(("#1f6feb", run.trace.iter().map(|r| crate::geometry::Point2::new(r.x, r.y)).collect()));
    let markers = run
        .cloud
        .as_ref()
        .and_then(|c| c.plan.as_ref())
        .map(|p| p.events.iter().map(|e| e.world_location).collect())
        .unwrap_or_default();
    render_svg(&SvgLayers {
        map: Some(&run.world.map),
        obstacles: &run.world.obstacles,
        centerline: &run.world.centerline,
        paths,
        markers,
    })
}

fn run_stem(run: &RunOutput) -> String {
    format!("{}_{}_{}", run.scenario, run.scheme, run.seed)
}

fn write_run(out: &OutDir, run: &RunOutput, traces: &str, plots: &str) -> Result<(), CliError> {
    let stem = run_stem(run);
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &run.trace).map_err(|e| CliError::config(e.to_string()))?;
    out.write(&format!("{traces}{stem}.csv"), &buf)?;
    out.write(&format!("{plots}{stem}.svg"), run_svg(run).as_bytes())?;
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> CliResult {
    let file_cfg = load_config(&a.common)?;
    file_cfg.validate()?;
    let (scn_path, scn) = load_scenario(a.scenario.as_ref().or(file_cfg.scenario.as_ref()))?;
    let cfg = sim_config(&file_cfg, a.max_retries)?;
    let seeds = seeds(a.seeds.as_deref(), &file_cfg, vec![0])?;
    let schemes: Vec<Scheme> = match a.scheme.or(file_cfg.scheme) {
        Some(s) => vec![s],
        None => Scheme::ALL.to_vec(),
    };
    let out = out_dir(&a.common.out, &file_cfg, &[&scn_path])?;
    let mut summary = Vec::new();
    for &scheme in &schemes {
        for &seed in &seeds {
            let run = run_scenario(&Scenario::new(scn.clone(), seed), scheme, &cfg)
                .map_err(|e| CliError::config(format!("scenario {}: {e}", scn.name)))?;
            write_run(&out, &run, "", "")?;
            let m = run.metrics;
            println!(
                "{:9} seed {:3}  success={} ftime={:.2} tlen={:.2} avg_ld={:.3} svar={:.3} mlat={:.3} min_clear={:.3}",
                scheme.as_str(),
                seed,
                m.success,
                m.finish_time,
                m.traj_length,
                m.avg_lat_dev,
                m.speed_var,
                m.max_lat_dev,
                m.min_clearance
            );
            summary.push(serde_json::json!({
                "scenario": run.scenario,
                "scheme": scheme,
                "seed": seed,
                "metrics": m,
                "collided": run.collided,
                "timed_out": run.timed_out,
                "cloud": run.cloud.as_ref().map(|c| serde_json::json!({
                    "directives": format_directives(&c.directives),
                    "style": c.style,
                    "accepted": c.accepted,
                    "trials": c.trials.len(),
                })),
            }));
        }
    }
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    let p = out.write("simulate.json", text.as_bytes())?;
    println!("wrote {}", p.display());
    Ok(EXIT_OK)
}

fn cmd_benchmark(a: BenchmarkArgs) -> CliResult {
    let file_cfg = load_config(&a.common)?;
    file_cfg.validate()?;
    let mut paths: Vec<PathBuf> = a.scenario.clone();
    if paths.is_empty() {
        paths.extend(file_cfg.scenario.clone());
    }
    let scenarios = if paths.is_empty() {
        bundled::reference_scenarios()
    } else {
        paths
            .iter()
            .map(|p| load_scenario(Some(p)).map(|(_, f)| f))
            .collect::<Result<Vec<_>, _>>()?
    };
    let schemes = if !a.scheme.is_empty() {
        a.scheme.clone()
    } else if let Some(s) = file_cfg.scheme {
        vec![s]
    } else {
        Scheme::ALL.to_vec()
    };
    let cfg = sim_config(&file_cfg, a.max_retries)?;
    let seeds = seeds(a.seeds.as_deref(), &file_cfg, (0..10).collect())?;
    let inputs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
    let out = out_dir(&a.common.out, &file_cfg, &inputs)?;
    let report = run_benchmark(&scenarios, &schemes, &seeds, &cfg).map_err(|e| CliError::config(e.to_string()))?;
    for run in &report.runs {
        write_run(&out, run, "traces/", "plots/")?;
    }
    let mut buf = Vec::new();
    write_benchmark_csv(&mut buf, &report.rows).map_err(|e| CliError::config(e.to_string()))?;
    let csv_path = out.write("benchmark.csv", &buf)?;

    let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"));
    println!(
        "{:<10} {:<10} {:>7} {:>8} {:>8} {:>7} {:>7} {:>7} {:>9}",
        "scenario", "scheme", "success", "ftime", "tlen", "avg_ld", "svar", "mlat", "min_clear"
    );
    for r in &report.rows {
        println!(
            "{:<10} {:<10} {:>7} {:>8} {:>8} {:>7} {:>7} {:>7} {:>9}",
            r.scenario,
            r.scheme.as_str(),
            format!("{}/{}", r.successes, r.runs),
            cell(r.finish_time),
            cell(r.traj_length),
            cell(r.avg_lat_dev),
            cell(r.speed_var),
            cell(r.max_lat_dev),
            cell(r.min_clearance)
        );
    }
    println!("wrote {}", csv_path.display());
    Ok(EXIT_OK)
}

fn read_sequences(path: &Path) -> Result<Vec<Vec<Directive>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .map(|(k, line)| {
            if line.trim().is_empty() {
                return Err(CliError::config(format!("{}: line {} is empty", path.display(), k + 1)));
            }
            parse_directives(line).map_err(|e| CliError::config(format!("{}: line {}: {e}", path.display(), k + 1)))
        })
        .collect()
}

fn cmd_score(a: ScoreArgs) -> CliResult {
    let _ = load_config(&a.common)?;
    let left = read_sequences(&a.file_a)?;
    let right = read_sequences(&a.file_b)?;
    if left.len() != right.len() {
        return Err(CliError::config(format!(
            "{} has {} lines but {} has {}",
            a.file_a.display(),
            left.len(),
            a.file_b.display(),
            right.len()
        )));
    }
    if left.is_empty() {
        return Err(CliError::config("no sequences to score"));
    }
    let n = left.len() as f64;
    let mut total = 0.0;
    for (k, (x, y)) in left.into_iter().zip(right).enumerate() {
        let s = consistency_score(&ActionSequence::new(x, SequenceSource::Other), &ActionSequence::new(y, SequenceSource::Other))
            .map_err(|e| CliError::config(format!("line {}: {e}", k + 1)))?;
        println!("line {}: {s:.4}", k + 1);
        total += s;
    }
    println!("mean: {:.4}", total / n);
    Ok(EXIT_OK)
}

/// Parses `args` (program name first) and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Score(a) => cmd_score(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0..3,9").unwrap(), vec![0, 1, 2, 9]);
        assert_eq!(parse_seeds(" 4 ").unwrap(), vec![4]);
        assert!(parse_seeds("3..3").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"scenaro": "a.json"}"#).is_err());
        let bad = RunConfig {
            thresholds: Some(Thresholds { d_min: 3.0, d_max: 1.0 }),
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"planner": {"w_rep": 0.5}}"#).unwrap();
        assert_eq!(partial.planner.unwrap().n_keep, PlannerConfig::default().n_keep);
    }
}
