//! Closed-loop 10 Hz harness comparing centerline MPC, classical-A* MPC and the full
//! decision, planning and refinement stack on one controller.

mod benchmark;
mod metrics;
mod output;

pub use benchmark::{run_benchmark, BenchmarkReport, BenchmarkRow, RunKey};
pub use metrics::{compute_metrics, ScenarioMetrics, TraceRow};
pub use output::{render_svg, write_benchmark_csv, write_trace_csv, SvgLayers};

use std::fmt;
use std::str::FromStr;
use std::sync::mpsc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{reference_along, solve_mpc, ControlInput, MpcConfig, SwitchingPolicy, VehicleState};
use crate::decision::{corridor_decide, rule_decide, style_velocity, CorridorConfig, Directive, DriveStyle, RuleConfig};
use crate::geometry::{distance_to_polyline, Point2};
use crate::planner::{plan_on_map, PlanResult, PlannerConfig, SemanticCosts};
use crate::refinement::{run_refinement, RefinementConfig, SceneStore, Thresholds, TrialRecord};
use crate::worldmodel::{inflate, topology_from_obstacles, EgoPose, GridMap, Obstacle, ScenarioFile, WorldError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Mpc,
    AstarMpc,
    Afsp,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Mpc, Scheme::AstarMpc, Scheme::Afsp];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mpc => "mpc",
            Scheme::AstarMpc => "astar_mpc",
            Scheme::Afsp => "afsp",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "mpc" => Ok(Scheme::Mpc),
            "astar_mpc" | "a*_mpc" | "astar" => Ok(Scheme::AstarMpc),
            "afsp" => Ok(Scheme::Afsp),
            other => Err(format!("unknown scheme `{other}` (expected mpc, astar_mpc or afsp)")),
        }
    }
}

/// Which deterministic decision maker feeds the AFSP planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decider {
    /// Dodge each blocking object away from its side.
    Rule,
    /// Choose lanes by their free run ahead.
    #[default]
    Corridor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub control_dt: f64,
    pub timeout: f64,
    /// Delay between issuing the cloud request and its mailbox delivery (s).
    pub cloud_latency: f64,
    pub k_max: u32,
    /// Half-width of the uniform seed perturbation of dynamic obstacles (m).
    pub perturbation: f64,
    pub mpc: MpcConfig,
    pub planner: PlannerConfig,
    pub thresholds: Thresholds,
    pub decider: Decider,
    pub rule: RuleConfig,
    pub corridor: CorridorConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            control_dt: 0.1,
            timeout: 60.0,
            cloud_latency: 1.0,
            k_max: 3,
            perturbation: 0.3,
            mpc: MpcConfig::default(),
            planner: PlannerConfig {
                w_rep: 0.3,
                d_infl_cells: 1.0,
                ..PlannerConfig::default()
            },
            thresholds: Thresholds::default(),
            decider: Decider::Corridor,
            rule: RuleConfig {
                lookahead: 150.0,
                ..RuleConfig::default()
            },
            corridor: CorridorConfig {
                lookahead: 150.0,
                ..CorridorConfig::default()
            },
        }
    }
}

/// A scenario document with a seed. The shift misregisters the planning map against the world:
/// grid, start and goal move while obstacles, route and vehicle stay put.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub seed: u64,
}

/// Ground truth for one run.
#[derive(Debug, Clone)]
pub struct World {
    pub map: GridMap,
    /// Inflated obstacles used for control, clearance and collision.
    pub obstacles: Vec<Obstacle>,
    pub centerline: Vec<Point2>,
    pub start: VehicleState,
    pub goal: Point2,
    pub capture_radius: f64,
    pub target_speed: f64,
}

impl Scenario {
    pub fn new(file: ScenarioFile, seed: u64) -> Self {
        Self { file, seed }
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn world(&self, cfg: &SimConfig) -> Result<World, WorldError> {
        let f = &self.file;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut raw = f.raw_obstacles()?;
        for o in &mut raw {
            if o.dynamic && cfg.perturbation > 0.0 {
                o.center.x += rng.gen_range(-cfg.perturbation..=cfg.perturbation);
                o.center.y += rng.gen_range(-cfg.perturbation..=cfg.perturbation);
            }
        }
        let map = f.grid_map_with(&raw)?;
        Ok(World {
            obstacles: inflate(&raw, f.vehicle_factor, f.static_extra),
            centerline: map.centerline().to_vec(),
            start: VehicleState::new(f.start.x, f.start.y, f.start.yaw),
            goal: f.goal.into(),
            capture_radius: f.capture_radius,
            target_speed: f.target_speed,
            map,
        })
    }
}

/// What the cloud side produced for one run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CloudPlan {
    pub directives: Vec<Directive>,
    pub style: DriveStyle,
    pub reasoning: String,
    pub plan: Option<PlanResult>,
    pub trials: Vec<TrialRecord>,
    pub accepted: bool,
    /// Reference speed along the planned path (m/s).
    pub speed: f64,
}

impl CloudPlan {
    pub fn path(&self) -> Option<&[Point2]> {
        self.plan.as_ref().filter(|p| p.success && p.world_path.len() >= 2).map(|p| p.world_path.as_slice())
    }
}

/// Runs the scheme's cloud pipeline; `None` for the centerline-only baseline.
pub fn cloud_plan(world: &World, scheme: Scheme, cfg: &SimConfig) -> Option<CloudPlan> {
    match scheme {
        Scheme::Mpc => None,
        Scheme::AstarMpc => {
            let plan = plan_on_map(&world.map, &[], &SemanticCosts::vanilla(), &cfg.planner).ok();
            Some(CloudPlan {
                plan,
                speed: world.target_speed,
                ..CloudPlan::default()
            })
        }
        Scheme::Afsp => {
            let ego = EgoPose::new(world.start.position(), world.start.yaw);
            let graph = topology_from_obstacles(&world.obstacles, ego);
            let to_goal = world.goal - world.start.position();
            let bearing = (to_goal.y.atan2(to_goal.x) - world.start.yaw).to_degrees();
            let decision = match cfg.decider {
                Decider::Rule => rule_decide(&graph, bearing, &cfg.rule),
                Decider::Corridor => corridor_decide(&graph, bearing, &cfg.corridor),
            };
            let mut store = SceneStore::in_memory();
            let rcfg = RefinementConfig {
                thresholds: cfg.thresholds,
                planner: cfg.planner,
            };
            let out = run_refinement(&world.map, &decision.directives, cfg.k_max, &mut store, &rcfg);
            Some(CloudPlan {
                speed: style_velocity(decision.style, world.target_speed),
                directives: decision.directives,
                style: decision.style,
                reasoning: decision.reasoning,
                plan: out.result,
                trials: out.trials,
                accepted: out.accepted,
            })
        }
    }
}

/// Completed-result mailbox. The control loop polls it once per tick and only looks for a result
/// once the simulated latency has elapsed, so delivery time never depends on wall-clock speed.
struct Mailbox {
    rx: Option<mpsc::Receiver<Option<CloudPlan>>>,
    ready_at: f64,
    delivered: Option<CloudPlan>,
}

impl Mailbox {
    fn spawn(world: &World, scheme: Scheme, cfg: &SimConfig) -> Self {
        let (tx, rx) = mpsc::channel();
        let world = world.clone();
        let cfg = *cfg;
        std::thread::spawn(move || {
            let _ = tx.send(cloud_plan(&world, scheme, &cfg));
        });
        Self {
            rx: Some(rx),
            ready_at: cfg.cloud_latency,
            delivered: None,
        }
    }

    fn poll(&mut self, t: f64) -> Option<&CloudPlan> {
        if t + 1e-9 >= self.ready_at {
            if let Some(rx) = self.rx.take() {
                self.delivered = rx.recv().ok().flatten();
            }
        }
        self.delivered.as_ref()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: String,
    pub scheme: Scheme,
    pub seed: u64,
    pub trace: Vec<TraceRow>,
    pub metrics: ScenarioMetrics,
    pub cloud: Option<CloudPlan>,
    pub world: World,
    pub collided: bool,
    pub timed_out: bool,
}

fn clearance(p: Point2, obstacles: &[Obstacle], r_v: f64) -> f64 {
    obstacles
        .iter()
        .map(|o| o.boundary_distance(p) - r_v)
        .fold(f64::INFINITY, f64::min)
}

pub fn run_scenario(scn: &Scenario, scheme: Scheme, cfg: &SimConfig) -> Result<RunOutput, WorldError> {
    let world = scn.world(cfg)?;
    let mpc = &cfg.mpc;
    let mut mailbox = (scheme != Scheme::Mpc).then(|| Mailbox::spawn(&world, scheme, cfg));
    let mut policy = SwitchingPolicy::default();
    let mut state = world.start;
    let mut warm: Option<Vec<ControlInput>> = None;
    let mut cloud_ref: Option<(Vec<Point2>, f64)> = None;
    let mut trace = Vec::new();
    let ticks = (cfg.timeout / cfg.control_dt).round() as usize;
    let (mut collided, mut captured) = (false, false);
    for tick in 0..=ticks {
        let t = tick as f64 * cfg.control_dt;
        let pos = state.position();
        let min_clearance = clearance(pos, &world.obstacles, mpc.r_v);
        let lat_dev = distance_to_polyline(pos, &world.centerline);
        collided = min_clearance < 0.0;
        captured = pos.distance(world.goal) <= world.capture_radius;
        if collided || captured || tick == ticks {
            let last = trace.last().copied();
            trace.push(TraceRow {
                t,
                x: state.x,
                y: state.y,
                yaw: state.yaw,
                v_cmd: last.map_or(0.0, |r: TraceRow| r.v_cmd),
                omega_cmd: last.map_or(0.0, |r| r.omega_cmd),
                z: last.map_or(0, |r| r.z),
                min_clearance,
                lat_dev,
                solve_iters: 0,
            });
            break;
        }
        if cloud_ref.is_none() {
            // Close the reference at the world goal.
            cloud_ref = mailbox.as_mut().and_then(|m| m.poll(t)).and_then(|c| {
                c.path().map(|p| {
                    let mut line = p.to_vec();
                    if line.last().map_or(false, |q| q.distance(world.goal) > 1e-9) {
                        line.push(world.goal);
                    }
                    (line, c.speed)
                })
            });
        }
        let cloud = cloud_ref.as_ref().map(|(p, v)| (p.as_slice(), *v));
        // The delivered drive style sets the speed on either reference.
        let speed = cloud.map_or(world.target_speed, |(_, v)| v);
        let local = reference_along(&world.centerline, pos, speed, mpc);
        // The A* baseline has no switching: its path is tracked as soon as it arrives.
        let z = match scheme {
            Scheme::AstarMpc => cloud.is_some(),
            _ => policy.update(&state, &local, &world.obstacles, cloud.is_some(), mpc),
        };
        let s_star = match (z, cloud) {
            (true, Some((path, _))) => reference_along(path, pos, speed, mpc),
            _ => local,
        };
        let sol = solve_mpc(&state, &s_star, &world.obstacles, mpc, warm.as_deref()).expect("validated controller config");
        warm = Some(sol.shifted_inputs());
        trace.push(TraceRow {
            t,
            x: state.x,
            y: state.y,
            yaw: state.yaw,
            v_cmd: sol.input.v,
            omega_cmd: sol.input.omega,
            z: z as u8,
            min_clearance,
            lat_dev,
            solve_iters: sol.iterations,
        });
        state = crate::control::step_dynamics(&state, &sol.input, cfg.control_dt);
    }
    let metrics = compute_metrics(&trace, &world.centerline, world.goal, world.capture_radius);
    let cloud = mailbox.and_then(|mut m| {
        m.poll(f64::INFINITY);
        m.delivered
    });
    Ok(RunOutput {
        scenario: scn.name().to_string(),
        scheme,
        seed: scn.seed,
        trace,
        metrics,
        cloud,
        world,
        collided,
        timed_out: !captured && !collided,
    })
}
