use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{semantic_step_cost, AlignmentCategory, Move, PlanError, SemanticCosts};
use crate::decision::Directive;
use crate::geometry::Point2;
use crate::worldmodel::{Cell, GridMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Consecutive forward moves that realize a `keep`.
    pub n_keep: u32,
    /// Lower clamp of every step increment.
    pub epsilon: f64,
    pub w_rep: f64,
    /// Influence distance of the repulsive field, in cells.
    pub d_infl_cells: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            n_keep: 2,
            epsilon: 0.01,
            w_rep: 2.0,
            d_infl_cells: 2.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.n_keep == 0 || !(self.epsilon > 0.0) || !(self.w_rep >= 0.0) || !(self.d_infl_cells > 0.0) {
            return Err(PlanError::InvalidConfig(*self));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SearchState {
    pub cell: Cell,
    pub prev_move: Move,
    pub directive_index: usize,
    pub keep_run: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEvent {
    pub trial_index: u32,
    pub category: AlignmentCategory,
    pub world_location: Point2,
    /// Infinite on an obstacle-free map, written as `null`.
    #[serde(with = "crate::geometry::serde_unbounded")]
    pub nearest_obstacle_distance: f64,
    /// Index of the directive pending when the step was taken.
    pub directive_index: usize,
    /// Position of the step along the path.
    pub step: usize,
}

/// Plan dump: everything downstream consumers need from one search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub success: bool,
    pub cells: Vec<Cell>,
    pub world_path: Vec<Point2>,
    pub moves: Vec<Move>,
    /// Accumulated cost at every path cell.
    pub g: Vec<f64>,
    pub events: Vec<PlanEvent>,
    pub requested: Vec<Directive>,
    pub realized: Vec<Directive>,
    pub total_cost: f64,
    pub expanded: usize,
}

impl PlanResult {
    pub fn count(&self, category: AlignmentCategory) -> usize {
        self.events.iter().filter(|e| e.category == category).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan result serializes")
    }
}

pub fn realized_sequence(result: &PlanResult) -> Vec<Directive> {
    result.realized.clone()
}

/// Repulsive potential of every cell, row-major.
fn repulsion(p: Point2, map: &GridMap, d_infl: f64, w_rep: f64) -> f64 {
    map.obstacles()
        .iter()
        .map(|o| w_rep * (1.0 - o.boundary_distance(p).max(0.0) / d_infl).max(0.0))
        .sum()
}

pub fn repulsive_field(map: &GridMap, cfg: &PlannerConfig) -> Vec<f64> {
    let d_infl = cfg.d_infl_cells * map.cell_size();
    let (w, h) = (map.width() as i32, map.height() as i32);
    let mut field = Vec::with_capacity((w * h) as usize);
    for j in 0..h {
        for i in 0..w {
            field.push(repulsion(map.cell_center(Cell::new(i, j)), map, d_infl, cfg.w_rep));
        }
    }
    field
}

fn octile(cell: Cell, goal: Cell) -> f64 {
    let di = (goal.i - cell.i).abs() as f64;
    let dj = (goal.j - cell.j).abs() as f64;
    di.max(dj) + (std::f64::consts::SQRT_2 - 1.0) * di.min(dj)
}

/// Octile distance to the goal plus the repulsive potential at `cell`.
pub fn heuristic(cell: Cell, goal: Cell, map: &GridMap, cfg: &PlannerConfig) -> f64 {
    let d_infl = cfg.d_infl_cells * map.cell_size();
    octile(cell, goal) + repulsion(map.cell_center(cell), map, d_infl, cfg.w_rep)
}

struct Indexer {
    w: usize,
    t1: usize,
    n_keep: usize,
}

impl Indexer {
    fn index(&self, s: &SearchState) -> usize {
        let cell = s.cell.j as usize * self.w + s.cell.i as usize;
        ((cell * 3 + s.prev_move.index()) * self.t1 + s.directive_index) * self.n_keep + s.keep_run as usize
    }
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    state: SearchState,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // Max-heap order: the entry that should pop first compares greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(self.state.directive_index.cmp(&other.state.directive_index))
            .then_with(|| {
                let a = (other.state.cell.i, other.state.cell.j, other.state.prev_move, other.state.keep_run);
                let b = (self.state.cell.i, self.state.cell.j, self.state.prev_move, self.state.keep_run);
                a.cmp(&b)
            })
    }
}

/// Most recent lateral directive among the first `k` of `directives`, for every k.
fn last_laterals(directives: &[Directive]) -> Vec<Option<Directive>> {
    let mut out = vec![None];
    let mut last = None;
    for d in directives {
        if d.is_lateral() {
            last = Some(*d);
        }
        out.push(last);
    }
    out
}

/// Semantic-guided best-first search over (cell, previous move, directive index, keep run).
///
/// The potential field is charged per departure cell in the path cost. The search ordering
/// subtracts the largest reward the remaining directives could still collect, so the combined
/// cost is minimized exactly. A search that cannot reach the goal with every directive realized
/// returns `success = false` with the best partial path.
pub fn plan(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    directives: &[Directive],
    costs: &SemanticCosts,
    cfg: &PlannerConfig,
) -> Result<PlanResult, PlanError> {
    cfg.validate()?;
    if !costs.as_array().iter().all(|v| v.is_finite()) {
        return Err(PlanError::InvalidCosts(*costs));
    }
    if map.is_blocked(start) {
        return Err(PlanError::BlockedStart(start));
    }
    if map.is_blocked(goal) {
        return Err(PlanError::BlockedGoal(goal));
    }
    let t = directives.len();
    let rep = repulsive_field(map, cfg);
    let w = map.width() as usize;
    let rep_at = |c: Cell| rep[c.j as usize * w + c.i as usize];
    let laterals = last_laterals(directives);
    let ix = Indexer {
        w,
        t1: t + 1,
        n_keep: cfg.n_keep as usize,
    };
    let n_states = w * map.height() as usize * 3 * (t + 1) * cfg.n_keep as usize;
    let mut best_g = vec![f64::INFINITY; n_states];
    let mut parent = vec![usize::MAX; n_states];
    let mut states: Vec<Option<SearchState>> = vec![None; n_states];
    let mut closed = vec![false; n_states];

    let reward_bound = (-costs.c_corr).max(0.0);
    let h_search = |s: &SearchState| {
        let remaining = (t - s.directive_index) as f64;
        (octile(s.cell, goal) + rep_at(s.cell) - remaining * reward_bound).max(0.0)
    };

    let s0 = SearchState {
        cell: start,
        prev_move: Move::F,
        directive_index: 0,
        keep_run: 0,
    };
    let i0 = ix.index(&s0);
    best_g[i0] = 0.0;
    states[i0] = Some(s0);
    let mut open = BinaryHeap::new();
    open.push(OpenEntry {
        f: h_search(&s0),
        g: 0.0,
        state: s0,
    });

    let mut expanded = 0usize;
    let mut found: Option<usize> = None;
    // Best partial so far: reached goal, then directives realized, then progress, then cheapest.
    let mut partial: Option<((bool, usize, i32), f64, usize)> = None;

    while let Some(OpenEntry { g, state, .. }) = open.pop() {
        let si = ix.index(&state);
        if closed[si] || g > best_g[si] {
            continue;
        }
        closed[si] = true;
        expanded += 1;
        let at_goal = state.cell == goal;
        if at_goal && state.directive_index == t {
            found = Some(si);
            break;
        }
        let key = (at_goal, state.directive_index, state.cell.i);
        let better_partial = match partial {
            None => true,
            Some((pkey, pg, _)) => key > pkey || (key == pkey && g < pg),
        };
        if better_partial {
            partial = Some((key, g, si));
        }
        if at_goal {
            continue;
        }
        for m in Move::ALL {
            let next = m.apply(state.cell);
            if map.is_blocked(next) || next.i > goal.i || (goal.j - next.j).abs() > goal.i - next.i {
                continue;
            }
            let k = state.directive_index;
            let sem = semantic_step_cost(
                state.prev_move,
                m,
                directives.get(k).copied(),
                laterals[k],
                costs,
                state.keep_run,
                cfg.n_keep,
            );
            let step = m.length() + rep_at(state.cell) + sem.cost;
            let ng = g + step.max(cfg.epsilon);
            let ns = SearchState {
                cell: next,
                prev_move: m,
                directive_index: k + usize::from(sem.completed),
                keep_run: sem.keep_run,
            };
            let ni = ix.index(&ns);
            if ng < best_g[ni] {
                best_g[ni] = ng;
                parent[ni] = si;
                states[ni] = Some(ns);
                closed[ni] = false;
                open.push(OpenEntry {
                    f: ng + h_search(&ns),
                    g: ng,
                    state: ns,
                });
            }
        }
    }

    let (success, end) = match (found, partial) {
        (Some(i), _) => (true, i),
        (None, Some((_, _, i))) => (false, i),
        (None, None) => unreachable!("the start state is always expanded"),
    };
    let mut chain = vec![end];
    while parent[*chain.last().unwrap()] != usize::MAX {
        chain.push(parent[*chain.last().unwrap()]);
    }
    chain.reverse();
    let path: Vec<SearchState> = chain.iter().map(|&i| states[i].expect("visited state")).collect();
    Ok(replay(map, &path, directives, costs, cfg, &rep, success, best_g[end], expanded))
}

#[allow(clippy::too_many_arguments)]
fn replay(
    map: &GridMap,
    path: &[SearchState],
    directives: &[Directive],
    costs: &SemanticCosts,
    cfg: &PlannerConfig,
    rep: &[f64],
    success: bool,
    total_cost: f64,
    expanded: usize,
) -> PlanResult {
    let laterals = last_laterals(directives);
    let w = map.width() as usize;
    let mut events = Vec::new();
    let mut moves = Vec::new();
    let mut g = vec![0.0];
    for (step, pair) in path.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let k = a.directive_index;
        let sem = semantic_step_cost(
            a.prev_move,
            b.prev_move,
            directives.get(k).copied(),
            laterals[k],
            costs,
            a.keep_run,
            cfg.n_keep,
        );
        moves.push(b.prev_move);
        let step_cost = b.prev_move.length() + rep[a.cell.j as usize * w + a.cell.i as usize] + sem.cost;
        g.push(g[step] + step_cost.max(cfg.epsilon));
        if sem.category != AlignmentCategory::Neutral {
            events.push(PlanEvent {
                trial_index: 0,
                category: sem.category,
                world_location: map.cell_center(b.cell),
                nearest_obstacle_distance: map.clearance(b.cell),
                directive_index: k,
                step,
            });
        }
    }
    let k_end = path.last().map_or(0, |s| s.directive_index);
    PlanResult {
        success,
        cells: path.iter().map(|s| s.cell).collect(),
        world_path: path.iter().map(|s| map.cell_center(s.cell)).collect(),
        moves,
        g,
        events,
        requested: directives.to_vec(),
        realized: directives[..k_end].to_vec(),
        total_cost,
        expanded,
    }
}

/// How a move sequence reads against a directive list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticAudit {
    pub realized: Vec<Directive>,
    pub wrong: usize,
    pub overact: usize,
}

impl SemanticAudit {
    /// Every directive realized with no contradicting or repeated lateral move.
    pub fn matches(&self, directives: &[Directive]) -> bool {
        self.realized == directives && self.wrong == 0 && self.overact == 0
    }
}

/// Replays `moves` through the alignment rules for `directives`.
pub fn audit_moves(moves: &[Move], directives: &[Directive], n_keep: u32) -> SemanticAudit {
    let laterals = last_laterals(directives);
    let (mut prev, mut k, mut run) = (Move::F, 0usize, 0u32);
    let (mut wrong, mut overact) = (0, 0);
    for &m in moves {
        let s = semantic_step_cost(prev, m, directives.get(k).copied(), laterals[k], &SemanticCosts::default(), run, n_keep);
        match s.category {
            AlignmentCategory::Wrong => wrong += 1,
            AlignmentCategory::Overact => overact += 1,
            _ => {}
        }
        k += usize::from(s.completed);
        run = s.keep_run;
        prev = m;
    }
    SemanticAudit {
        realized: directives[..k].to_vec(),
        wrong,
        overact,
    }
}
