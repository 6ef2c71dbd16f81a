//! Decoupled planning: a fast suboptimal robot trajectory by multi-heuristic
//! A* over the lattice, then a cost-optimal pan sequence for that fixed
//! trajectory by uninformed A* over the history-augmented sensor graph, then
//! concatenation into a joint trajectory.

use std::collections::HashSet;
use std::time::Instant;

use crate::config::PlannerConfig;
use crate::costs::{self, CostParams};
use crate::error::{Error, Result};
use crate::footprint::{footprint_cells, SensorGeometry};
use crate::heuristics::{h_dijkstra, h_dubins, h_euclidean, DijkstraField};
use crate::lattice::{
    primitive_cost, robot_successors_filtered, waypoints_1s, PrimitiveLibrary, RobotState, Waypoint,
};
use crate::map::{CellIndex, CoverageMap};
use crate::search::{astar, mhastar, Problem, SearchLimits, SearchOutcome, SearchStats};
use crate::spaces::{
    history_cells, sensor_state_key, sensor_successors, FootprintCache, SensorKey,
    SensorPlanProblem, SensorState,
};
use crate::trajectory::{Trajectory, TrajectoryStep};

/// A planner either finds a result or reports an exhausted/interrupted
/// search; both carry the search statistics.
#[derive(Debug, Clone)]
pub enum PlanOutcome<T> {
    Found(T),
    NoPath(SearchStats),
}

impl<T> PlanOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            PlanOutcome::Found(t) => Some(t),
            PlanOutcome::NoPath(_) => None,
        }
    }
}

/// Robot trajectory from the lattice search: lattice states, the primitive
/// chain, and the 1 s waypoint schedule (start pose first).
#[derive(Debug, Clone)]
pub struct RobotPath {
    pub states: Vec<RobotState>,
    pub primitives: Vec<u16>,
    pub waypoints: Vec<Waypoint>,
    pub motion_cost: f64,
    pub stats: SearchStats,
}

struct RobotProblem<'a> {
    lib: &'a PrimitiveLibrary,
    map: &'a CoverageMap,
    goal: CellIndex,
    t_max: u64,
}

impl<'a> Problem for RobotProblem<'a> {
    type State = RobotState;
    type Key = (i32, i32, u8, u8, u64);
    type Edge = u16;

    fn key(&self, s: &RobotState) -> Self::Key {
        let cs = self.lib.config.cell_size;
        (
            (s.x / cs).floor() as i32,
            (s.y / cs).floor() as i32,
            s.theta_bin,
            s.v_idx,
            s.t,
        )
    }

    fn successors(&mut self, s: &RobotState, out: &mut Vec<(RobotState, u16, f64)>) {
        let t_max = self.t_max;
        for (succ, idx) in
            robot_successors_filtered(s, self.lib, self.map, |r| r.t <= t_max)
        {
            let cost = primitive_cost(self.lib.get(idx));
            out.push((succ, idx, cost));
        }
    }

    fn is_goal(&self, s: &RobotState) -> bool {
        self.map.cell_of_point(s.x, s.y) == Some(self.goal)
    }
}

/// Multi-heuristic A* over the robot lattice, minimizing motion time.
/// The Euclidean bound anchors the search (admissible since speeds never
/// exceed the top lattice level); Dubins and grid-Dijkstra guide the two
/// inadmissible queues.
pub fn plan_robot(
    start: RobotState,
    goal: CellIndex,
    map: &CoverageMap,
    lib: &PrimitiveLibrary,
    cfg: &PlannerConfig,
    limits: &SearchLimits,
) -> Result<PlanOutcome<RobotPath>> {
    if !map.in_bounds(goal) {
        return Err(Error::OutOfBounds {
            cell: goal,
            width: map.width(),
            height: map.height(),
        });
    }
    if !map.contains_point(start.x, start.y) {
        return Err(Error::PositionOutOfBounds {
            x: start.x,
            y: start.y,
        });
    }

    if map.cell_of_point(start.x, start.y) == Some(goal) {
        return Ok(PlanOutcome::Found(RobotPath {
            states: vec![start],
            primitives: vec![],
            waypoints: vec![Waypoint {
                x: start.x,
                y: start.y,
                theta: start.theta(&lib.config),
                v: start.speed(&lib.config),
                t: start.t,
            }],
            motion_cost: 0.0,
            stats: SearchStats::default(),
        }));
    }

    let lattice = &lib.config;
    let v_max = lattice.v_max();
    let goal_pos = map.cell_center(goal);
    let field = DijkstraField::compute(map, goal);
    let r_min = cfg.dubins_r_min;

    let mut problem = RobotProblem {
        lib,
        map,
        goal,
        t_max: map.clock() + cfg.t_max,
    };
    let anchor = |s: &RobotState| h_euclidean(s, goal_pos, v_max);
    let mut extras: Vec<crate::search::BoxedHeuristic<'_, RobotState>> = vec![
        Box::new(move |s: &RobotState| h_dubins(s, goal_pos, lattice, r_min)),
        Box::new(move |s: &RobotState| h_dijkstra(&field, s, v_max)),
    ];
    let outcome = mhastar(&mut problem, start, anchor, &mut extras, cfg.w1, cfg.w2, limits);

    let result = match outcome {
        SearchOutcome::Found(r) => r,
        SearchOutcome::Exhausted(stats) | SearchOutcome::Interrupted(stats) => {
            return Ok(PlanOutcome::NoPath(stats));
        }
    };

    let mut waypoints = vec![Waypoint {
        x: start.x,
        y: start.y,
        theta: start.theta(lattice),
        v: start.speed(lattice),
        t: start.t,
    }];
    for (k, &prim_idx) in result.edges.iter().enumerate() {
        let anchor_state = &result.states[k];
        waypoints.extend(waypoints_1s(lib.get(prim_idx), anchor_state, lattice)?);
    }

    Ok(PlanOutcome::Found(RobotPath {
        motion_cost: result.cost,
        states: result.states,
        primitives: result.edges,
        waypoints,
        stats: result.stats,
    }))
}

/// Optimal pan sequence for a fixed robot trajectory under the given
/// history size, plus its costs.
#[derive(Debug, Clone)]
pub struct SensorPlan {
    /// One pan bin per waypoint, starting with `psi0`.
    pub psi_seq: Vec<u8>,
    /// Accumulated history-aware coverage cost, unshifted.
    pub cost: f64,
    /// The same path's cost as queued (shift added per level).
    pub cost_shifted: f64,
    pub shift: f64,
    pub stats: SearchStats,
}

struct SensorSearch<'a> {
    problem: &'a SensorPlanProblem,
    cache: &'a FootprintCache,
    map: &'a CoverageMap,
    params: &'a CostParams,
    shift: f64,
    hist_scratch: HashSet<CellIndex>,
    hist_for: Option<SensorKey>,
}

impl<'a> Problem for SensorSearch<'a> {
    type State = SensorState;
    type Key = SensorKey;
    type Edge = u8;

    fn key(&self, s: &SensorState) -> SensorKey {
        sensor_state_key(s, self.problem.psi0, self.problem.n_psi)
    }

    fn successors(&mut self, s: &SensorState, out: &mut Vec<(SensorState, u8, f64)>) {
        if s.level >= self.problem.last_level() {
            return;
        }
        let succs = sensor_successors(s, self.problem).expect("non-terminal level");
        let Some(first) = succs.first() else {
            return;
        };
        // The successors share one history set; build it once.
        let key = sensor_state_key(first, self.problem.psi0, self.problem.n_psi);
        if self.hist_for.as_ref() != Some(&key) {
            self.hist_scratch = history_cells(&succs[0], self.cache);
            self.hist_for = Some(key);
        }
        for succ in succs {
            let fp = self.cache.get(succ.level, succ.psi);
            let cost =
                costs::cost_with_history(fp, &self.hist_scratch, self.map, self.params)
                    + self.shift;
            out.push((succ.clone(), succ.psi, cost));
        }
    }

    fn is_goal(&self, s: &SensorState) -> bool {
        s.level == self.problem.last_level()
    }
}

/// Uninformed A* over the leveled sensor graph from `(level 0, psi0)` to any
/// state at the last level. Because every path has exactly `L - 1` edges,
/// the constant shift keeps the argmin unchanged and the result is
/// cost-optimal for the given history size.
pub fn plan_sensor(
    problem: &SensorPlanProblem,
    map: &CoverageMap,
    geom: &SensorGeometry,
    params: &CostParams,
) -> Result<SensorPlan> {
    if problem.waypoints.is_empty() {
        return Err(Error::Invalid("sensor planning needs at least one waypoint".into()));
    }
    if geom.n_psi != problem.n_psi {
        return Err(Error::Config("pan bin count mismatch".into()));
    }
    if !crate::spaces::pan_allowed(problem.pan_limits, problem.psi0) {
        return Err(Error::Config(format!(
            "initial pan bin {} violates the pan limits",
            problem.psi0
        )));
    }
    let cache = FootprintCache::build(&problem.waypoints, geom, map)?;
    let shift = costs::cost_shift(map, geom, params);

    if problem.waypoints.len() == 1 {
        return Ok(SensorPlan {
            psi_seq: vec![problem.psi0],
            cost: 0.0,
            cost_shifted: 0.0,
            shift,
            stats: SearchStats::default(),
        });
    }

    let mut search = SensorSearch {
        problem,
        cache: &cache,
        map,
        params,
        shift,
        hist_scratch: HashSet::new(),
        hist_for: None,
    };
    let start = SensorState::initial(problem.psi0);
    let outcome = astar(&mut search, start, |_| 0.0, 1.0, &SearchLimits::none());
    let result = match outcome {
        SearchOutcome::Found(r) => r,
        // A leveled DAG always reaches its last level.
        _ => return Err(Error::Invalid("sensor graph unexpectedly exhausted".into())),
    };

    let psi_seq: Vec<u8> = result.states.iter().map(|s| s.psi).collect();
    let cost = replay_pan_cost(problem, &cache, map, params, &psi_seq);

    Ok(SensorPlan {
        psi_seq,
        cost,
        cost_shifted: result.cost,
        shift,
        stats: result.stats,
    })
}

/// Unshifted cost of a concrete pan sequence over the problem's waypoints;
/// also the brute-force oracle's scoring routine.
pub fn replay_pan_cost(
    problem: &SensorPlanProblem,
    cache: &FootprintCache,
    map: &CoverageMap,
    params: &CostParams,
    psi_seq: &[u8],
) -> f64 {
    let h = problem.history_size;
    let mut total = 0.0;
    for level in 1..psi_seq.len() {
        let lo = level.saturating_sub(h);
        let mut hist = HashSet::new();
        for (k, &psi) in psi_seq[lo..level].iter().enumerate() {
            hist.extend(cache.get((lo + k) as u32, psi).cells.iter().copied());
        }
        let fp = cache.get(level as u32, psi_seq[level]);
        total += costs::cost_with_history(fp, &hist, map, params);
    }
    total
}

/// A decoupled plan plus its per-stage timing and search statistics.
#[derive(Debug, Clone)]
pub struct SplashOutcome {
    pub trajectory: Trajectory,
    pub robot_stats: SearchStats,
    pub sensor_stats: SearchStats,
    pub shift: f64,
    pub sensor_cost_shifted: f64,
}

/// The decoupled planner: robot trajectory, then pan trajectory over it,
/// then concatenation.
pub fn splash(
    start: RobotState,
    goal: CellIndex,
    psi0: u8,
    history: usize,
    map: &CoverageMap,
    lib: &PrimitiveLibrary,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome<SplashOutcome>> {
    if history > cfg.h_max {
        return Err(Error::Config(format!(
            "history size {history} exceeds h_max {}",
            cfg.h_max
        )));
    }
    let robot_t0 = Instant::now();
    let robot_path = match plan_robot(start, goal, map, lib, cfg, &SearchLimits::none())? {
        PlanOutcome::Found(p) => p,
        PlanOutcome::NoPath(stats) => return Ok(PlanOutcome::NoPath(stats)),
    };
    let mut robot_stats = robot_path.stats.clone();
    robot_stats.wall = robot_t0.elapsed();

    let problem = SensorPlanProblem {
        waypoints: robot_path.waypoints.clone(),
        psi0,
        history_size: history,
        n_psi: cfg.geometry.n_psi,
        pan_limits: cfg.pan_limits,
    };
    let sensor_t0 = Instant::now();
    let plan = plan_sensor(&problem, map, &cfg.geometry, &cfg.costs)?;
    let mut sensor_stats = plan.stats.clone();
    sensor_stats.wall = sensor_t0.elapsed();

    let trajectory = assemble(&robot_path, &plan.psi_seq, plan.cost, map, &cfg.geometry)?;
    Ok(PlanOutcome::Found(SplashOutcome {
        trajectory,
        robot_stats,
        sensor_stats,
        shift: plan.shift,
        sensor_cost_shifted: plan.cost_shifted,
    }))
}

fn assemble(
    robot: &RobotPath,
    psi_seq: &[u8],
    sensor_cost: f64,
    map: &CoverageMap,
    geom: &SensorGeometry,
) -> Result<Trajectory> {
    debug_assert_eq!(robot.waypoints.len(), psi_seq.len());
    let mut steps = Vec::with_capacity(psi_seq.len());
    for (wp, &psi_bin) in robot.waypoints.iter().zip(psi_seq.iter()) {
        let fp = footprint_cells(map, wp.x, wp.y, wp.theta, geom.psi_angle(psi_bin), geom)?;
        steps.push(TrajectoryStep {
            t: wp.t,
            x: wp.x,
            y: wp.y,
            theta: wp.theta,
            v: wp.v,
            psi_bin,
            footprint: fp.cells,
        });
    }
    Ok(Trajectory {
        steps,
        primitives: robot.primitives.clone(),
        motion_cost: robot.motion_cost,
        sensor_cost,
    })
}
