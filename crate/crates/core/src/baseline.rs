//! The joint-space baseline: multi-heuristic A* directly over robot x pan
//! states with a linear combination of motion and sensor coverage cost.
//! Expensive by construction; it exists as the comparison point for the
//! decoupled planners.

use std::time::{Duration, Instant};

use crate::config::PlannerConfig;
use crate::costs::{self, EdgeCostMode};
use crate::error::Result;
use crate::heuristics::{h_dijkstra, h_dubins, h_euclidean, DijkstraField};
use crate::lattice::{PrimitiveLibrary, RobotState};
use crate::map::{CellIndex, CoverageMap};
use crate::search::{mhastar, SearchLimits, SearchOutcome, SearchStats};
use crate::spaces::{joint_path_to_trajectory, JointContext, JointProblem, JointState};
use crate::splash::PlanOutcome;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub trajectory: Trajectory,
    pub stats: SearchStats,
    pub shift: f64,
    /// Solution cost as searched: per tick,
    /// `w_motion * 1 s + w_sensor * (coverage + shift)`.
    pub cost_shifted: f64,
}

/// Outcome of a budgeted joint-space search: found, exhausted, or cut off
/// by the timeout/expansion guard.
#[derive(Debug, Clone)]
pub enum BaselineResult {
    Found(BaselineOutcome),
    NoPath(SearchStats),
    Timeout(SearchStats),
}

pub fn plan_joint_baseline(
    start: RobotState,
    goal: CellIndex,
    psi0: u8,
    timeout: Duration,
    map: &CoverageMap,
    lib: &PrimitiveLibrary,
    cfg: &PlannerConfig,
) -> Result<BaselineResult> {
    let shift = costs::cost_shift(map, &cfg.geometry, &cfg.costs);
    let ctx = JointContext {
        lib,
        geom: &cfg.geometry,
        map,
        params: &cfg.costs,
        mode: EdgeCostMode::Baseline,
        shift,
        t_max: map.clock() + cfg.t_max,
        history: 0,
        pan_limits: None,
    };

    let v_max = cfg.lattice.v_max();
    let goal_pos = map.cell_center(goal);
    let field = DijkstraField::compute(map, goal);
    let w_motion = cfg.costs.w_motion;
    let r_min = cfg.dubins_r_min;
    let lattice = &cfg.lattice;

    // Sensor cost is shifted non-negative, so w_motion times a motion-time
    // lower bound under-estimates the combined objective: the anchor stays
    // admissible and consistent.
    let robot_of = |s: &JointState| RobotState {
        x: s.x,
        y: s.y,
        theta_bin: s.anchor.theta_bin,
        v_idx: s.anchor.v_idx,
        t: s.t,
    };
    let anchor = move |s: &JointState| w_motion * h_euclidean(&robot_of(s), goal_pos, v_max);
    let mut extras: Vec<crate::search::BoxedHeuristic<'_, JointState>> = vec![
        Box::new(move |s: &JointState| w_motion * h_dubins(&robot_of(s), goal_pos, lattice, r_min)),
        Box::new(move |s: &JointState| w_motion * h_dijkstra(&field, &robot_of(s), v_max)),
    ];

    let mut problem = JointProblem { ctx, goal };
    let limits = SearchLimits {
        deadline: Some(Instant::now() + timeout),
        max_expansions: (cfg.max_joint_expansions > 0).then_some(cfg.max_joint_expansions),
        batch: cfg.batch,
    };
    let start_state = JointState::at_lattice(start, psi0, lib);
    let outcome = mhastar(
        &mut problem,
        start_state,
        anchor,
        &mut extras,
        cfg.w1,
        cfg.w2,
        &limits,
    );

    Ok(match outcome {
        SearchOutcome::Found(r) => {
            let trajectory = joint_path_to_trajectory(&r.states, &r.edges, &problem.ctx)?;
            BaselineResult::Found(BaselineOutcome {
                trajectory,
                cost_shifted: r.cost,
                stats: r.stats,
                shift,
            })
        }
        SearchOutcome::Exhausted(stats) => BaselineResult::NoPath(stats),
        SearchOutcome::Interrupted(stats) => BaselineResult::Timeout(stats),
    })
}

impl BaselineResult {
    pub fn as_plan_outcome(self) -> PlanOutcome<BaselineOutcome> {
        match self {
            BaselineResult::Found(o) => PlanOutcome::Found(o),
            BaselineResult::NoPath(s) | BaselineResult::Timeout(s) => PlanOutcome::NoPath(s),
        }
    }
}
