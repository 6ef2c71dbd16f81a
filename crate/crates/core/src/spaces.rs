//! Sensor and joint state spaces.
//!
//! The sensor space is a leveled DAG: each level is one waypoint of a fixed
//! robot trajectory, and a sensor state carries the current pan bin plus a
//! bounded history of the previous pan bins. Larger histories split states
//! that would otherwise merge, which is exactly what lets the search avoid
//! re-covering recently seen cells.
//!
//! The joint space couples lattice robot states with the pan angle. Joint
//! expansion is lazy per second: committing to a primitive happens at its
//! first 1 s tick, and the sensor picks one of three pan moves at every tick,
//! so a primitive contributes `duration` decision points instead of an
//! eagerly enumerated pan-sequence fan.

use std::collections::HashSet;

use crate::costs::{self, CostParams, EdgeCostMode};
use crate::error::{Error, Result};
use crate::footprint::{footprint_cells, Footprint, SensorGeometry};
use crate::lattice::{PrimitiveLibrary, RobotState, Waypoint};
use crate::map::{CellIndex, CoverageMap};

/// Sensor state: waypoint index, pan bin, and the last `H` pan bins (oldest
/// first, truncated near the trajectory start).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorState {
    pub level: u32,
    pub psi: u8,
    pub hist: Vec<u8>,
}

impl SensorState {
    pub fn initial(psi0: u8) -> Self {
        SensorState {
            level: 0,
            psi: psi0,
            hist: Vec::new(),
        }
    }
}

/// A sensor-planning instance: per-second waypoints of a fixed robot
/// trajectory, the initial pan bin, and the history size.
#[derive(Debug, Clone)]
pub struct SensorPlanProblem {
    pub waypoints: Vec<Waypoint>,
    pub psi0: u8,
    pub history_size: usize,
    pub n_psi: u32,
    /// Hard pan limits as an inclusive bin interval; `None` pans freely
    /// around the full circle.
    pub pan_limits: Option<(u8, u8)>,
}

impl SensorPlanProblem {
    pub fn last_level(&self) -> u32 {
        (self.waypoints.len() - 1) as u32
    }
}

/// Whether a pan bin falls inside the (inclusive, possibly wrapping)
/// limit interval.
pub fn pan_allowed(limits: Option<(u8, u8)>, bin: u8) -> bool {
    match limits {
        None => true,
        Some((lo, hi)) if lo <= hi => (lo..=hi).contains(&bin),
        Some((lo, hi)) => bin >= lo || bin <= hi,
    }
}

/// Duplicate-detection key for sensor states. Equality is exactly
/// `(level, psi, hist)`; the extra `dist0` field (circular distance from the
/// initial pan bin) only orders ties so that degenerate cost landscapes
/// resolve to the all-zero pan sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SensorKey {
    pub level: u32,
    dist0: u8,
    pub psi: u8,
    pub hist: Vec<u8>,
}

pub fn sensor_state_key(s: &SensorState, psi0: u8, n_psi: u32) -> SensorKey {
    let d = (s.psi as i32 - psi0 as i32).rem_euclid(n_psi as i32);
    let dist0 = d.min(n_psi as i32 - d) as u8;
    SensorKey {
        level: s.level,
        dist0,
        psi: s.psi,
        hist: s.hist.clone(),
    }
}

/// The three pan moves at the next waypoint: one step down, hold, one step
/// up (wrapping). Errors at the terminal level.
pub fn sensor_successors(s: &SensorState, problem: &SensorPlanProblem) -> Result<Vec<SensorState>> {
    if s.level >= problem.last_level() {
        return Err(Error::Invalid(format!(
            "sensor state at terminal level {} has no successors",
            s.level
        )));
    }
    let n = problem.n_psi as i32;
    let mut hist = s.hist.clone();
    hist.push(s.psi);
    while hist.len() > problem.history_size {
        hist.remove(0);
    }
    Ok([-1i32, 0, 1]
        .iter()
        .map(|d| (s.psi as i32 + d).rem_euclid(n) as u8)
        .filter(|&psi| pan_allowed(problem.pan_limits, psi))
        .map(|psi| SensorState {
            level: s.level + 1,
            psi,
            hist: hist.clone(),
        })
        .collect())
}

/// Footprints for every (waypoint, pan bin) pair, rasterized once per plan.
#[derive(Debug)]
pub struct FootprintCache {
    n_psi: u32,
    fps: Vec<Footprint>,
}

impl FootprintCache {
    pub fn build(
        waypoints: &[Waypoint],
        geom: &SensorGeometry,
        map: &CoverageMap,
    ) -> Result<Self> {
        let mut fps = Vec::with_capacity(waypoints.len() * geom.n_psi as usize);
        for wp in waypoints {
            for bin in 0..geom.n_psi as u8 {
                fps.push(footprint_cells(
                    map,
                    wp.x,
                    wp.y,
                    wp.theta,
                    geom.psi_angle(bin),
                    geom,
                )?);
            }
        }
        Ok(FootprintCache {
            n_psi: geom.n_psi,
            fps,
        })
    }

    pub fn get(&self, level: u32, psi: u8) -> &Footprint {
        &self.fps[level as usize * self.n_psi as usize + psi as usize]
    }
}

/// The cell set covered by the footprints recorded in a state's history:
/// history entry `k` pairs with the waypoint `level - |hist| + k`. This is
/// the set consumed by the history-aware coverage cost.
pub fn history_cells(s: &SensorState, cache: &FootprintCache) -> HashSet<CellIndex> {
    let mut out = HashSet::new();
    let n = s.hist.len() as u32;
    for (k, &psi) in s.hist.iter().enumerate() {
        let level = s.level - n + k as u32;
        out.extend(cache.get(level, psi).cells.iter().copied());
    }
    out
}

/// Joint robot-and-sensor state at a 1 s tick.
///
/// At primitive boundaries (`committed == None`) the state sits on the
/// lattice. Inside a primitive it carries the interpolated pose plus the
/// committed primitive and tick, which also distinguish it for duplicate
/// detection: merging mid-primitive states of different primitives would
/// splice inconsistent edge chains.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub t: u64,
    pub psi: u8,
    pub anchor: RobotState,
    pub committed: Option<(u16, u8)>,
    /// Poses and pan bins of the last `history` ticks; empty unless the
    /// joint-history hook is enabled.
    pub hist: Vec<JointHistEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointHistEntry {
    pub x: f64,
    pub y: f64,
    pub psi: u8,
}

impl JointState {
    pub fn at_lattice(robot: RobotState, psi: u8, lib: &PrimitiveLibrary) -> Self {
        JointState {
            x: robot.x,
            y: robot.y,
            theta: robot.theta(&lib.config),
            v: robot.speed(&lib.config),
            t: robot.t,
            psi,
            anchor: robot,
            committed: None,
            hist: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointKey {
    pub cell: (i32, i32),
    pub theta_bin: u8,
    pub v_idx: u8,
    pub t: u64,
    pub psi: u8,
    /// `u16::MAX` at lattice states.
    pub prim: u16,
    pub tick: u8,
    pub hist: Vec<(i32, i32, u8)>,
}

pub fn joint_state_key(s: &JointState, cell_size: f64) -> JointKey {
    let (prim, tick) = s.committed.map_or((u16::MAX, 0), |(p, k)| (p, k));
    JointKey {
        cell: (
            (s.anchor.x / cell_size).floor() as i32,
            (s.anchor.y / cell_size).floor() as i32,
        ),
        theta_bin: s.anchor.theta_bin,
        v_idx: s.anchor.v_idx,
        t: s.t,
        psi: s.psi,
        prim,
        tick,
        hist: s
            .hist
            .iter()
            .map(|h| {
                (
                    (h.x / cell_size).floor() as i32,
                    (h.y / cell_size).floor() as i32,
                    h.psi,
                )
            })
            .collect(),
    }
}

/// Shared read-only inputs for joint expansion.
pub struct JointContext<'a> {
    pub lib: &'a PrimitiveLibrary,
    pub geom: &'a SensorGeometry,
    pub map: &'a CoverageMap,
    pub params: &'a CostParams,
    pub mode: EdgeCostMode,
    /// Added to every tick's sensor cost before weighting, so queued edge
    /// costs are non-negative.
    pub shift: f64,
    /// States with `t > t_max` are pruned.
    pub t_max: u64,
    /// Sensor history inside the joint space; 0 (off) unless the
    /// experimental hook is enabled.
    pub history: usize,
    /// Hard pan limits as an inclusive bin interval; `None` pans freely.
    pub pan_limits: Option<(u8, u8)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointEdge {
    /// Set on the first tick of a primitive.
    pub prim_started: Option<u16>,
    pub psi: u8,
}

/// All (state, edge, queued-cost) successors of a joint state: the next 1 s
/// tick of the committed primitive, or the first tick of every applicable
/// primitive, crossed with the three pan moves.
pub fn joint_successors(
    s: &JointState,
    ctx: &JointContext<'_>,
) -> Vec<(JointState, JointEdge, f64)> {
    let mut out = Vec::new();
    if s.t + 1 > ctx.t_max {
        return out;
    }
    let cfg = &ctx.lib.config;

    // (primitive, tick, started) advances available from here.
    let mut advances: Vec<(u16, u8, bool)> = Vec::new();
    match s.committed {
        Some((p, k)) => advances.push((p, k + 1, false)),
        None => {
            for &idx in ctx.lib.applicable(s.anchor.theta_bin, s.anchor.v_idx) {
                let p = ctx.lib.get(idx);
                let in_bounds = p
                    .poses_1s
                    .iter()
                    .all(|pose| ctx.map.contains_point(s.anchor.x + pose.x, s.anchor.y + pose.y));
                if in_bounds {
                    advances.push((idx, 1, true));
                }
            }
        }
    }

    let mut hist = s.hist.clone();
    if ctx.history > 0 {
        hist.push(JointHistEntry {
            x: s.x,
            y: s.y,
            psi: s.psi,
        });
        while hist.len() > ctx.history {
            hist.remove(0);
        }
    }
    let hist_set: Option<HashSet<CellIndex>> = if ctx.history > 0 {
        let mut set = HashSet::new();
        for h in &hist {
            if let Ok(fp) =
                footprint_cells(ctx.map, h.x, h.y, 0.0, ctx.geom.psi_angle(h.psi), ctx.geom)
            {
                set.extend(fp.cells.iter().copied());
            }
        }
        Some(set)
    } else {
        None
    };

    for (prim_idx, tick, started) in advances {
        let p = ctx.lib.get(prim_idx);
        let pose = p.poses_1s[tick as usize - 1];
        let at_end = tick as u32 == p.duration;
        let (next_state_base, px, py) = if at_end {
            let anchor = RobotState {
                x: s.anchor.x + p.end_offset.0 as f64 * cfg.cell_size,
                y: s.anchor.y + p.end_offset.1 as f64 * cfg.cell_size,
                theta_bin: p.end_heading,
                v_idx: p.end_speed,
                t: s.anchor.t + p.duration as u64,
            };
            let (x, y) = (anchor.x, anchor.y);
            (
                JointState {
                    x,
                    y,
                    theta: cfg.heading_angle(p.end_heading),
                    v: cfg.speeds[p.end_speed as usize],
                    t: s.t + 1,
                    psi: 0,
                    anchor,
                    committed: None,
                    hist: hist.clone(),
                },
                x,
                y,
            )
        } else {
            let (x, y) = (s.anchor.x + pose.x, s.anchor.y + pose.y);
            (
                JointState {
                    x,
                    y,
                    theta: pose.theta,
                    v: pose.v,
                    t: s.t + 1,
                    psi: 0,
                    anchor: s.anchor,
                    committed: Some((prim_idx, tick)),
                    hist: hist.clone(),
                },
                x,
                y,
            )
        };

        for d in [-1i32, 0, 1] {
            let psi = ctx.geom.wrap_bin(s.psi as i32 + d);
            if !pan_allowed(ctx.pan_limits, psi) {
                continue;
            }
            let Ok(fp) = footprint_cells(ctx.map, px, py, next_state_base.theta, ctx.geom.psi_angle(psi), ctx.geom)
            else {
                continue;
            };
            let sensor_cost = match &hist_set {
                Some(set) => costs::cost_with_history(&fp, set, ctx.map, ctx.params),
                None => costs::cost_no_history(&fp, ctx.map, ctx.params),
            };
            let cost = costs::edge_cost_joint(sensor_cost + ctx.shift, 1.0, ctx.params, ctx.mode);
            let mut state = next_state_base.clone();
            state.psi = psi;
            out.push((
                state,
                JointEdge {
                    prim_started: started.then_some(prim_idx),
                    psi,
                },
                cost,
            ));
        }
    }
    out
}

/// Rebuilds a joint trajectory from a search result: footprints regenerate
/// from poses, primitives collect from the edges that started them, motion
/// cost is elapsed time, and the sensor cost is replayed unshifted.
pub fn joint_path_to_trajectory(
    states: &[JointState],
    edges: &[JointEdge],
    ctx: &JointContext<'_>,
) -> Result<crate::trajectory::Trajectory> {
    let mut steps = Vec::with_capacity(states.len());
    for s in states {
        let fp = footprint_cells(ctx.map, s.x, s.y, s.theta, ctx.geom.psi_angle(s.psi), ctx.geom)?;
        steps.push(crate::trajectory::TrajectoryStep {
            t: s.t,
            x: s.x,
            y: s.y,
            theta: s.theta,
            v: s.v,
            psi_bin: s.psi,
            footprint: fp.cells,
        });
    }
    let primitives: Vec<u16> = edges.iter().filter_map(|e| e.prim_started).collect();
    let motion_cost = match (states.first(), states.last()) {
        (Some(a), Some(b)) => (b.t - a.t) as f64,
        _ => 0.0,
    };
    let mut traj = crate::trajectory::Trajectory {
        steps,
        primitives,
        motion_cost,
        sensor_cost: 0.0,
    };
    traj.sensor_cost =
        traj.replay_sensor_cost_with_history(ctx.map, ctx.params, ctx.history);
    Ok(traj)
}

/// Re-derives the joint states along a planned trajectory by stepping the
/// successor function and matching each step's committed primitive and pan
/// bin. Using the same generator the searches use guarantees key-identical
/// states for tunnel seeding.
pub fn trajectory_to_joint_states(
    traj: &crate::trajectory::Trajectory,
    start: RobotState,
    psi0: u8,
    ctx: &JointContext<'_>,
) -> Result<Vec<JointState>> {
    let duration = ctx.lib.config.duration as usize;
    let mut states = vec![JointState::at_lattice(start, psi0, ctx.lib)];
    for (k, step) in traj.steps.iter().enumerate().skip(1) {
        let prim = traj.primitives[(k - 1) / duration];
        let current = states.last().unwrap();
        let next = joint_successors(current, ctx)
            .into_iter()
            .find(|(s, _, _)| {
                s.psi == step.psi_bin
                    && match s.committed {
                        Some((p, _)) => p == prim,
                        None => true,
                    }
            })
            .ok_or_else(|| {
                Error::Invalid(format!(
                    "trajectory step {k} is not reachable from its predecessor"
                ))
            })?;
        states.push(next.0);
    }
    Ok(states)
}

/// Joint-space search problem: reach the goal cell with any pan angle and
/// any timestamp within the horizon.
pub struct JointProblem<'a> {
    pub ctx: JointContext<'a>,
    pub goal: CellIndex,
}

impl<'a> crate::search::Problem for JointProblem<'a> {
    type State = JointState;
    type Key = JointKey;
    type Edge = JointEdge;

    fn key(&self, s: &JointState) -> JointKey {
        joint_state_key(s, self.ctx.lib.config.cell_size)
    }

    fn successors(&mut self, s: &JointState, out: &mut Vec<(JointState, JointEdge, f64)>) {
        out.extend(joint_successors(s, &self.ctx));
    }

    fn is_goal(&self, s: &JointState) -> bool {
        self.ctx.map.cell_of_point(s.x, s.y) == Some(self.goal)
    }
}
