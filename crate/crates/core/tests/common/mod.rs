//! Shared oracles and fixtures for the integration tests. Everything here
//! stays independent of the search machinery it checks: plain loops, BFS,
//! and a hand-rolled Dijkstra.

use std::collections::{BinaryHeap, HashMap, HashSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use pancover_core::costs::{self, CostParams, EdgeCostMode};
use pancover_core::footprint::SensorGeometry;
use pancover_core::lattice::{generate_primitives, PrimitiveLibrary, RobotState};
use pancover_core::map::{CellIndex, CellState, CoverageMap};
use pancover_core::spaces::{
    joint_state_key, joint_successors, FootprintCache, JointContext, JointKey, JointState,
    SensorPlanProblem,
};
use pancover_core::splash::replay_pan_cost;
use pancover_core::PlannerConfig;

/// Random decayed map: mixed lifetimes and ages, scattered no-coverage cells.
pub fn random_decayed_map(rng: &mut ChaCha8Rng, n: usize) -> CoverageMap {
    let mut map = CoverageMap::new(n, n, 1.0, CellState::coverage(100, 0));
    for (c, _) in map.clone().iter_cells() {
        if rng.gen_bool(0.15) {
            map.set_cell(c, CellState::no_coverage()).unwrap();
        } else {
            let l = rng.gen_range(40..160);
            let a = rng.gen_range(0..250);
            map.set_cell(c, CellState::coverage(l, a)).unwrap();
        }
    }
    map
}

/// Minimum pan-plan cost by enumerating every one-step-per-second pan
/// sequence.
pub fn brute_force_pan_optimum(
    problem: &SensorPlanProblem,
    map: &CoverageMap,
    geom: &SensorGeometry,
    params: &CostParams,
) -> f64 {
    let cache = FootprintCache::build(&problem.waypoints, geom, map).unwrap();
    let steps = problem.waypoints.len() - 1;
    let n = problem.n_psi as i32;
    let mut best = f64::INFINITY;
    for code in 0..3usize.pow(steps as u32) {
        let mut seq = vec![problem.psi0];
        let mut c = code;
        for _ in 0..steps {
            let d = (c % 3) as i32 - 1;
            c /= 3;
            let prev = *seq.last().unwrap() as i32;
            seq.push((prev + d).rem_euclid(n) as u8);
        }
        best = best.min(replay_pan_cost(problem, &cache, map, params, &seq));
    }
    best
}

/// Exact optimal motion time over the lattice by breadth-first layers: all
/// primitives share one duration, so depth equals cost.
pub fn robot_bfs_optimal_time(
    start: RobotState,
    goal: CellIndex,
    map: &CoverageMap,
    lib: &PrimitiveLibrary,
    max_depth: u32,
) -> Option<f64> {
    let key = |s: &RobotState| {
        (
            (s.x / lib.config.cell_size).floor() as i32,
            (s.y / lib.config.cell_size).floor() as i32,
            s.theta_bin,
            s.v_idx,
        )
    };
    if map.cell_of_point(start.x, start.y) == Some(goal) {
        return Some(0.0);
    }
    let mut seen: HashSet<(i32, i32, u8, u8)> = [key(&start)].into();
    let mut frontier = vec![start];
    for depth in 1..=max_depth {
        let mut next = Vec::new();
        for s in &frontier {
            for (succ, _) in pancover_core::lattice::robot_successors(s, lib, map) {
                if map.cell_of_point(succ.x, succ.y) == Some(goal) {
                    return Some(depth as f64 * lib.config.duration as f64);
                }
                if seen.insert(key(&succ)) {
                    next.push(succ);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            return None;
        }
    }
    None
}

/// Brute-force footprint: test every cell's corners and center against the
/// rotated rectangle via corner-anchored edge projections.
pub fn oracle_footprint(
    map: &CoverageMap,
    x: f64,
    y: f64,
    psi: f64,
    geom: &SensorGeometry,
) -> Vec<CellIndex> {
    let cx = x + geom.offset * psi.cos();
    let cy = y + geom.offset * psi.sin();
    let ex = (psi.cos(), psi.sin());
    let ey = (-psi.sin(), psi.cos());
    let corner = (
        cx - ex.0 * geom.rect_length / 2.0 - ey.0 * geom.rect_width / 2.0,
        cy - ex.1 * geom.rect_length / 2.0 - ey.1 * geom.rect_width / 2.0,
    );
    let inside = |px: f64, py: f64| {
        let du = (px - corner.0) * ex.0 + (py - corner.1) * ex.1;
        let dv = (px - corner.0) * ey.0 + (py - corner.1) * ey.1;
        (0.0..=geom.rect_length).contains(&du) && (0.0..=geom.rect_width).contains(&dv)
    };
    let cs = map.cell_size();
    let mut out = Vec::new();
    for row in 0..map.height() as i32 {
        for col in 0..map.width() as i32 {
            let x0 = col as f64 * cs;
            let y0 = row as f64 * cs;
            let pts = [
                (x0, y0),
                (x0 + cs, y0),
                (x0, y0 + cs),
                (x0 + cs, y0 + cs),
                (x0 + cs / 2.0, y0 + cs / 2.0),
            ];
            if pts.iter().any(|&(px, py)| inside(px, py)) {
                out.push(CellIndex::new(row, col));
            }
        }
    }
    out
}

/// 5x5 map, 4 headings, one speed level, 12 s horizon.
pub fn tiny_joint_fixture() -> (PlannerConfig, PrimitiveLibrary, CoverageMap) {
    let mut cfg = PlannerConfig::default();
    cfg.lattice.n_theta = 4;
    cfg.lattice.speeds = vec![1.0];
    cfg.lattice.turn_rate_max = 1.2;
    cfg.geometry.rect_length = 2.0;
    cfg.geometry.rect_width = 1.5;
    cfg.geometry.offset = 1.0;
    cfg.geometry.n_psi = 8;
    cfg.t_max = 12;
    let lib = generate_primitives(&cfg.lattice).unwrap();

    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(404);
    let mut map = CoverageMap::new(5, 5, 1.0, CellState::coverage(100, 0));
    for (c, _) in map.clone().iter_cells() {
        if rng.gen_bool(0.2) {
            map.set_cell(c, CellState::no_coverage()).unwrap();
        } else {
            map.set_cell(
                c,
                CellState::coverage(rng.gen_range(20..120), rng.gen_range(0..150)),
            )
            .unwrap();
        }
    }
    (cfg, lib, map)
}

/// Hand-rolled Dijkstra over the full joint graph under the refinement cost;
/// the oracle for refinement convergence.
pub fn exhaustive_joint_optimum(
    start: RobotState,
    goal: CellIndex,
    map: &CoverageMap,
    lib: &PrimitiveLibrary,
    cfg: &PlannerConfig,
) -> Option<f64> {
    let shift = costs::cost_shift(map, &cfg.geometry, &cfg.costs);
    let ctx = JointContext {
        lib,
        geom: &cfg.geometry,
        map,
        params: &cfg.costs,
        mode: EdgeCostMode::Refinement,
        shift,
        t_max: map.clock() + cfg.t_max,
        history: 0,
        pan_limits: None,
    };
    let cs = cfg.lattice.cell_size;
    let psi0 = 0;

    #[derive(PartialEq)]
    struct E(f64, JointKey);
    impl Eq for E {}
    impl Ord for E {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for E {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }

    let s0 = JointState::at_lattice(start, psi0, lib);
    let k0 = joint_state_key(&s0, cs);
    let mut dist: HashMap<JointKey, (f64, JointState)> = HashMap::new();
    dist.insert(k0.clone(), (0.0, s0));
    let mut heap = BinaryHeap::new();
    heap.push(E(0.0, k0));
    while let Some(E(d, key)) = heap.pop() {
        let (cur, state) = dist[&key].clone();
        if d > cur {
            continue;
        }
        if map.cell_of_point(state.x, state.y) == Some(goal) {
            return Some(d);
        }
        for (child, _, cost) in joint_successors(&state, &ctx) {
            let ck = joint_state_key(&child, cs);
            let nd = d + cost;
            if dist.get(&ck).map_or(true, |(old, _)| nd < *old) {
                dist.insert(ck.clone(), (nd, child));
                heap.push(E(nd, ck));
            }
        }
    }
    None
}
