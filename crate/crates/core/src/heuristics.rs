//! Robot-space heuristics, all converted to time lower bounds by dividing
//! by the top lattice speed: straight-line distance, shortest Dubins path
//! with free final heading, and an 8-connected grid Dijkstra field.

use std::collections::BinaryHeap;
use std::f64::consts::TAU;

use crate::lattice::{LatticeConfig, RobotState};
use crate::map::{CellIndex, CoverageMap};

/// Straight-line time lower bound.
pub fn h_euclidean(s: &RobotState, goal: (f64, f64), v_max: f64) -> f64 {
    (s.x - goal.0).hypot(s.y - goal.1) / v_max
}

pub mod dubins {
    //! Closed-form Dubins shortest paths over the six canonical words.
    //! Lengths are normalized by the turn radius inside the word formulas
    //! and scaled back on return.

    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum Word {
        Lsl,
        Rsr,
        Lsr,
        Rsl,
        Rlr,
        Lrl,
    }

    pub const WORDS: [Word; 6] = [Word::Lsl, Word::Rsr, Word::Lsr, Word::Rsl, Word::Rlr, Word::Lrl];

    #[derive(Debug, Clone, Copy)]
    pub struct DubinsPath {
        pub word: Word,
        /// Normalized segment lengths (arc angles and straight length / rho).
        pub params: [f64; 3],
        pub rho: f64,
    }

    impl DubinsPath {
        pub fn length(&self) -> f64 {
            (self.params[0] + self.params[1] + self.params[2]) * self.rho
        }
    }

    fn mod2pi(theta: f64) -> f64 {
        theta.rem_euclid(std::f64::consts::TAU)
    }

    struct Inter {
        alpha: f64,
        beta: f64,
        d: f64,
        sa: f64,
        sb: f64,
        ca: f64,
        cb: f64,
        c_ab: f64,
        d_sq: f64,
    }

    impl Inter {
        fn new(q0: (f64, f64, f64), q1: (f64, f64, f64), rho: f64) -> Self {
            let dx = q1.0 - q0.0;
            let dy = q1.1 - q0.1;
            let d = dx.hypot(dy) / rho;
            let theta = mod2pi(dy.atan2(dx));
            let alpha = mod2pi(q0.2 - theta);
            let beta = mod2pi(q1.2 - theta);
            Inter {
                alpha,
                beta,
                d,
                sa: alpha.sin(),
                sb: beta.sin(),
                ca: alpha.cos(),
                cb: beta.cos(),
                c_ab: (alpha - beta).cos(),
                d_sq: d * d,
            }
        }

        fn word(&self, w: Word) -> Option<[f64; 3]> {
            match w {
                Word::Lsl => {
                    let p_sq = 2.0 * self.d * (self.sa - self.sb) + 2.0 + self.d_sq - 2.0 * self.c_ab;
                    if p_sq < 0.0 {
                        return None;
                    }
                    let tmp = (self.cb - self.ca).atan2(self.d + self.sa - self.sb);
                    Some([mod2pi(tmp - self.alpha), p_sq.sqrt(), mod2pi(self.beta - tmp)])
                }
                Word::Rsr => {
                    let p_sq = 2.0 * self.d * (self.sb - self.sa) + 2.0 + self.d_sq - 2.0 * self.c_ab;
                    if p_sq < 0.0 {
                        return None;
                    }
                    let tmp = (self.ca - self.cb).atan2(self.d - self.sa + self.sb);
                    Some([mod2pi(self.alpha - tmp), p_sq.sqrt(), mod2pi(tmp - self.beta)])
                }
                Word::Lsr => {
                    let p_sq = 2.0 * self.d * (self.sa + self.sb) + 2.0 * self.c_ab - 2.0 + self.d_sq;
                    if p_sq < 0.0 {
                        return None;
                    }
                    let p = p_sq.sqrt();
                    let tmp =
                        (-self.ca - self.cb).atan2(self.d + self.sa + self.sb) - (-2.0f64).atan2(p);
                    Some([mod2pi(tmp - self.alpha), p, mod2pi(tmp - mod2pi(self.beta))])
                }
                Word::Rsl => {
                    let p_sq = 2.0 * self.c_ab - 2.0 + self.d_sq - 2.0 * self.d * (self.sa + self.sb);
                    if p_sq < 0.0 {
                        return None;
                    }
                    let p = p_sq.sqrt();
                    let tmp = (self.ca + self.cb).atan2(self.d - self.sa - self.sb) - 2.0f64.atan2(p);
                    Some([mod2pi(self.alpha - tmp), p, mod2pi(self.beta - tmp)])
                }
                Word::Rlr => {
                    let tmp =
                        (2.0 * self.d * (self.sa - self.sb) + 2.0 * self.c_ab + 6.0 - self.d_sq) / 8.0;
                    if tmp.abs() > 1.0 {
                        return None;
                    }
                    let p = mod2pi(std::f64::consts::TAU - tmp.acos());
                    let phi = (self.ca - self.cb).atan2(self.d - self.sa + self.sb);
                    let t = mod2pi(self.alpha - phi + mod2pi(p / 2.0));
                    Some([t, p, mod2pi(self.alpha - self.beta - t + mod2pi(p))])
                }
                Word::Lrl => {
                    let tmp =
                        (2.0 * self.d * (self.sb - self.sa) + 2.0 * self.c_ab + 6.0 - self.d_sq) / 8.0;
                    if tmp.abs() > 1.0 {
                        return None;
                    }
                    let p = mod2pi(std::f64::consts::TAU - tmp.acos());
                    let phi = (self.ca - self.cb).atan2(self.d + self.sa - self.sb);
                    let t = mod2pi(-self.alpha - phi + p / 2.0);
                    Some([t, p, mod2pi(mod2pi(self.beta) - self.alpha - t + mod2pi(p))])
                }
            }
        }
    }

    /// Shortest Dubins path between two oriented poses, or `None` when no
    /// word admits a solution (cannot happen for distinct poses, kept for
    /// robustness).
    pub fn shortest_path(q0: (f64, f64, f64), q1: (f64, f64, f64), rho: f64) -> Option<DubinsPath> {
        assert!(rho > 0.0);
        let inter = Inter::new(q0, q1, rho);
        let mut best: Option<DubinsPath> = None;
        for w in WORDS {
            if let Some(params) = inter.word(w) {
                let candidate = DubinsPath { word: w, params, rho };
                if best.as_ref().is_none_or(|b| candidate.length() < b.length()) {
                    best = Some(candidate);
                }
            }
        }
        best
    }

    #[derive(Debug, Clone, Copy)]
    pub enum Segment {
        Left,
        Straight,
        Right,
    }

    pub fn segments(word: Word) -> [Segment; 3] {
        use Segment::*;
        match word {
            Word::Lsl => [Left, Straight, Left],
            Word::Rsr => [Right, Straight, Right],
            Word::Lsr => [Left, Straight, Right],
            Word::Rsl => [Right, Straight, Left],
            Word::Rlr => [Right, Left, Right],
            Word::Lrl => [Left, Right, Left],
        }
    }

    /// Walks a path's three segments by explicit arc construction and returns
    /// the end pose; the geometric check for the closed-form words.
    pub fn end_pose(path: &DubinsPath, q0: (f64, f64, f64)) -> (f64, f64, f64) {
        let rho = path.rho;
        let (mut x, mut y, mut th) = q0;
        for (seg, &param) in segments(path.word).iter().zip(path.params.iter()) {
            match seg {
                Segment::Straight => {
                    x += rho * param * th.cos();
                    y += rho * param * th.sin();
                }
                Segment::Left => {
                    let cx = x - rho * th.sin();
                    let cy = y + rho * th.cos();
                    let a = th - std::f64::consts::FRAC_PI_2 + param;
                    x = cx + rho * a.cos();
                    y = cy + rho * a.sin();
                    th += param;
                }
                Segment::Right => {
                    let cx = x + rho * th.sin();
                    let cy = y - rho * th.cos();
                    let a = th + std::f64::consts::FRAC_PI_2 - param;
                    x = cx + rho * a.cos();
                    y = cy + rho * a.sin();
                    th -= param;
                }
            }
        }
        (x, y, th)
    }
}

/// Shortest Dubins time to the goal position with free final heading
/// (minimum over sampled final headings of the closed-form length).
pub fn h_dubins(s: &RobotState, goal: (f64, f64), cfg: &LatticeConfig, r_min: f64) -> f64 {
    let q0 = (s.x, s.y, s.theta(cfg));
    let n = 16;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let heading = k as f64 * TAU / n as f64;
        if let Some(p) = dubins::shortest_path(q0, (goal.0, goal.1, heading), r_min) {
            best = best.min(p.length());
        }
    }
    best / cfg.v_max()
}

/// Backward grid Dijkstra from the goal cell over the 8-connected grid,
/// in meters.
#[derive(Debug, Clone)]
pub struct DijkstraField {
    width: usize,
    height: usize,
    cell_size: f64,
    dist: Vec<f64>,
}

impl DijkstraField {
    pub fn compute(map: &CoverageMap, goal: CellIndex) -> Self {
        let width = map.width();
        let height = map.height();
        let cs = map.cell_size();
        let mut dist = vec![f64::INFINITY; width * height];

        #[derive(PartialEq)]
        struct Entry(f64, usize);
        impl Eq for Entry {}
        impl Ord for Entry {
            fn cmp(&self, other: &Self) -> std::cmp::Ordering {
                other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Entry {
            fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
                Some(self.cmp(other))
            }
        }

        let start = goal.row as usize * width + goal.col as usize;
        dist[start] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Entry(0.0, start));
        while let Some(Entry(d, i)) = heap.pop() {
            if d > dist[i] {
                continue;
            }
            let row = (i / width) as i32;
            let col = (i % width) as i32;
            for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (nr, nc) = (row + dr, col + dc);
                    if nr < 0 || nc < 0 || nr >= height as i32 || nc >= width as i32 {
                        continue;
                    }
                    let j = nr as usize * width + nc as usize;
                    let step = if dr != 0 && dc != 0 {
                        std::f64::consts::SQRT_2 * cs
                    } else {
                        cs
                    };
                    let nd = d + step;
                    if nd < dist[j] {
                        dist[j] = nd;
                        heap.push(Entry(nd, j));
                    }
                }
            }
        }

        DijkstraField {
            width,
            height,
            cell_size: cs,
            dist,
        }
    }

    /// Grid distance of a cell to the goal, meters; infinity when unreached.
    pub fn distance(&self, c: CellIndex) -> f64 {
        if c.row < 0
            || c.col < 0
            || c.row as usize >= self.height
            || c.col as usize >= self.width
        {
            return f64::INFINITY;
        }
        self.dist[c.row as usize * self.width + c.col as usize]
    }

    pub fn distance_at(&self, x: f64, y: f64) -> f64 {
        let col = ((x / self.cell_size) as i32).min(self.width as i32 - 1).max(0);
        let row = ((y / self.cell_size) as i32).min(self.height as i32 - 1).max(0);
        self.distance(CellIndex::new(row, col))
    }
}

/// Grid-Dijkstra time bound for a robot state.
pub fn h_dijkstra(field: &DijkstraField, s: &RobotState, v_max: f64) -> f64 {
    field.distance_at(s.x, s.y) / v_max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::CellState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> LatticeConfig {
        LatticeConfig::default()
    }

    #[test]
    fn euclidean_basics() {
        let s = RobotState {
            x: 10.0,
            y: 10.0,
            theta_bin: 0,
            v_idx: 0,
            t: 0,
        };
        assert_eq!(h_euclidean(&s, (10.0, 10.0), 10.0), 0.0);
        assert_eq!(h_euclidean(&s, (50.0, 10.0), 10.0), 4.0);
    }

    #[test]
    fn dubins_straight_shot_degenerates() {
        // Goal straight ahead with matching heading: length equals distance.
        let p = dubins::shortest_path((0.0, 0.0, 0.0), (100.0, 0.0, 0.0), 20.0).unwrap();
        assert!((p.length() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn dubins_turnaround_lower_bound() {
        // Goal directly behind at a distance below the turn radius: any Dubins
        // path, over any final heading, is at least a half-circle long.
        let cfg = cfg();
        let s = RobotState {
            x: 50.0,
            y: 50.0,
            theta_bin: 0,
            v_idx: 0,
            t: 0,
        };
        let r = 20.0;
        let h = h_dubins(&s, (40.0, 50.0), &cfg, r);
        assert!(
            h >= std::f64::consts::PI * r / cfg.v_max() - 1e-9,
            "h = {h}"
        );
    }

    #[test]
    fn dubins_closed_forms_match_arc_reconstruction() {
        // Oracle: rebuild each word's three segments geometrically; the end
        // pose must land on the queried pose.
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..100 {
            let q0 = (
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(0.0..TAU),
            );
            let q1 = (
                rng.gen_range(-50.0..50.0),
                rng.gen_range(-50.0..50.0),
                rng.gen_range(0.0..TAU),
            );
            let rho = rng.gen_range(5.0..30.0);
            let path = dubins::shortest_path(q0, q1, rho).expect("no dubins path");
            let (x, y, th) = dubins::end_pose(&path, q0);
            let pos_err = (x - q1.0).hypot(y - q1.1);
            let th_err = (th - q1.2).rem_euclid(TAU);
            let th_err = th_err.min(TAU - th_err);
            assert!(
                pos_err < 1e-9 && th_err < 1e-9,
                "reconstruction off by {pos_err:.2e} m / {th_err:.2e} rad for {:?}",
                path.word
            );
        }
    }

    #[test]
    fn dubins_dominates_euclidean() {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let s = RobotState {
                x: rng.gen_range(0.0..100.0),
                y: rng.gen_range(0.0..100.0),
                theta_bin: rng.gen_range(0..16),
                v_idx: 0,
                t: 0,
            };
            let goal = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            assert!(h_dubins(&s, goal, &cfg, 20.0) >= h_euclidean(&s, goal, cfg.v_max()) - 1e-9);
        }
    }

    #[test]
    fn dijkstra_field_basics() {
        let map = CoverageMap::new(20, 20, 1.0, CellState::coverage(100, 0));
        let goal = CellIndex::new(10, 10);
        let field = DijkstraField::compute(&map, goal);
        assert_eq!(field.distance(goal), 0.0);

        // Open map: the field equals octile distance.
        for (c, _) in map.iter_cells() {
            let dr = (c.row - goal.row).abs() as f64;
            let dc = (c.col - goal.col).abs() as f64;
            let octile = dr.max(dc) - dr.min(dc) + std::f64::consts::SQRT_2 * dr.min(dc);
            assert!((field.distance(c) - octile).abs() < 1e-9);
        }
        assert!(field.distance(CellIndex::new(-1, 0)).is_infinite());
    }

    #[test]
    fn dijkstra_field_triangle_inequality() {
        // Exhaustive edge scan: field(a) <= field(b) + edge(a, b).
        let map = CoverageMap::new(15, 12, 1.0, CellState::coverage(100, 0));
        let field = DijkstraField::compute(&map, CellIndex::new(3, 11));
        for (c, _) in map.iter_cells() {
            for dr in -1i32..=1 {
                for dc in -1i32..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let n = CellIndex::new(c.row + dr, c.col + dc);
                    if !map.in_bounds(n) {
                        continue;
                    }
                    let step = if dr != 0 && dc != 0 {
                        std::f64::consts::SQRT_2
                    } else {
                        1.0
                    };
                    assert!(field.distance(c) <= field.distance(n) + step + 1e-9);
                }
            }
        }
    }

    #[test]
    fn euclidean_consistency_over_lattice_edges() {
        // |h(s) - h(s')| <= primitive duration for every lattice edge.
        let lib = crate::lattice::generate_primitives(&cfg()).unwrap();
        let map = CoverageMap::new(200, 200, 1.0, CellState::coverage(100, 0));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let goal = (150.0, 130.0);
        for _ in 0..100 {
            let s = RobotState {
                x: rng.gen_range(50.0f64..150.0).round() + 0.5,
                y: rng.gen_range(50.0f64..150.0).round() + 0.5,
                theta_bin: rng.gen_range(0..16),
                v_idx: rng.gen_range(0..3),
                t: 0,
            };
            let hs = h_euclidean(&s, goal, cfg().v_max());
            for (succ, idx) in crate::lattice::robot_successors(&s, &lib, &map) {
                let hsucc = h_euclidean(&succ, goal, cfg().v_max());
                let dur = crate::lattice::primitive_cost(lib.get(idx));
                assert!((hs - hsucc).abs() <= dur + 1e-9);
            }
        }
    }
}
