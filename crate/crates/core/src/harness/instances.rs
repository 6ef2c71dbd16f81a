//! Random start-goal instance generation, reproducible from a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::PlannerConfig;
use crate::lattice::RobotState;
use crate::map::{CellIndex, CoverageMap};

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: usize,
    pub map_idx: usize,
    pub start: RobotState,
    pub goal: CellIndex,
    pub psi0: u8,
}

#[derive(Debug)]
pub struct InstanceSet {
    pub maps: Vec<CoverageMap>,
    pub instances: Vec<Instance>,
    pub seed: u64,
}

/// Draws `pairs_per_map` start-goal pairs per map. Starts sit at cell
/// centers with a random heading and zero speed; the initial pan angle
/// looks where the robot is headed. Start and goal always differ and are
/// separated by at least `min_separation_m`.
pub fn generate_instances(
    maps: Vec<CoverageMap>,
    pairs_per_map: usize,
    seed: u64,
    min_separation_m: f64,
    cfg: &PlannerConfig,
) -> InstanceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::new();

    for (map_idx, map) in maps.iter().enumerate() {
        for _ in 0..pairs_per_map {
            let (start, goal) = loop {
                let s = CellIndex::new(
                    rng.gen_range(1..map.height() as i32 - 1),
                    rng.gen_range(1..map.width() as i32 - 1),
                );
                let g = CellIndex::new(
                    rng.gen_range(1..map.height() as i32 - 1),
                    rng.gen_range(1..map.width() as i32 - 1),
                );
                if s == g {
                    continue;
                }
                let (sx, sy) = map.cell_center(s);
                let (gx, gy) = map.cell_center(g);
                if (sx - gx).hypot(sy - gy) >= min_separation_m {
                    break (s, g);
                }
            };
            let theta_bin = rng.gen_range(0..cfg.lattice.n_theta) as u8;
            let (x, y) = map.cell_center(start);
            let psi0 = cfg
                .geometry
                .bin_of_angle(cfg.lattice.heading_angle(theta_bin));
            instances.push(Instance {
                id: instances.len(),
                map_idx,
                start: RobotState {
                    x,
                    y,
                    theta_bin,
                    v_idx: 0,
                    t: map.clock(),
                },
                goal,
                psi0,
            });
        }
    }

    InstanceSet {
        maps,
        instances,
        seed,
    }
}
