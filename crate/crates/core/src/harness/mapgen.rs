//! Decayed-map generation: start fresh, let the map decay while a single
//! fixed-sensor sweeper covers it in a boustrophedon pattern, and snapshot
//! at requested times. Snapshots taken later in the simulation carry more
//! intricate priority structure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::footprint::{footprint_cells, SensorGeometry};
use crate::map::{CellIndex, CellState, CoverageMap};

#[derive(Debug, Clone)]
pub struct MapGenParams {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    /// Uniform lifetime assigned to every coverage cell.
    pub lifetime: u32,
    /// Target fraction of cells labeled no-coverage, laid out in random
    /// rectangular patches.
    pub nc_fraction: f64,
    pub sim_minutes: u32,
    /// Simulation seconds at which to emit snapshots; 0 is the fresh map.
    pub snapshot_times: Vec<u64>,
    pub seed: u64,
    /// Sweeper ground speed, m/s.
    pub sweeper_speed: f64,
}

impl Default for MapGenParams {
    fn default() -> Self {
        MapGenParams {
            width: 100,
            height: 100,
            cell_size: 1.0,
            lifetime: 100,
            nc_fraction: 0.15,
            sim_minutes: 10,
            snapshot_times: vec![600],
            seed: 0,
            sweeper_speed: 5.0,
        }
    }
}

struct Sweeper {
    x: f64,
    row: usize,
    dir: f64,
    spacing: f64,
    n_rows: usize,
}

impl Sweeper {
    fn new(width_m: f64, height_m: f64, spacing: f64) -> Self {
        let n_rows = ((height_m / spacing).floor() as usize).max(1);
        let _ = width_m;
        Sweeper {
            x: 0.0,
            row: 0,
            dir: 1.0,
            spacing,
            n_rows,
        }
    }

    fn y(&self) -> f64 {
        (self.row as f64 + 0.5) * self.spacing
    }

    fn advance(&mut self, dist: f64, width_m: f64) {
        let mut left = dist;
        while left > 0.0 {
            let room = if self.dir > 0.0 { width_m - self.x } else { self.x };
            if left <= room {
                self.x += self.dir * left;
                break;
            }
            left -= room;
            self.x = if self.dir > 0.0 { width_m } else { 0.0 };
            self.dir = -self.dir;
            self.row = (self.row + 1) % self.n_rows;
        }
    }

    fn psi(&self) -> f64 {
        if self.dir > 0.0 {
            0.0
        } else {
            std::f64::consts::PI
        }
    }
}

/// Generates one map per snapshot time, clock set to the snapshot instant.
pub fn gen_decayed_map(
    params: &MapGenParams,
    geom: &SensorGeometry,
) -> Result<Vec<CoverageMap>> {
    if params.width < 2 || params.height < 2 || params.sim_minutes == 0 {
        return Err(Error::Config("degenerate map generation parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut map = CoverageMap::new(
        params.width,
        params.height,
        params.cell_size,
        CellState::coverage(params.lifetime, 0),
    );

    // Rectangular no-coverage patches until the target fraction is reached.
    let total = params.width * params.height;
    let target = (params.nc_fraction * total as f64) as usize;
    let mut nc = 0usize;
    while nc < target {
        let h = rng.gen_range(2..=(params.height / 4).max(2));
        let w = rng.gen_range(2..=(params.width / 4).max(2));
        let r0 = rng.gen_range(0..params.height.saturating_sub(h).max(1));
        let c0 = rng.gen_range(0..params.width.saturating_sub(w).max(1));
        for r in r0..(r0 + h).min(params.height) {
            for c in c0..(c0 + w).min(params.width) {
                let idx = CellIndex::new(r as i32, c as i32);
                if map.in_coverage_zone(idx)? {
                    map.set_cell(idx, CellState::no_coverage())?;
                    nc += 1;
                }
            }
        }
    }

    let mut snapshots = Vec::new();
    let mut wanted: Vec<u64> = params.snapshot_times.clone();
    wanted.sort_unstable();
    wanted.dedup();
    let mut next = wanted.iter().copied().peekable();

    if next.peek() == Some(&0) {
        snapshots.push(map.clone());
        next.next();
    }

    let mut sweeper = Sweeper::new(map.width_m(), map.height_m(), geom.rect_width.max(1.0));
    let end = params.sim_minutes as u64 * 60;
    for t in 1..=end {
        map.decay(1);
        sweeper.advance(params.sweeper_speed, map.width_m());
        let x = sweeper.x.clamp(0.0, map.width_m());
        let y = sweeper.y().clamp(0.0, map.height_m());
        let fp = footprint_cells(&map, x, y, sweeper.psi(), sweeper.psi(), geom)?;
        map.mark_covered(fp.cells);
        if next.peek() == Some(&t) {
            snapshots.push(map.clone());
            next.next();
        }
    }
    if next.peek().is_some() {
        return Err(Error::Config(format!(
            "snapshot time {} beyond simulation end {end}",
            next.peek().unwrap()
        )));
    }
    Ok(snapshots)
}
