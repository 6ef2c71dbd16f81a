//! Sensor footprint rasterization.
//!
//! The sensor is a pan-only camera whose ground projection is a fixed
//! rectangle offset from the robot along the pan direction. For a pose
//! `(x, y)` and pan angle `psi`, the footprint is the set of grid cells
//! touched by the rectangle of dimensions `rect_length x rect_width`
//! centered at `(x + offset cos psi, y + offset sin psi)` and rotated by
//! `psi`. A cell counts as touched when any of its four corners or its
//! center lies inside the closed rectangle; cells beyond the map border
//! are clipped away.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::map::{CellIndex, CoverageMap};

/// Fixed sensor geometry. `psi_step` divides the full circle into `n_psi`
/// equal pan bins; the pan rate allows one step per second.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorGeometry {
    /// Footprint extent along the pan direction, meters.
    pub rect_length: f64,
    /// Footprint extent across the pan direction, meters.
    pub rect_width: f64,
    /// Distance from the robot position to the footprint center, meters.
    pub offset: f64,
    /// Number of discrete pan angles (bins of `2*pi / n_psi`).
    pub n_psi: u32,
}

impl Default for SensorGeometry {
    fn default() -> Self {
        SensorGeometry {
            rect_length: 6.0,
            rect_width: 4.0,
            offset: 5.0,
            n_psi: 16,
        }
    }
}

impl SensorGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.rect_length <= 0.0 || self.rect_width <= 0.0 || self.offset < 0.0 {
            return Err(Error::Config(
                "sensor geometry lengths must be positive".into(),
            ));
        }
        if self.n_psi < 3 {
            return Err(Error::Config("need at least 3 pan bins".into()));
        }
        Ok(())
    }

    pub fn psi_step(&self) -> f64 {
        TAU / self.n_psi as f64
    }

    pub fn psi_angle(&self, bin: u8) -> f64 {
        bin as f64 * self.psi_step()
    }

    pub fn wrap_bin(&self, bin: i32) -> u8 {
        bin.rem_euclid(self.n_psi as i32) as u8
    }

    /// Nearest pan bin to an arbitrary angle.
    pub fn bin_of_angle(&self, angle: f64) -> u8 {
        let step = self.psi_step();
        self.wrap_bin((angle / step).round() as i32)
    }

    /// Coarse upper bound on the number of cells a footprint can cover.
    pub fn max_cells(&self, cell_size: f64) -> usize {
        let a = (self.rect_length / cell_size).ceil() as usize + 1;
        let b = (self.rect_width / cell_size).ceil() as usize + 1;
        a * b * 2
    }
}

/// Pose that generated a footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootprintPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub psi: f64,
}

/// A rasterized footprint: the covered cells, sorted, plus the pose that
/// produced them. Deterministic function of (pose, geometry, map bounds).
#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub cells: Vec<CellIndex>,
    pub pose: FootprintPose,
}

impl Footprint {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        self.cells.binary_search(&c).is_ok()
    }
}

/// The rotated rectangle in center-frame form.
struct RectFrame {
    cx: f64,
    cy: f64,
    cos_psi: f64,
    sin_psi: f64,
    half_len: f64,
    half_wid: f64,
}

impl RectFrame {
    #[inline]
    fn contains(&self, px: f64, py: f64) -> bool {
        let dx = px - self.cx;
        let dy = py - self.cy;
        let along = dx * self.cos_psi + dy * self.sin_psi;
        let across = -dx * self.sin_psi + dy * self.cos_psi;
        along.abs() <= self.half_len && across.abs() <= self.half_wid
    }
}

/// Rasterizes the footprint for robot position `(x, y)` and pan angle `psi`.
///
/// `theta` is part of the generating pose but does not alter the geometry:
/// `psi` is the sensor heading in the global frame. Errors if the robot
/// position itself is outside the map; footprint cells past the border are
/// clipped, not an error.
pub fn footprint_cells(
    map: &CoverageMap,
    x: f64,
    y: f64,
    theta: f64,
    psi: f64,
    geom: &SensorGeometry,
) -> Result<Footprint> {
    if !map.contains_point(x, y) {
        return Err(Error::PositionOutOfBounds { x, y });
    }
    let (cos_psi, sin_psi) = (psi.cos(), psi.sin());
    let rect = RectFrame {
        cx: x + geom.offset * cos_psi,
        cy: y + geom.offset * sin_psi,
        cos_psi,
        sin_psi,
        half_len: geom.rect_length / 2.0,
        half_wid: geom.rect_width / 2.0,
    };

    // Candidate window: bounding box of the rotated rectangle, padded by one
    // cell so no sampled corner can escape it.
    let reach_x = rect.half_len * cos_psi.abs() + rect.half_wid * sin_psi.abs();
    let reach_y = rect.half_len * sin_psi.abs() + rect.half_wid * cos_psi.abs();
    let cs = map.cell_size();
    let col_lo = (((rect.cx - reach_x) / cs).floor() as i32 - 1).max(0);
    let col_hi = (((rect.cx + reach_x) / cs).ceil() as i32 + 1).min(map.width() as i32 - 1);
    let row_lo = (((rect.cy - reach_y) / cs).floor() as i32 - 1).max(0);
    let row_hi = (((rect.cy + reach_y) / cs).ceil() as i32 + 1).min(map.height() as i32 - 1);

    let mut cells = Vec::new();
    for row in row_lo..=row_hi {
        for col in col_lo..=col_hi {
            let x0 = col as f64 * cs;
            let y0 = row as f64 * cs;
            let hit = rect.contains(x0, y0)
                || rect.contains(x0 + cs, y0)
                || rect.contains(x0, y0 + cs)
                || rect.contains(x0 + cs, y0 + cs)
                || rect.contains(x0 + cs / 2.0, y0 + cs / 2.0);
            if hit {
                cells.push(CellIndex::new(row, col));
            }
        }
    }
    cells.sort_unstable();

    Ok(Footprint {
        cells,
        pose: FootprintPose { x, y, theta, psi },
    })
}

/// Set intersection of two footprints' cell sets.
pub fn footprint_overlap(a: &Footprint, b: &Footprint) -> Vec<CellIndex> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.cells.len() && j < b.cells.len() {
        match a.cells[i].cmp(&b.cells[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a.cells[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;
    use crate::map::CellState;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn open_map(n: usize) -> CoverageMap {
        CoverageMap::new(n, n, 1.0, CellState::coverage(100, 0))
    }

    /// Independent oracle: loop over every map cell and test its corners and
    /// center with a corner-anchored edge-projection formula.
    fn oracle_cells(
        map: &CoverageMap,
        x: f64,
        y: f64,
        psi: f64,
        geom: &SensorGeometry,
    ) -> Vec<CellIndex> {
        let cx = x + geom.offset * psi.cos();
        let cy = y + geom.offset * psi.sin();
        // Rectangle corner and edge vectors.
        let ex = (psi.cos(), psi.sin());
        let ey = (-psi.sin(), psi.cos());
        let corner = (
            cx - ex.0 * geom.rect_length / 2.0 - ey.0 * geom.rect_width / 2.0,
            cy - ex.1 * geom.rect_length / 2.0 - ey.1 * geom.rect_width / 2.0,
        );
        let inside = |px: f64, py: f64| {
            let dx = px - corner.0;
            let dy = py - corner.1;
            let u = dx * ex.0 + dy * ex.1;
            let v = dx * ey.0 + dy * ey.1;
            (0.0..=geom.rect_length).contains(&u) && (0.0..=geom.rect_width).contains(&v)
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

    #[test]
    fn axis_aligned_block() {
        // A 2.5 x 1.5 rectangle centered mid-cell covers exactly a 3x2 block.
        let map = open_map(6);
        let geom = SensorGeometry {
            rect_length: 2.5,
            rect_width: 1.5,
            offset: 0.0,
            n_psi: 16,
        };
        let fp = footprint_cells(&map, 1.5, 1.0, 0.0, 0.0, &geom).unwrap();
        let mut expect = vec![];
        for row in 0..2 {
            for col in 0..3 {
                expect.push(CellIndex::new(row, col));
            }
        }
        assert_eq!(fp.cells, expect);
    }

    #[test]
    fn quarter_turn_preserves_cell_count() {
        let map = open_map(30);
        let geom = SensorGeometry::default();
        let a = footprint_cells(&map, 15.3, 15.3, 0.0, 0.0, &geom).unwrap();
        let b = footprint_cells(
            &map,
            15.3,
            15.3,
            0.0,
            std::f64::consts::FRAC_PI_2,
            &geom,
        )
        .unwrap();
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn rotated_footprint_matches_oracle() {
        let map = open_map(20);
        let geom = SensorGeometry::default();
        let psi = std::f64::consts::PI / 6.0;
        let fp = footprint_cells(&map, 8.2, 7.7, 0.0, psi, &geom).unwrap();
        assert_eq!(fp.cells, oracle_cells(&map, 8.2, 7.7, psi, &geom));
        assert!(!fp.is_empty());
    }

    #[test]
    fn randomized_poses_match_oracle() {
        let map = open_map(25);
        let geom = SensorGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = rng.gen_range(1.0..24.0);
            let y = rng.gen_range(1.0..24.0);
            let psi = rng.gen_range(0.0..TAU);
            let fp = footprint_cells(&map, x, y, 0.0, psi, &geom).unwrap();
            assert_eq!(
                fp.cells,
                oracle_cells(&map, x, y, psi, &geom),
                "mismatch at ({x}, {y}, {psi})"
            );
        }
    }

    #[test]
    fn cell_count_bounded() {
        let map = open_map(40);
        let geom = SensorGeometry::default();
        let bound = geom.max_cells(map.cell_size());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = rng.gen_range(10.0..30.0);
            let y = rng.gen_range(10.0..30.0);
            let psi = rng.gen_range(0.0..TAU);
            let fp = footprint_cells(&map, x, y, 0.0, psi, &geom).unwrap();
            assert!(fp.len() <= bound, "footprint {} > bound {}", fp.len(), bound);
        }
    }

    #[test]
    fn translation_equivariance() {
        let map = open_map(40);
        let geom = SensorGeometry::default();
        let psi = 0.7;
        let a = footprint_cells(&map, 12.3, 11.1, 0.0, psi, &geom).unwrap();
        let b = footprint_cells(&map, 12.3 + 4.0, 11.1 + 6.0, 0.0, psi, &geom).unwrap();
        let shifted: Vec<CellIndex> = a
            .cells
            .iter()
            .map(|c| CellIndex::new(c.row + 6, c.col + 4))
            .collect();
        assert_eq!(b.cells, shifted);
    }

    #[test]
    fn clipping_at_map_border() {
        let map = open_map(10);
        let geom = SensorGeometry::default();
        // Robot near the edge, sensor pointing off-map: footprint clipped, not an error.
        let fp = footprint_cells(&map, 9.5, 5.0, 0.0, 0.0, &geom).unwrap();
        assert!(fp.cells.iter().all(|c| map.in_bounds(*c)));
        // Robot itself off-map is an error.
        assert!(footprint_cells(&map, 10.5, 5.0, 0.0, 0.0, &geom).is_err());
    }

    #[test]
    fn overlap_is_set_intersection() {
        let map = open_map(20);
        let geom = SensorGeometry::default();
        let a = footprint_cells(&map, 8.0, 8.0, 0.0, 0.3, &geom).unwrap();
        let same = footprint_cells(&map, 8.0, 8.0, 0.0, 0.3, &geom).unwrap();
        assert_eq!(footprint_overlap(&a, &same), a.cells);

        let far = footprint_cells(&map, 8.0, 8.0, 0.0, 0.3 + std::f64::consts::PI, &geom).unwrap();
        assert!(footprint_overlap(&a, &far).is_empty());

        // Half-shifted rectangles: verify against a per-cell membership loop.
        let b = footprint_cells(&map, 10.0, 8.5, 0.0, 0.3, &geom).unwrap();
        let expect: Vec<CellIndex> = a
            .cells
            .iter()
            .copied()
            .filter(|c| b.cells.contains(c))
            .collect();
        assert_eq!(footprint_overlap(&a, &b), expect);
        assert!(!footprint_overlap(&a, &b).is_empty());
    }
}
