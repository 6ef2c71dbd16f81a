//! Sensor coverage costs and the baseline's linear combination.
//!
//! A footprint's cost is the sum of priorities of the coverage cells it
//! touches plus a penalty `lambda * N_nc / |F|` for the fraction of
//! no-coverage cells. With a sensor history, cells already covered inside
//! the history window contribute their full lifetime instead of their
//! current priority, which makes re-covering them unattractive.
//!
//! Costs can be negative (priorities are unclamped), so searches shift
//! per-edge costs by a map-dependent constant before queuing them; see
//! [`cost_shift`].

use std::collections::HashSet;

use crate::footprint::{Footprint, SensorGeometry};
use crate::map::{CellIndex, CoverageMap, Zone};

/// Weights for the cost functions: `lambda` penalizes no-coverage cells,
/// `w_motion`/`w_sensor` combine motion and sensor cost for the joint-space
/// baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub lambda: f64,
    pub w_motion: f64,
    pub w_sensor: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            lambda: 100.0,
            w_motion: 1.0,
            w_sensor: 1.0,
        }
    }
}

/// Footprint cost ignoring sensor history. An empty (fully clipped)
/// footprint costs zero.
pub fn cost_no_history(fp: &Footprint, map: &CoverageMap, params: &CostParams) -> f64 {
    cost_with_history_impl(fp, None, map, params)
}

/// Footprint cost against a history cell set: cells inside `hist` take
/// their lifetime, the rest their current priority. Reduces exactly to
/// [`cost_no_history`] when `hist` is empty.
pub fn cost_with_history(
    fp: &Footprint,
    hist: &HashSet<CellIndex>,
    map: &CoverageMap,
    params: &CostParams,
) -> f64 {
    cost_with_history_impl(fp, Some(hist), map, params)
}

fn cost_with_history_impl(
    fp: &Footprint,
    hist: Option<&HashSet<CellIndex>>,
    map: &CoverageMap,
    params: &CostParams,
) -> f64 {
    if fp.is_empty() {
        return 0.0;
    }
    let mut criticality = 0i64;
    let mut n_nc = 0usize;
    for &c in &fp.cells {
        let cell = map.cell(c).expect("footprint cells are clipped in-bounds");
        match cell.zone {
            Zone::NoCoverage => n_nc += 1,
            Zone::Coverage => {
                let in_hist = hist.is_some_and(|h| h.contains(&c));
                criticality += if in_hist {
                    cell.lifetime as i64
                } else {
                    cell.priority()
                };
            }
        }
    }
    criticality as f64 + params.lambda * n_nc as f64 / fp.len() as f64
}

/// How a joint-space edge prices its tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeCostMode {
    /// Sensor coverage cost only (the refinement objective).
    Refinement,
    /// `w_motion * motion_secs + w_sensor * sensor_cost` (the baseline).
    Baseline,
}

/// Combines a tick's already-computed sensor cost with its motion-time
/// share. In refinement mode the primitive contributes nothing.
pub fn edge_cost_joint(
    sensor_cost: f64,
    motion_secs: f64,
    params: &CostParams,
    mode: EdgeCostMode,
) -> f64 {
    match mode {
        EdgeCostMode::Refinement => sensor_cost,
        EdgeCostMode::Baseline => params.w_motion * motion_secs + params.w_sensor * sensor_cost,
    }
}

/// Constant added to every per-tick sensor cost before it enters a search
/// queue, making edge weights non-negative: `|F|_max * |p_min| + lambda`.
///
/// On the leveled sensor graph all paths have equal length, so the shift is
/// exactly optimality-preserving. In joint searches paths vary in length and
/// the shift acts as a per-tick time regularizer; the constant is reported
/// alongside results.
pub fn cost_shift(map: &CoverageMap, geom: &SensorGeometry, params: &CostParams) -> f64 {
    let f_max = geom.max_cells(map.cell_size()) as f64;
    f_max * map.min_priority().abs() as f64 + params.lambda
}
