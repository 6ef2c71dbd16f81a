//! Trajectory evaluation: distinct coverage cells touched, the sum of their
//! priorities read at each cell's first coverage instant (decay applied up
//! to that instant), and the average.

use std::collections::HashSet;

use crate::map::{CellIndex, CoverageMap};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Distinct coverage-zone cells covered by the union of footprints.
    pub n: u64,
    /// Sum of priorities at first coverage.
    pub sum_p: i64,
    /// `sum_p / n`; undefined when nothing was covered.
    pub p_bar: Option<f64>,
}

pub fn evaluate(traj: &Trajectory, map_at_plan_time: &CoverageMap) -> Evaluation {
    let clock = map_at_plan_time.clock();
    let mut seen: HashSet<CellIndex> = HashSet::new();
    let mut sum_p = 0i64;
    for step in &traj.steps {
        debug_assert!(step.t >= clock, "trajectory predates the map snapshot");
        let age_extra = (step.t - clock) as i64;
        for &c in &step.footprint {
            if map_at_plan_time.in_coverage_zone(c).unwrap_or(false) && seen.insert(c) {
                sum_p += map_at_plan_time.priority(c).unwrap() - age_extra;
            }
        }
    }
    let n = seen.len() as u64;
    Evaluation {
        n,
        sum_p,
        p_bar: (n > 0).then(|| sum_p as f64 / n as f64),
    }
}
