//! Joint trajectories: the unit of evaluation.
//!
//! A trajectory is a time-ordered sequence of 1 s steps, each carrying the
//! robot pose, pan bin, and the footprint it generates, plus the committed
//! primitive sequence and the accumulated motion and sensor costs.

use std::fmt::Write as _;
use std::path::Path;

use crate::costs::{cost_no_history, CostParams};
use crate::error::{Error, Result};
use crate::footprint::{footprint_cells, SensorGeometry};
use crate::map::{CellIndex, CoverageMap};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    pub t: u64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub psi_bin: u8,
    pub footprint: Vec<CellIndex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    /// Committed primitive indices, in execution order.
    pub primitives: Vec<u16>,
    /// Seconds spent moving: last timestamp minus first.
    pub motion_cost: f64,
    /// Accumulated unshifted sensor coverage cost over steps 1..; the first
    /// step's footprint has no incoming edge and contributes nothing here.
    pub sensor_cost: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks every structural invariant: unit timestamp spacing, pan-rate
    /// feasibility, and footprints that regenerate identically from poses.
    pub fn validate(&self, map: &CoverageMap, geom: &SensorGeometry) -> Result<()> {
        for pair in self.steps.windows(2) {
            if pair[1].t != pair[0].t + 1 {
                return Err(Error::Invalid(format!(
                    "timestamps must increase by 1 s, got {} then {}",
                    pair[0].t, pair[1].t
                )));
            }
            let d = (pair[1].psi_bin as i32 - pair[0].psi_bin as i32)
                .rem_euclid(geom.n_psi as i32);
            if d.min(geom.n_psi as i32 - d) > 1 {
                return Err(Error::Invalid(format!(
                    "pan moved {} bins in one second at t = {}",
                    d.min(geom.n_psi as i32 - d),
                    pair[1].t
                )));
            }
        }
        for step in &self.steps {
            let fp = footprint_cells(
                map,
                step.x,
                step.y,
                step.theta,
                geom.psi_angle(step.psi_bin),
                geom,
            )?;
            if fp.cells != step.footprint {
                return Err(Error::Invalid(format!(
                    "footprint at t = {} does not regenerate from its pose",
                    step.t
                )));
            }
        }
        Ok(())
    }

    /// Re-evaluates the sensor cost over steps 1.. with the no-history cost;
    /// the replay check for zero-history plans.
    pub fn replay_sensor_cost(&self, map: &CoverageMap, params: &CostParams) -> f64 {
        self.replay_sensor_cost_with_history(map, params, 0)
    }

    /// Replay with a sliding window of the previous `history` footprints
    /// feeding the history-aware cost at each step.
    pub fn replay_sensor_cost_with_history(
        &self,
        map: &CoverageMap,
        params: &CostParams,
        history: usize,
    ) -> f64 {
        let mut total = 0.0;
        for (k, step) in self.steps.iter().enumerate().skip(1) {
            let fp = crate::footprint::Footprint {
                cells: step.footprint.clone(),
                pose: crate::footprint::FootprintPose {
                    x: step.x,
                    y: step.y,
                    theta: step.theta,
                    psi: 0.0,
                },
            };
            if history == 0 {
                total += cost_no_history(&fp, map, params);
            } else {
                let lo = k.saturating_sub(history);
                let hist: std::collections::HashSet<CellIndex> = self.steps[lo..k]
                    .iter()
                    .flat_map(|s| s.footprint.iter().copied())
                    .collect();
                total += crate::costs::cost_with_history(&fp, &hist, map, params);
            }
        }
        total
    }

    /// Serializes to the `traj v1` text format: a `step` line
    /// (`t x y theta v psi`) followed by an `fp` block per step.
    pub fn to_v1_string(&self, geom: &SensorGeometry) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "traj v1 {} {}", self.steps.len(), geom.n_psi);
        let _ = writeln!(out, "prims {}", join_nums(&self.primitives));
        let _ = writeln!(out, "cost motion {:.6} sensor {:.6}", self.motion_cost, self.sensor_cost);
        for s in &self.steps {
            let _ = writeln!(
                out,
                "step {} {:.9} {:.9} {:.9} {:.9} {:.9}",
                s.t,
                s.x,
                s.y,
                s.theta,
                s.v,
                geom.psi_angle(s.psi_bin)
            );
            let mut fp = String::new();
            for (i, c) in s.footprint.iter().enumerate() {
                if i > 0 {
                    fp.push(' ');
                }
                let _ = write!(fp, "{}:{}", c.row, c.col);
            }
            let _ = writeln!(out, "fp {} {}", s.footprint.len(), fp);
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>, geom: &SensorGeometry) -> Result<()> {
        std::fs::write(path, self.to_v1_string(geom))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, geom: &SensorGeometry) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string(), geom)
    }

    pub fn parse(text: &str, file: &str, geom: &SensorGeometry) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(file, 1, 1, "empty file"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        if toks.len() != 4 || toks[0] != "traj" {
            return Err(Error::parse(file, 1, 1, "expected `traj v1 <steps> <n_psi>`"));
        }
        if toks[1] != "v1" {
            return Err(Error::parse(file, 1, 2, format!("unknown version `{}`", toks[1])));
        }
        let n_steps: usize = toks[2]
            .parse()
            .map_err(|_| Error::parse(file, 1, 3, "bad step count"))?;
        let n_psi: u32 = toks[3]
            .parse()
            .map_err(|_| Error::parse(file, 1, 4, "bad psi bin count"))?;
        if n_psi != geom.n_psi {
            return Err(Error::parse(
                file,
                1,
                4,
                format!("file uses {} pan bins, geometry has {}", n_psi, geom.n_psi),
            ));
        }

        let (n, prim_line) = lines
            .next()
            .ok_or_else(|| Error::parse(file, 2, 1, "missing prims line"))?;
        let ptoks: Vec<&str> = prim_line.split_whitespace().collect();
        if ptoks.first() != Some(&"prims") {
            return Err(Error::parse(file, n + 1, 1, "expected `prims` line"));
        }
        let primitives: Vec<u16> = ptoks[1..]
            .iter()
            .map(|t| t.parse().map_err(|_| Error::parse(file, n + 1, 2, "bad primitive index")))
            .collect::<Result<_>>()?;

        let (n, cost_line) = lines
            .next()
            .ok_or_else(|| Error::parse(file, 3, 1, "missing cost line"))?;
        let ctoks: Vec<&str> = cost_line.split_whitespace().collect();
        if ctoks.len() != 5 || ctoks[0] != "cost" {
            return Err(Error::parse(file, n + 1, 1, "expected `cost motion <m> sensor <s>`"));
        }
        let motion_cost: f64 = ctoks[2]
            .parse()
            .map_err(|_| Error::parse(file, n + 1, 3, "bad motion cost"))?;
        let sensor_cost: f64 = ctoks[4]
            .parse()
            .map_err(|_| Error::parse(file, n + 1, 5, "bad sensor cost"))?;

        let mut steps = Vec::with_capacity(n_steps);
        for _ in 0..n_steps {
            let (n, step_line) = lines
                .next()
                .ok_or_else(|| Error::parse(file, 0, 1, "missing step line"))?;
            let st: Vec<&str> = step_line.split_whitespace().collect();
            if st.len() != 7 || st[0] != "step" {
                return Err(Error::parse(file, n + 1, 1, "expected `step t x y theta v psi`"));
            }
            let nums: Vec<f64> = st[1..]
                .iter()
                .map(|t| t.parse().map_err(|_| Error::parse(file, n + 1, 2, "bad step field")))
                .collect::<Result<_>>()?;
            let (fn_, fp_line) = lines
                .next()
                .ok_or_else(|| Error::parse(file, n + 2, 1, "missing fp line"))?;
            let ft: Vec<&str> = fp_line.split_whitespace().collect();
            if ft.len() < 2 || ft[0] != "fp" {
                return Err(Error::parse(file, fn_ + 1, 1, "expected `fp <count> <cells>`"));
            }
            let count: usize = ft[1]
                .parse()
                .map_err(|_| Error::parse(file, fn_ + 1, 2, "bad footprint count"))?;
            if ft.len() != 2 + count {
                return Err(Error::parse(
                    file,
                    fn_ + 1,
                    2,
                    format!("footprint lists {} cells, declared {}", ft.len() - 2, count),
                ));
            }
            let footprint: Vec<CellIndex> = ft[2..]
                .iter()
                .map(|t| {
                    let (r, c) = t
                        .split_once(':')
                        .ok_or_else(|| Error::parse(file, fn_ + 1, 3, "bad cell token"))?;
                    Ok(CellIndex::new(
                        r.parse().map_err(|_| Error::parse(file, fn_ + 1, 3, "bad row"))?,
                        c.parse().map_err(|_| Error::parse(file, fn_ + 1, 3, "bad col"))?,
                    ))
                })
                .collect::<Result<_>>()?;
            steps.push(TrajectoryStep {
                t: nums[0] as u64,
                x: nums[1],
                y: nums[2],
                theta: nums[3],
                v: nums[4],
                psi_bin: geom.bin_of_angle(nums[5]),
                footprint,
            });
        }

        Ok(Trajectory {
            steps,
            primitives,
            motion_cost,
            sensor_cost,
        })
    }
}

fn join_nums(nums: &[u16]) -> String {
    nums.iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
