//! Planner configuration: every tunable in one flat structure, with a
//! diffable `config v1` key=value file format. Unknown keys are rejected
//! and serialization is normalized (sorted keys), so a parsed config
//! round-trips to an identical file.

use std::fmt::Write as _;
use std::path::Path;

use crate::costs::CostParams;
use crate::error::{Error, Result};
use crate::footprint::SensorGeometry;
use crate::lattice::LatticeConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub lattice: LatticeConfig,
    pub geometry: SensorGeometry,
    pub costs: CostParams,
    /// MHA* anchor inflation.
    pub w1: f64,
    /// MHA* inadmissible-queue gate factor.
    pub w2: f64,
    /// Planning horizon: states past this timestamp are pruned, seconds.
    pub t_max: u64,
    /// Largest sensor history the planner accepts.
    pub h_max: usize,
    /// Dubins turn radius for the heuristic, meters.
    pub dubins_r_min: f64,
    /// Sensor history size inside joint-space refinement; experimental,
    /// 0 (off) by default.
    pub joint_history: usize,
    /// Require the refined path to end at the exact reference joint state
    /// instead of just the goal cell.
    pub strict_refine_goal: bool,
    /// Re-anchor tunnel levels on the incumbent instead of the initial path.
    pub reanchor_incumbent: bool,
    /// Refinement budget, seconds.
    pub split_timeout_s: f64,
    /// Joint-baseline budget, seconds.
    pub baseline_timeout_s: f64,
    /// Memory guard for joint-space searches (baseline and per tunnel
    /// iteration); 0 disables the cap.
    pub max_joint_expansions: u64,
    /// Budget check granularity, expansions.
    pub batch: u64,
    /// Hard pan limits as an inclusive bin interval, or `None` for a free
    /// full-circle pan.
    pub pan_limits: Option<(u8, u8)>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            lattice: LatticeConfig::default(),
            geometry: SensorGeometry::default(),
            costs: CostParams::default(),
            w1: 2.0,
            w2: 2.0,
            t_max: 300,
            h_max: 5,
            dubins_r_min: 20.0,
            joint_history: 0,
            strict_refine_goal: false,
            reanchor_incumbent: false,
            split_timeout_s: 30.0,
            baseline_timeout_s: 20.0,
            max_joint_expansions: 200_000,
            batch: 64,
            pan_limits: None,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        self.lattice.validate()?;
        self.geometry.validate()?;
        if self.costs.lambda < 0.0 {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        if self.costs.w_motion == 0.0 && self.costs.w_sensor == 0.0 {
            return Err(Error::Config("baseline weights must not both be zero".into()));
        }
        if self.w1 < 1.0 || self.w2 < 1.0 {
            return Err(Error::Config("w1 and w2 must be at least 1".into()));
        }
        if self.dubins_r_min <= 0.0 {
            return Err(Error::Config("dubins_r_min must be positive".into()));
        }
        Ok(())
    }

    pub fn to_v1_string(&self) -> String {
        let speeds = self
            .lattice
            .speeds
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        // Keys sorted; the normalized form.
        let entries: Vec<(&str, String)> = vec![
            ("accel_max", self.lattice.accel_max.to_string()),
            ("baseline_timeout_s", self.baseline_timeout_s.to_string()),
            ("batch", self.batch.to_string()),
            ("cell_size", self.lattice.cell_size.to_string()),
            ("dubins_r_min", self.dubins_r_min.to_string()),
            ("duration", self.lattice.duration.to_string()),
            ("h_max", self.h_max.to_string()),
            ("joint_history", self.joint_history.to_string()),
            ("lambda", self.costs.lambda.to_string()),
            ("max_joint_expansions", self.max_joint_expansions.to_string()),
            ("n_psi", self.geometry.n_psi.to_string()),
            (
                "pan_limits",
                self.pan_limits
                    .map_or("none".to_string(), |(lo, hi)| format!("{lo}:{hi}")),
            ),
            ("n_theta", self.lattice.n_theta.to_string()),
            ("reanchor_incumbent", self.reanchor_incumbent.to_string()),
            ("rect_length", self.geometry.rect_length.to_string()),
            ("rect_width", self.geometry.rect_width.to_string()),
            ("sensor_offset", self.geometry.offset.to_string()),
            ("snap_tol", self.lattice.snap_tol.to_string()),
            ("speeds", speeds),
            ("split_timeout_s", self.split_timeout_s.to_string()),
            ("strict_refine_goal", self.strict_refine_goal.to_string()),
            ("t_max", self.t_max.to_string()),
            ("turn_rate_max", self.lattice.turn_rate_max.to_string()),
            ("w1", self.w1.to_string()),
            ("w2", self.w2.to_string()),
            ("w_motion", self.costs.w_motion.to_string()),
            ("w_sensor", self.costs.w_sensor.to_string()),
        ];
        let mut out = String::from("config v1\n");
        for (k, v) in entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_v1_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(file, 1, 1, "empty config"))?;
        if header.trim() != "config v1" {
            return Err(Error::parse(file, 1, 1, "expected `config v1` header"));
        }

        let mut cfg = PlannerConfig::default();
        for (n, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(file, n + 1, 1, "expected `key=value`"))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.apply(key, value)
                .map_err(|msg| Error::parse(file, n + 1, 1, msg))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one key=value setting; shared by the file parser and CLI
    /// overrides.
    pub fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value `{value}` for `{key}`"))
        }
        match key {
            "accel_max" => self.lattice.accel_max = num(key, value)?,
            "baseline_timeout_s" => self.baseline_timeout_s = num(key, value)?,
            "batch" => self.batch = num(key, value)?,
            "cell_size" => self.lattice.cell_size = num(key, value)?,
            "dubins_r_min" => self.dubins_r_min = num(key, value)?,
            "duration" => self.lattice.duration = num(key, value)?,
            "h_max" => self.h_max = num(key, value)?,
            "joint_history" => self.joint_history = num(key, value)?,
            "lambda" => self.costs.lambda = num(key, value)?,
            "max_joint_expansions" => self.max_joint_expansions = num(key, value)?,
            "n_psi" => self.geometry.n_psi = num(key, value)?,
            "pan_limits" => {
                self.pan_limits = if value == "none" {
                    None
                } else {
                    let (lo, hi) = value
                        .split_once(':')
                        .ok_or_else(|| format!("pan_limits wants `lo:hi` or `none`, got `{value}`"))?;
                    Some((num("pan_limits", lo)?, num("pan_limits", hi)?))
                };
            }
            "n_theta" => self.lattice.n_theta = num(key, value)?,
            "reanchor_incumbent" => self.reanchor_incumbent = num(key, value)?,
            "rect_length" => self.geometry.rect_length = num(key, value)?,
            "rect_width" => self.geometry.rect_width = num(key, value)?,
            "sensor_offset" => self.geometry.offset = num(key, value)?,
            "snap_tol" => self.lattice.snap_tol = num(key, value)?,
            "speeds" => {
                self.lattice.speeds = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| format!("bad speed `{v}`")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "split_timeout_s" => self.split_timeout_s = num(key, value)?,
            "strict_refine_goal" => self.strict_refine_goal = num(key, value)?,
            "t_max" => self.t_max = num(key, value)?,
            "turn_rate_max" => self.lattice.turn_rate_max = num(key, value)?,
            "w1" => self.w1 = num(key, value)?,
            "w2" => self.w2 = num(key, value)?,
            "w_motion" => self.costs.w_motion = num(key, value)?,
            "w_sensor" => self.costs.w_sensor = num(key, value)?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }
}
