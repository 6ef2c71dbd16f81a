//! Robot state lattice: discretized states, offline motion-primitive
//! generation under bounded acceleration and turn rate, and successor
//! expansion.
//!
//! Primitives are forward simulations of piecewise-constant turn-rate and
//! acceleration profiles over a fixed duration. Each profile has two equal
//! halves; the half-to-half differences in turn rate and acceleration are
//! free parameters that a small Newton solve uses to steer the endpoint onto
//! the nearest whole-cell offset, so endpoints land on lattice states exactly
//! and duplicate detection never accumulates drift. The commanded end heading
//! and end speed are preserved by construction (the corrections cancel over
//! the two halves).

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::CoverageMap;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeConfig {
    /// Number of discrete headings.
    pub n_theta: u32,
    /// Discrete speed levels, m/s, ascending.
    pub speeds: Vec<f64>,
    /// Lattice/grid resolution, meters.
    pub cell_size: f64,
    /// Longitudinal acceleration bound, m/s^2.
    pub accel_max: f64,
    /// Turn rate bound, rad/s.
    pub turn_rate_max: f64,
    /// Primitive duration, whole seconds.
    pub duration: u32,
    /// Max residual between a steered endpoint and its lattice target,
    /// as a fraction of the cell size.
    pub snap_tol: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            n_theta: 16,
            speeds: vec![0.0, 5.0, 10.0],
            cell_size: 1.0,
            accel_max: 2.5,
            turn_rate_max: 0.6,
            duration: 4,
            snap_tol: 0.1,
        }
    }
}

impl LatticeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 4 {
            return Err(Error::Config("need at least 4 headings".into()));
        }
        if self.speeds.is_empty() {
            return Err(Error::Config("need at least one speed level".into()));
        }
        if self.speeds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("speed levels must be strictly ascending".into()));
        }
        if self.speeds[0] < 0.0 {
            return Err(Error::Config("speeds must be non-negative".into()));
        }
        if self.accel_max <= 0.0 || self.turn_rate_max <= 0.0 || self.cell_size <= 0.0 {
            return Err(Error::Config("dynamic bounds must be positive".into()));
        }
        if self.duration == 0 {
            return Err(Error::Config("primitive duration must be positive".into()));
        }
        Ok(())
    }

    pub fn heading_angle(&self, bin: u8) -> f64 {
        bin as f64 * TAU / self.n_theta as f64
    }

    pub fn wrap_heading(&self, bin: i32) -> u8 {
        bin.rem_euclid(self.n_theta as i32) as u8
    }

    pub fn v_max(&self) -> f64 {
        *self.speeds.last().unwrap()
    }
}

/// On-lattice robot state. `x`/`y` are meters; heading and speed are bin
/// indices into the lattice config; `t` is the global timestamp in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta_bin: u8,
    pub v_idx: u8,
    pub t: u64,
}

impl RobotState {
    pub fn theta(&self, cfg: &LatticeConfig) -> f64 {
        cfg.heading_angle(self.theta_bin)
    }

    pub fn speed(&self, cfg: &LatticeConfig) -> f64 {
        cfg.speeds[self.v_idx as usize]
    }
}

/// Pose sample along a primitive, relative to the start position (headings
/// are absolute).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
}

/// A timestamped pose along a trajectory, 1 s apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub t: u64,
}

/// Piecewise-constant control profile: two equal-length segments of
/// (turn rate, acceleration).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlProfile {
    pub t_switch: f64,
    pub omega: [f64; 2],
    pub accel: [f64; 2],
}

/// Exact integration of constant-(omega, accel) motion for `dt` seconds.
fn advance(x: f64, y: f64, th: f64, v: f64, omega: f64, accel: f64, dt: f64) -> (f64, f64, f64, f64) {
    let th1 = th + omega * dt;
    let v1 = v + accel * dt;
    if (omega * dt).abs() > 1e-4 {
        let inv = 1.0 / omega;
        let dx = (v1 * th1.sin() - v * th.sin()) * inv + accel * inv * inv * (th1.cos() - th.cos());
        let dy = (-v1 * th1.cos() + v * th.cos()) * inv + accel * inv * inv * (th1.sin() - th.sin());
        (x + dx, y + dy, th1, v1)
    } else {
        // Series expansion around omega = 0; the closed form cancels badly there.
        let m = |k: i32| v * dt.powi(k + 1) / (k + 1) as f64 + accel * dt.powi(k + 2) / (k + 2) as f64;
        let c = m(0) - omega * omega * m(2) / 2.0 + omega.powi(4) * m(4) / 24.0;
        let s = omega * m(1) - omega.powi(3) * m(3) / 6.0;
        (x + th.cos() * c - th.sin() * s, y + th.sin() * c + th.cos() * s, th1, v1)
    }
}

impl ControlProfile {
    fn steered(duration: f64, omega_base: f64, accel_base: f64, d_omega: f64, d_accel: f64) -> Self {
        ControlProfile {
            t_switch: duration / 2.0,
            omega: [omega_base + d_omega, omega_base - d_omega],
            accel: [accel_base + d_accel, accel_base - d_accel],
        }
    }

    /// Pose at time `t` from the start of the primitive, starting at the
    /// origin with heading `th0` and speed `v0`.
    pub fn pose_at(&self, t: f64, th0: f64, v0: f64) -> PrimPose {
        let t1 = t.min(self.t_switch);
        let (x, y, th, v) = advance(0.0, 0.0, th0, v0, self.omega[0], self.accel[0], t1);
        let (x, y, th, v) = if t > self.t_switch {
            advance(x, y, th, v, self.omega[1], self.accel[1], t - self.t_switch)
        } else {
            (x, y, th, v)
        };
        PrimPose { x, y, theta: th, v }
    }
}

/// One kinodynamically feasible lattice edge.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPrimitive {
    pub start_heading: u8,
    pub start_speed: u8,
    pub end_heading: u8,
    pub end_speed: u8,
    /// Endpoint displacement in whole cells.
    pub end_offset: (i32, i32),
    /// Seconds; equals `poses_1s.len()`.
    pub duration: u32,
    pub profile: ControlProfile,
    /// Poses at 1 s, 2 s, ... duration, excluding the start pose.
    pub poses_1s: Vec<PrimPose>,
    /// 0.1 s samples including both endpoints, for rendering and checks.
    pub dense_poses: Vec<PrimPose>,
}

/// Cost of executing a primitive: the time it takes.
pub fn primitive_cost(p: &MotionPrimitive) -> f64 {
    p.duration as f64
}

/// Per-second waypoints of a primitive applied at `anchor`, in the global
/// frame, timestamped `anchor.t + 1 ..= anchor.t + duration`.
pub fn waypoints_1s(
    p: &MotionPrimitive,
    anchor: &RobotState,
    cfg: &LatticeConfig,
) -> Result<Vec<Waypoint>> {
    if anchor.theta_bin != p.start_heading || anchor.v_idx != p.start_speed {
        return Err(Error::Invalid(format!(
            "anchor (heading {}, speed {}) does not match primitive start (heading {}, speed {})",
            anchor.theta_bin, anchor.v_idx, p.start_heading, p.start_speed
        )));
    }
    let _ = cfg;
    Ok(p.poses_1s
        .iter()
        .enumerate()
        .map(|(k, pose)| Waypoint {
            x: anchor.x + pose.x,
            y: anchor.y + pose.y,
            theta: pose.theta,
            v: pose.v,
            t: anchor.t + k as u64 + 1,
        })
        .collect())
}

/// The offline-generated primitive set, indexed by (heading, speed).
#[derive(Debug, Clone)]
pub struct PrimitiveLibrary {
    pub config: LatticeConfig,
    prims: Vec<MotionPrimitive>,
    index: Vec<Vec<u16>>,
    pub warnings: Vec<String>,
}

impl PrimitiveLibrary {
    pub fn get(&self, idx: u16) -> &MotionPrimitive {
        &self.prims[idx as usize]
    }

    pub fn len(&self) -> usize {
        self.prims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prims.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MotionPrimitive> {
        self.prims.iter()
    }

    /// Primitive indices applicable from a (heading, speed) pair.
    pub fn applicable(&self, heading: u8, v_idx: u8) -> &[u16] {
        &self.index[heading as usize * self.config.speeds.len() + v_idx as usize]
    }

    pub fn average_out_degree(&self) -> f64 {
        let groups = self.index.len();
        self.prims.len() as f64 / groups as f64
    }
}

fn solve_steering(
    duration: f64,
    th0: f64,
    v0: f64,
    omega_base: f64,
    accel_base: f64,
    target: (f64, f64),
) -> Option<(f64, f64)> {
    let endpoint = |dw: f64, da: f64| {
        let p = ControlProfile::steered(duration, omega_base, accel_base, dw, da)
            .pose_at(duration, th0, v0);
        (p.x, p.y)
    };
    let (mut dw, mut da) = (0.0f64, 0.0f64);
    for _ in 0..40 {
        let (ex, ey) = endpoint(dw, da);
        let (rx, ry) = (ex - target.0, ey - target.1);
        if rx.hypot(ry) < 1e-10 {
            return Some((dw, da));
        }
        let h = 1e-6;
        let (xa, ya) = endpoint(dw + h, da);
        let (xb, yb) = endpoint(dw - h, da);
        let (xc, yc) = endpoint(dw, da + h);
        let (xd, yd) = endpoint(dw, da - h);
        let j11 = (xa - xb) / (2.0 * h);
        let j21 = (ya - yb) / (2.0 * h);
        let j12 = (xc - xd) / (2.0 * h);
        let j22 = (yc - yd) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-12 {
            return None;
        }
        dw -= (rx * j22 - ry * j12) / det;
        da -= (ry * j11 - rx * j21) / det;
    }
    None
}

fn build_primitive(
    cfg: &LatticeConfig,
    heading: u8,
    v_idx: u8,
    d_heading: i32,
    d_speed: i32,
) -> std::result::Result<MotionPrimitive, String> {
    let duration = cfg.duration as f64;
    let th0 = cfg.heading_angle(heading);
    let v0 = cfg.speeds[v_idx as usize];
    let end_v_idx = v_idx as i32 + d_speed;
    let v1 = cfg.speeds[end_v_idx as usize];
    let end_heading = cfg.wrap_heading(heading as i32 + d_heading);
    let d_theta = d_heading as f64 * TAU / cfg.n_theta as f64;
    let omega_base = d_theta / duration;
    let accel_base = (v1 - v0) / duration;

    let label = format!(
        "heading {heading} speed {v_idx} d_heading {d_heading} d_speed {d_speed}"
    );

    let (dw, da) = if v0 == 0.0 && v1 == 0.0 {
        // Turning in place (or waiting): no displacement to steer.
        (0.0, 0.0)
    } else {
        let base = ControlProfile::steered(duration, omega_base, accel_base, 0.0, 0.0)
            .pose_at(duration, th0, v0);
        let target = (
            (base.x / cfg.cell_size).round() * cfg.cell_size,
            (base.y / cfg.cell_size).round() * cfg.cell_size,
        );
        solve_steering(duration, th0, v0, omega_base, accel_base, target)
            .ok_or_else(|| format!("{label}: endpoint steering did not converge"))?
    };

    let profile = ControlProfile::steered(duration, omega_base, accel_base, dw, da);
    for seg in 0..2 {
        if profile.omega[seg].abs() > cfg.turn_rate_max + 1e-9 {
            return Err(format!("{label}: turn rate {:.3} exceeds bound", profile.omega[seg]));
        }
        if profile.accel[seg].abs() > cfg.accel_max + 1e-9 {
            return Err(format!("{label}: acceleration {:.3} exceeds bound", profile.accel[seg]));
        }
    }

    let end = profile.pose_at(duration, th0, v0);
    let target_x = (end.x / cfg.cell_size).round() * cfg.cell_size;
    let target_y = (end.y / cfg.cell_size).round() * cfg.cell_size;
    let residual = (end.x - target_x).hypot(end.y - target_y);
    if residual > cfg.snap_tol * cfg.cell_size {
        return Err(format!("{label}: snap residual {residual:.4} m exceeds tolerance"));
    }

    let mut dense_poses = Vec::with_capacity(cfg.duration as usize * 10 + 1);
    let mut min_v = f64::INFINITY;
    let mut max_v = f64::NEG_INFINITY;
    for k in 0..=(cfg.duration * 10) {
        let pose = profile.pose_at(k as f64 / 10.0, th0, v0);
        min_v = min_v.min(pose.v);
        max_v = max_v.max(pose.v);
        dense_poses.push(pose);
    }
    if min_v < -1e-9 {
        return Err(format!("{label}: speed goes negative ({min_v:.3})"));
    }
    if max_v > cfg.v_max() + 1e-9 {
        return Err(format!("{label}: speed exceeds v_max ({max_v:.3})"));
    }

    let poses_1s: Vec<PrimPose> = (1..=cfg.duration)
        .map(|k| profile.pose_at(k as f64, th0, v0))
        .collect();

    Ok(MotionPrimitive {
        start_heading: heading,
        start_speed: v_idx,
        end_heading,
        end_speed: end_v_idx as u8,
        end_offset: (
            (end.x / cfg.cell_size).round() as i32,
            (end.y / cfg.cell_size).round() as i32,
        ),
        duration: cfg.duration,
        profile,
        poses_1s,
        dense_poses,
    })
}

/// Generates the primitive set: straight trims, heading changes of one and
/// two bins either way, and speed changes of one level, all combinations,
/// per (heading, speed) pair. Infeasible combinations are dropped with a
/// recorded warning; an empty library is an error.
pub fn generate_primitives(cfg: &LatticeConfig) -> Result<PrimitiveLibrary> {
    cfg.validate()?;
    let n_speeds = cfg.speeds.len();
    let mut prims = Vec::new();
    let mut index = vec![Vec::new(); cfg.n_theta as usize * n_speeds];
    let mut warnings = Vec::new();

    for heading in 0..cfg.n_theta as u8 {
        for v_idx in 0..n_speeds as u8 {
            let mut seen = HashSet::new();
            for d_heading in -2i32..=2 {
                for d_speed in -1i32..=1 {
                    let end_v = v_idx as i32 + d_speed;
                    if end_v < 0 || end_v >= n_speeds as i32 {
                        continue;
                    }
                    match build_primitive(cfg, heading, v_idx, d_heading, d_speed) {
                        Ok(p) => {
                            if seen.insert((p.end_heading, p.end_speed, p.end_offset)) {
                                let idx = prims.len() as u16;
                                prims.push(p);
                                index[heading as usize * n_speeds + v_idx as usize].push(idx);
                            }
                        }
                        Err(w) => warnings.push(w),
                    }
                }
            }
        }
    }

    if prims.is_empty() {
        return Err(Error::Config("primitive generation produced an empty library".into()));
    }

    Ok(PrimitiveLibrary {
        config: cfg.clone(),
        prims,
        index,
        warnings,
    })
}

/// Applies every applicable primitive at `s`, discarding successors whose
/// per-second waypoints or endpoint leave the map.
pub fn robot_successors(
    s: &RobotState,
    lib: &PrimitiveLibrary,
    map: &CoverageMap,
) -> Vec<(RobotState, u16)> {
    robot_successors_filtered(s, lib, map, |_| true)
}

/// Successor expansion with an extra admission hook (obstacle checks slot
/// in here).
pub fn robot_successors_filtered(
    s: &RobotState,
    lib: &PrimitiveLibrary,
    map: &CoverageMap,
    keep: impl Fn(&RobotState) -> bool,
) -> Vec<(RobotState, u16)> {
    let cfg = &lib.config;
    let mut out = Vec::new();
    for &idx in lib.applicable(s.theta_bin, s.v_idx) {
        let p = lib.get(idx);
        if p
            .poses_1s
            .iter()
            .any(|pose| !map.contains_point(s.x + pose.x, s.y + pose.y))
        {
            continue;
        }
        let succ = RobotState {
            x: s.x + p.end_offset.0 as f64 * cfg.cell_size,
            y: s.y + p.end_offset.1 as f64 * cfg.cell_size,
            theta_bin: p.end_heading,
            v_idx: p.end_speed,
            t: s.t + p.duration as u64,
        };
        if !map.contains_point(succ.x, succ.y) || !keep(&succ) {
            continue;
        }
        out.push((succ, idx));
    }
    out
}

impl PrimitiveLibrary {
    /// Serializes to the `mprim v1` text format.
    pub fn to_v1_string(&self) -> String {
        let cfg = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "mprim v1");
        let _ = writeln!(out, "n_theta {}", cfg.n_theta);
        let speeds: Vec<String> = cfg.speeds.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "speeds {}", speeds.join(" "));
        let _ = writeln!(out, "cell_size {}", cfg.cell_size);
        let _ = writeln!(out, "accel_max {}", cfg.accel_max);
        let _ = writeln!(out, "turn_rate_max {}", cfg.turn_rate_max);
        let _ = writeln!(out, "duration {}", cfg.duration);
        let _ = writeln!(out, "snap_tol {}", cfg.snap_tol);
        let _ = writeln!(out, "count {}", self.prims.len());
        for p in &self.prims {
            let _ = writeln!(
                out,
                "prim {} {} {} {} {} {}",
                p.start_heading, p.start_speed, p.end_heading, p.end_speed, p.end_offset.0, p.end_offset.1
            );
            let _ = writeln!(
                out,
                "ctrl {:.17e} {:.17e} {:.17e} {:.17e}",
                p.profile.omega[0], p.profile.omega[1], p.profile.accel[0], p.profile.accel[1]
            );
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

    /// Parses `mprim v1`, rebuilding pose tables from the control profiles
    /// and re-validating every feasibility invariant.
    pub fn parse(text: &str, file: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().peekable();
        let mut expect = |key: &str| -> Result<(usize, Vec<String>)> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::parse(file, 0, 1, format!("missing `{key}` line")))?;
            let toks: Vec<String> = line.split_whitespace().map(String::from).collect();
            if toks.is_empty() || toks[0] != key {
                return Err(Error::parse(file, n + 1, 1, format!("expected `{key}` line")));
            }
            Ok((n + 1, toks))
        };

        let (n, header) = expect("mprim")?;
        if header.get(1).map(String::as_str) != Some("v1") {
            return Err(Error::parse(file, n, 2, "unknown mprim version"));
        }
        let scalar = |toks: &[String], n: usize| -> Result<f64> {
            toks.get(1)
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(file, n, 2, "bad numeric value"))
        };

        let (n_line, toks) = expect("n_theta")?;
        let n_theta = scalar(&toks, n_line)? as u32;
        let (n_line, toks) = expect("speeds")?;
        let speeds: Vec<f64> = toks[1..]
            .iter()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::parse(file, n_line, 2, "bad speed"))
            })
            .collect::<Result<_>>()?;
        let (n_line, toks) = expect("cell_size")?;
        let cell_size = scalar(&toks, n_line)?;
        let (n_line, toks) = expect("accel_max")?;
        let accel_max = scalar(&toks, n_line)?;
        let (n_line, toks) = expect("turn_rate_max")?;
        let turn_rate_max = scalar(&toks, n_line)?;
        let (n_line, toks) = expect("duration")?;
        let duration = scalar(&toks, n_line)? as u32;
        let (n_line, toks) = expect("snap_tol")?;
        let snap_tol = scalar(&toks, n_line)?;
        let (count_line, toks) = expect("count")?;
        let count = scalar(&toks, count_line)? as usize;

        let cfg = LatticeConfig {
            n_theta,
            speeds,
            cell_size,
            accel_max,
            turn_rate_max,
            duration,
            snap_tol,
        };
        cfg.validate()?;

        let n_speeds = cfg.speeds.len();
        let mut prims = Vec::with_capacity(count);
        let mut index = vec![Vec::new(); cfg.n_theta as usize * n_speeds];
        for _ in 0..count {
            let (n_line, toks) = expect("prim")?;
            if toks.len() != 7 {
                return Err(Error::parse(file, n_line, 1, "prim line needs 6 fields"));
            }
            let nums: Vec<i64> = toks[1..]
                .iter()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::parse(file, n_line, 2, "bad prim field"))
                })
                .collect::<Result<_>>()?;
            let (c_line, ctoks) = expect("ctrl")?;
            if ctoks.len() != 5 {
                return Err(Error::parse(file, c_line, 1, "ctrl line needs 4 fields"));
            }
            let ctrl: Vec<f64> = ctoks[1..]
                .iter()
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::parse(file, c_line, 2, "bad ctrl field"))
                })
                .collect::<Result<_>>()?;

            let (start_heading, start_speed) = (nums[0] as u8, nums[1] as u8);
            if start_heading as u32 >= n_theta || start_speed as usize >= n_speeds {
                return Err(Error::parse(file, n_line, 2, "prim start off the lattice"));
            }
            let profile = ControlProfile {
                t_switch: duration as f64 / 2.0,
                omega: [ctrl[0], ctrl[1]],
                accel: [ctrl[2], ctrl[3]],
            };
            let th0 = cfg.heading_angle(start_heading);
            let v0 = cfg.speeds[start_speed as usize];
            let poses_1s: Vec<PrimPose> = (1..=duration)
                .map(|k| profile.pose_at(k as f64, th0, v0))
                .collect();
            let dense_poses: Vec<PrimPose> = (0..=duration * 10)
                .map(|k| profile.pose_at(k as f64 / 10.0, th0, v0))
                .collect();

            let p = MotionPrimitive {
                start_heading,
                start_speed,
                end_heading: nums[2] as u8,
                end_speed: nums[3] as u8,
                end_offset: (nums[4] as i32, nums[5] as i32),
                duration,
                profile,
                poses_1s,
                dense_poses,
            };
            validate_primitive(&p, &cfg)
                .map_err(|msg| Error::parse(file, n_line, 1, msg))?;
            let idx = prims.len() as u16;
            index[start_heading as usize * n_speeds + start_speed as usize].push(idx);
            prims.push(p);
        }

        Ok(PrimitiveLibrary {
            config: cfg,
            prims,
            index,
            warnings: Vec::new(),
        })
    }
}

/// Checks a primitive's feasibility invariants: bounds on controls and
/// speed, endpoint on its declared lattice offset, end bins consistent.
pub fn validate_primitive(p: &MotionPrimitive, cfg: &LatticeConfig) -> std::result::Result<(), String> {
    for seg in 0..2 {
        if p.profile.omega[seg].abs() > cfg.turn_rate_max + 1e-9 {
            return Err("turn rate out of bounds".into());
        }
        if p.profile.accel[seg].abs() > cfg.accel_max + 1e-9 {
            return Err("acceleration out of bounds".into());
        }
    }
    let th0 = cfg.heading_angle(p.start_heading);
    let v0 = cfg.speeds[p.start_speed as usize];
    let end = p.profile.pose_at(p.duration as f64, th0, v0);
    let ex = p.end_offset.0 as f64 * cfg.cell_size;
    let ey = p.end_offset.1 as f64 * cfg.cell_size;
    if (end.x - ex).hypot(end.y - ey) > cfg.snap_tol * cfg.cell_size {
        return Err("endpoint does not land on its lattice offset".into());
    }
    let want_th = cfg.heading_angle(p.end_heading);
    let dth = (end.theta - want_th).rem_euclid(TAU);
    if dth.min(TAU - dth) > 1e-6 {
        return Err("end heading does not match its bin".into());
    }
    if (end.v - cfg.speeds[p.end_speed as usize]).abs() > 1e-6 {
        return Err("end speed does not match its level".into());
    }
    for pose in &p.dense_poses {
        if pose.v < -1e-9 || pose.v > cfg.v_max() + 1e-9 {
            return Err("speed out of range along primitive".into());
        }
    }
    Ok(())
}
