//! Implementation of the `pancover` subcommands; the binary in `main.rs` is
//! a thin argument-parsing shell over these.

pub mod render;

use std::path::{Path, PathBuf};
use std::time::Duration;

use pancover_core::baseline::{plan_joint_baseline, BaselineResult};
use pancover_core::harness::{
    evaluate, gen_decayed_map, generate_instances, run_sweep, rows_to_csv, summary, MapGenParams,
    SweepConfig,
};
use pancover_core::lattice::generate_primitives;
use pancover_core::splash::{splash, PlanOutcome};
use pancover_core::split::split;
use pancover_core::{CellIndex, CoverageMap, Error, PlannerConfig, RobotState, Trajectory};

/// Process exit codes: 0 success, 2 usage/config, 3 no path, 4 I/O.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NoPath(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::NoPath(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::NoPath(m) | CliError::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<PlannerConfig, CliError> {
    let mut cfg = match path {
        Some(p) => PlannerConfig::load(p)?,
        None => PlannerConfig::default(),
    };
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{kv}`")))?;
        cfg.apply(k.trim(), v.trim()).map_err(CliError::Usage)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub struct GenMapArgs {
    pub seed: u64,
    pub minutes: u32,
    pub snapshots: usize,
    pub snapshot_times: Option<Vec<u64>>,
    pub width: usize,
    pub height: usize,
    pub lifetime: u32,
    pub nc_fraction: f64,
    pub out_dir: PathBuf,
}

pub fn cmd_gen_map(args: &GenMapArgs, cfg: &PlannerConfig) -> Result<Vec<PathBuf>, CliError> {
    let times = match &args.snapshot_times {
        Some(t) => t.clone(),
        None => {
            if args.snapshots == 0 {
                return Err(CliError::Usage("need at least one snapshot".into()));
            }
            let end = args.minutes as u64 * 60;
            (1..=args.snapshots as u64)
                .map(|k| end * k / args.snapshots as u64)
                .collect()
        }
    };
    let params = MapGenParams {
        width: args.width,
        height: args.height,
        cell_size: cfg.lattice.cell_size,
        lifetime: args.lifetime,
        nc_fraction: args.nc_fraction,
        sim_minutes: args.minutes,
        snapshot_times: times,
        seed: args.seed,
        sweeper_speed: 5.0,
    };
    let maps = gen_decayed_map(&params, &cfg.geometry)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::Io(e.to_string()))?;
    let mut paths = Vec::new();
    for map in &maps {
        let path = args.out_dir.join(format!("map_t{}.ccmap", map.clock()));
        map.save(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Splash,
    Split,
    JointBaseline,
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "splash" => Ok(Algo::Splash),
            "split" => Ok(Algo::Split),
            "joint-baseline" => Ok(Algo::JointBaseline),
            other => Err(format!("unknown algorithm `{other}`")),
        }
    }
}

pub struct PlanArgs {
    pub algo: Algo,
    pub map: PathBuf,
    /// "row,col[,theta_bin[,v_idx]]"
    pub start: String,
    /// "row,col"
    pub goal: String,
    pub history: usize,
    pub psi0: Option<u8>,
    pub timeout_s: f64,
    pub out: Option<PathBuf>,
}

fn parse_cell(s: &str) -> Result<(i32, i32), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() < 2 {
        return Err(CliError::Usage(format!("expected `row,col`, got `{s}`")));
    }
    let row = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad row `{}`", parts[0])))?;
    let col = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad col `{}`", parts[1])))?;
    Ok((row, col))
}

/// Plans one instance, writes the trajectory file (plus a `.trace.csv` next
/// to it for the refinement planner), and returns the metrics line printed
/// to stdout.
pub fn cmd_plan(args: &PlanArgs, cfg: &PlannerConfig) -> Result<String, CliError> {
    let map = CoverageMap::load(&args.map)?;
    let (srow, scol) = parse_cell(&args.start)?;
    let start_cell = CellIndex::new(srow, scol);
    if !map.in_bounds(start_cell) {
        return Err(CliError::Usage(format!("start cell {srow},{scol} out of bounds")));
    }
    let parts: Vec<&str> = args.start.split(',').collect();
    let theta_bin: u8 = parts
        .get(2)
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage("bad theta bin".into())))
        .transpose()?
        .unwrap_or(0);
    let v_idx: u8 = parts
        .get(3)
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage("bad speed level".into())))
        .transpose()?
        .unwrap_or(0);
    if theta_bin as u32 >= cfg.lattice.n_theta || v_idx as usize >= cfg.lattice.speeds.len() {
        return Err(CliError::Usage("start heading or speed off the lattice".into()));
    }
    let (grow, gcol) = parse_cell(&args.goal)?;
    let goal = CellIndex::new(grow, gcol);
    if !map.in_bounds(goal) {
        return Err(CliError::Usage(format!("goal cell {grow},{gcol} out of bounds")));
    }

    let (x, y) = map.cell_center(start_cell);
    let start = RobotState {
        x,
        y,
        theta_bin,
        v_idx,
        t: map.clock(),
    };
    let psi0 = args
        .psi0
        .unwrap_or_else(|| cfg.geometry.bin_of_angle(cfg.lattice.heading_angle(theta_bin)));
    if args.history > cfg.h_max {
        return Err(CliError::Usage(format!(
            "history {} exceeds h_max {}",
            args.history, cfg.h_max
        )));
    }

    let lib = generate_primitives(&cfg.lattice)?;
    let timeout = Duration::from_secs_f64(args.timeout_s);

    let no_path = |algo: &str| CliError::NoPath(format!("{algo}: no path to the goal"));
    let (algo_name, trajectory, solution_g, wall_ms, expansions, trace_csv): (
        &str,
        Trajectory,
        f64,
        f64,
        u64,
        Option<String>,
    ) = match args.algo {
        Algo::Splash => match splash(start, goal, psi0, args.history, &map, &lib, cfg)? {
            PlanOutcome::Found(out) => (
                "splash",
                out.trajectory,
                out.sensor_cost_shifted,
                (out.robot_stats.wall + out.sensor_stats.wall).as_secs_f64() * 1e3,
                out.robot_stats.expansions + out.sensor_stats.expansions,
                None,
            ),
            PlanOutcome::NoPath(_) => return Err(no_path("splash")),
        },
        Algo::Split => match split(start, goal, psi0, timeout, &map, &lib, cfg)? {
            PlanOutcome::Found(out) => {
                let g = out
                    .trace
                    .iterations
                    .last()
                    .map_or(out.trace.initial_cost, |it| it.best_cost);
                let expansions = out.robot_stats.expansions
                    + out.sensor_stats.expansions
                    + out.trace.iterations.iter().map(|i| i.expansions).sum::<u64>();
                (
                    "split",
                    out.trajectory,
                    g,
                    (out.splash_wall + out.refine_wall).as_secs_f64() * 1e3,
                    expansions,
                    Some(out.trace.to_csv()),
                )
            }
            PlanOutcome::NoPath(_) => return Err(no_path("split")),
        },
        Algo::JointBaseline => {
            match plan_joint_baseline(start, goal, psi0, timeout, &map, &lib, cfg)? {
                BaselineResult::Found(out) => (
                    "joint-baseline",
                    out.trajectory,
                    out.cost_shifted,
                    out.stats.wall.as_secs_f64() * 1e3,
                    out.stats.expansions,
                    None,
                ),
                BaselineResult::NoPath(_) => return Err(no_path("joint-baseline")),
                BaselineResult::Timeout(_) => {
                    return Err(CliError::NoPath("joint-baseline: timed out".into()))
                }
            }
        }
    };

    if let Some(out_path) = &args.out {
        trajectory.save(out_path, &cfg.geometry)?;
        if let Some(trace) = trace_csv {
            let trace_path = out_path.with_extension("trace.csv");
            std::fs::write(trace_path, trace).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }

    let eval = evaluate(&trajectory, &map);
    Ok(format!(
        "cli,{algo_name},{},0,{},{},{},{:.6},{:.3},{:.3},{},",
        args.history,
        eval.n,
        eval.sum_p,
        eval.p_bar.map_or(String::new(), |p| format!("{p:.4}")),
        solution_g,
        trajectory.motion_cost,
        wall_ms,
        expansions
    ))
}

pub struct RenderArgs {
    pub map: PathBuf,
    pub traj: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn cmd_render(args: &RenderArgs, cfg: &PlannerConfig) -> Result<(), CliError> {
    let map = CoverageMap::load(&args.map)?;
    let traj = args
        .traj
        .as_ref()
        .map(|p| Trajectory::load(p, &cfg.geometry))
        .transpose()?;
    let svg = render::render_svg(&map, traj.as_ref());
    std::fs::write(&args.out, svg).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

pub struct BenchArgs {
    pub maps: usize,
    pub pairs: usize,
    pub h_values: Vec<usize>,
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub minutes: u32,
    pub min_separation: f64,
    pub run_split: bool,
    pub run_baseline: bool,
    pub split_timeout_s: f64,
    pub baseline_timeout_s: f64,
    pub out: PathBuf,
}

/// Generates maps, draws instances, runs the sweep, writes the CSV, and
/// returns the summary block.
pub fn cmd_bench(args: &BenchArgs, cfg: &PlannerConfig) -> Result<String, CliError> {
    if args.maps == 0 || args.pairs == 0 {
        return Err(CliError::Usage("need at least one map and one pair".into()));
    }
    let mut maps = Vec::new();
    for m in 0..args.maps {
        let params = MapGenParams {
            width: args.width,
            height: args.height,
            cell_size: cfg.lattice.cell_size,
            sim_minutes: args.minutes,
            // One snapshot per map, staggered through the simulation.
            snapshot_times: vec![(args.minutes as u64 * 60) * (m as u64 + 1) / args.maps as u64],
            seed: args.seed.wrapping_add(m as u64),
            ..Default::default()
        };
        maps.extend(gen_decayed_map(&params, &cfg.geometry)?);
    }
    let set = generate_instances(maps, args.pairs, args.seed, args.min_separation, cfg);
    let lib = generate_primitives(&cfg.lattice)?;
    let sweep = SweepConfig {
        h_values: args.h_values.clone(),
        run_split: args.run_split,
        run_baseline: args.run_baseline,
        split_timeout: Duration::from_secs_f64(args.split_timeout_s),
        baseline_timeout: Duration::from_secs_f64(args.baseline_timeout_s),
    };
    let rows = run_sweep(&set, &lib, cfg, &sweep);
    std::fs::write(&args.out, rows_to_csv(&rows)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(summary(&rows))
}
