use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pancover_cli::{
    cmd_bench, cmd_gen_map, cmd_plan, cmd_render, load_config, Algo, BenchArgs, GenMapArgs,
    PlanArgs, RenderArgs,
};

/// Coverage-aware planning for a robot with a pan-only sensor.
#[derive(Parser)]
#[command(name = "pancover", version, about)]
struct Cli {
    /// Planner configuration file (`config v1` format).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a single config key, e.g. `--set lambda=250`. Repeatable.
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate decayed coverage maps by simulating a sweeping sensor.
    GenMap {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Simulated decay time, minutes.
        #[arg(long, default_value_t = 10)]
        minutes: u32,
        /// Number of evenly spaced snapshots to emit.
        #[arg(long, default_value_t = 1)]
        snapshots: usize,
        /// Explicit snapshot times in seconds, comma separated (overrides
        /// --snapshots).
        #[arg(long, value_delimiter = ',')]
        snapshot_times: Option<Vec<u64>>,
        #[arg(long, default_value_t = 100)]
        width: usize,
        #[arg(long, default_value_t = 100)]
        height: usize,
        #[arg(long, default_value_t = 100)]
        lifetime: u32,
        #[arg(long, default_value_t = 0.15)]
        nc_fraction: f64,
        #[arg(long, default_value = "maps")]
        out_dir: PathBuf,
    },
    /// Plan one instance and print its metrics line.
    Plan {
        #[arg(long)]
        algo: Algo,
        #[arg(long)]
        map: PathBuf,
        /// Start cell: `row,col[,theta_bin[,v_idx]]`.
        #[arg(long)]
        start: String,
        /// Goal cell: `row,col`.
        #[arg(long)]
        goal: String,
        /// Sensor history size (splash only).
        #[arg(long = "H", default_value_t = 0)]
        history: usize,
        /// Initial pan bin; defaults to the start heading.
        #[arg(long)]
        psi0: Option<u8>,
        /// Planning budget in seconds (split, joint-baseline).
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        /// Trajectory output file (`traj v1`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a map (and optionally a trajectory) to SVG.
    Render {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the benchmark sweep and write a results CSV.
    Bench {
        #[arg(long, default_value_t = 2)]
        maps: usize,
        #[arg(long, default_value_t = 3)]
        pairs: usize,
        /// History sizes for the decoupled planner, comma separated.
        #[arg(long = "H", value_delimiter = ',', default_values_t = vec![0, 3, 5])]
        h_values: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        width: usize,
        #[arg(long, default_value_t = 60)]
        height: usize,
        #[arg(long, default_value_t = 10)]
        minutes: u32,
        #[arg(long, default_value_t = 20.0)]
        min_separation: f64,
        #[arg(long, default_value_t = false)]
        no_split: bool,
        #[arg(long, default_value_t = false)]
        no_baseline: bool,
        #[arg(long, default_value_t = 30.0)]
        split_timeout: f64,
        #[arg(long, default_value_t = 20.0)]
        baseline_timeout: f64,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(cli.config.as_deref(), &cli.overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code() as u8);
        }
    };

    let result = match cli.command {
        Command::GenMap {
            seed,
            minutes,
            snapshots,
            snapshot_times,
            width,
            height,
            lifetime,
            nc_fraction,
            out_dir,
        } => cmd_gen_map(
            &GenMapArgs {
                seed,
                minutes,
                snapshots,
                snapshot_times,
                width,
                height,
                lifetime,
                nc_fraction,
                out_dir,
            },
            &cfg,
        )
        .map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
        }),
        Command::Plan {
            algo,
            map,
            start,
            goal,
            history,
            psi0,
            timeout,
            out,
        } => cmd_plan(
            &PlanArgs {
                algo,
                map,
                start,
                goal,
                history,
                psi0,
                timeout_s: timeout,
                out,
            },
            &cfg,
        )
        .map(|line| println!("{line}")),
        Command::Render { map, traj, out } => cmd_render(&RenderArgs { map, traj, out }, &cfg),
        Command::Bench {
            maps,
            pairs,
            h_values,
            seed,
            width,
            height,
            minutes,
            min_separation,
            no_split,
            no_baseline,
            split_timeout,
            baseline_timeout,
            out,
        } => cmd_bench(
            &BenchArgs {
                maps,
                pairs,
                h_values,
                seed,
                width,
                height,
                minutes,
                min_separation,
                run_split: !no_split,
                run_baseline: !no_baseline,
                split_timeout_s: split_timeout,
                baseline_timeout_s: baseline_timeout,
                out,
            },
            &cfg,
        )
        .map(|summary| print!("{summary}")),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
