//! Benchmark harness: decayed-map generation, random start-goal instances,
//! trajectory evaluation metrics, and the sweep that runs every planner over
//! an instance set and writes the results CSV.

mod evaluate;
mod instances;
mod mapgen;
mod sweep;

pub use evaluate::{evaluate, Evaluation};
pub use instances::{generate_instances, Instance, InstanceSet};
pub use mapgen::{gen_decayed_map, MapGenParams};
pub use sweep::{run_sweep, rows_to_csv, sign_test_p, summary, SweepConfig, SweepRow};
