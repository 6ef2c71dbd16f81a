//! The evaluation sweep: every instance runs the decoupled planner over a
//! range of history sizes, the two-step refinement planner, and the
//! joint-space baseline; results land in one CSV ordered by instance.

use std::time::Duration;

use rayon::prelude::*;

use crate::baseline::{plan_joint_baseline, BaselineResult};
use crate::config::PlannerConfig;
use crate::harness::{evaluate, Evaluation, Instance, InstanceSet};
use crate::lattice::PrimitiveLibrary;
use crate::splash::{splash, PlanOutcome};
use crate::split::split;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub h_values: Vec<usize>,
    pub run_split: bool,
    pub run_baseline: bool,
    pub split_timeout: Duration,
    pub baseline_timeout: Duration,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            h_values: vec![0, 3, 5],
            run_split: true,
            run_baseline: true,
            split_timeout: Duration::from_secs(30),
            baseline_timeout: Duration::from_secs(20),
        }
    }
}

/// One CSV row. Evaluation fields are `None` for rows without a final
/// trajectory (per-iteration trace rows, failures).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub instance_id: usize,
    pub algorithm: String,
    pub h: usize,
    pub iteration: u32,
    pub eval: Option<Evaluation>,
    pub solution_g: Option<f64>,
    pub motion_cost_s: Option<f64>,
    pub plan_wall_ms: f64,
    pub expansions: u64,
    pub error: String,
}

fn run_instance(
    inst: &Instance,
    set: &InstanceSet,
    lib: &PrimitiveLibrary,
    cfg: &PlannerConfig,
    sweep: &SweepConfig,
) -> Vec<SweepRow> {
    let map = &set.maps[inst.map_idx];
    let mut rows = Vec::new();

    for &h in &sweep.h_values {
        let row = match splash(inst.start, inst.goal, inst.psi0, h, map, lib, cfg) {
            Ok(PlanOutcome::Found(out)) => {
                let wall = out.robot_stats.wall + out.sensor_stats.wall;
                SweepRow {
                    instance_id: inst.id,
                    algorithm: "splash".into(),
                    h,
                    iteration: 0,
                    eval: Some(evaluate(&out.trajectory, map)),
                    solution_g: Some(out.sensor_cost_shifted),
                    motion_cost_s: Some(out.trajectory.motion_cost),
                    plan_wall_ms: wall.as_secs_f64() * 1e3,
                    expansions: out.robot_stats.expansions + out.sensor_stats.expansions,
                    error: String::new(),
                }
            }
            Ok(PlanOutcome::NoPath(stats)) => SweepRow {
                instance_id: inst.id,
                algorithm: "splash".into(),
                h,
                iteration: 0,
                eval: None,
                solution_g: None,
                motion_cost_s: None,
                plan_wall_ms: stats.wall.as_secs_f64() * 1e3,
                expansions: stats.expansions,
                error: "no-path".into(),
            },
            Err(e) => error_row(inst.id, "splash", h, e.to_string()),
        };
        rows.push(row);
    }

    if sweep.run_split {
        match split(
            inst.start,
            inst.goal,
            inst.psi0,
            sweep.split_timeout,
            map,
            lib,
            cfg,
        ) {
            Ok(PlanOutcome::Found(out)) => {
                for it in &out.trace.iterations {
                    rows.push(SweepRow {
                        instance_id: inst.id,
                        algorithm: "split".into(),
                        h: 0,
                        iteration: it.iteration,
                        eval: None,
                        solution_g: Some(it.best_cost),
                        motion_cost_s: None,
                        plan_wall_ms: it.wall.as_secs_f64() * 1e3,
                        expansions: it.expansions,
                        error: String::new(),
                    });
                }
                let final_g = out
                    .trace
                    .iterations
                    .last()
                    .map_or(out.trace.initial_cost, |it| it.best_cost);
                rows.push(SweepRow {
                    instance_id: inst.id,
                    algorithm: "split".into(),
                    h: 0,
                    iteration: 0,
                    eval: Some(evaluate(&out.trajectory, map)),
                    solution_g: Some(final_g),
                    motion_cost_s: Some(out.trajectory.motion_cost),
                    plan_wall_ms: (out.splash_wall + out.refine_wall).as_secs_f64() * 1e3,
                    expansions: out.robot_stats.expansions
                        + out.sensor_stats.expansions
                        + out.trace.iterations.iter().map(|i| i.expansions).sum::<u64>(),
                    error: String::new(),
                });
            }
            Ok(PlanOutcome::NoPath(stats)) => rows.push(SweepRow {
                instance_id: inst.id,
                algorithm: "split".into(),
                h: 0,
                iteration: 0,
                eval: None,
                solution_g: None,
                motion_cost_s: None,
                plan_wall_ms: stats.wall.as_secs_f64() * 1e3,
                expansions: stats.expansions,
                error: "no-path".into(),
            }),
            Err(e) => rows.push(error_row(inst.id, "split", 0, e.to_string())),
        }
    }

    if sweep.run_baseline {
        match plan_joint_baseline(
            inst.start,
            inst.goal,
            inst.psi0,
            sweep.baseline_timeout,
            map,
            lib,
            cfg,
        ) {
            Ok(BaselineResult::Found(out)) => rows.push(SweepRow {
                instance_id: inst.id,
                algorithm: "joint-baseline".into(),
                h: 0,
                iteration: 0,
                eval: Some(evaluate(&out.trajectory, map)),
                solution_g: Some(out.cost_shifted),
                motion_cost_s: Some(out.trajectory.motion_cost),
                plan_wall_ms: out.stats.wall.as_secs_f64() * 1e3,
                expansions: out.stats.expansions,
                error: String::new(),
            }),
            Ok(BaselineResult::NoPath(stats)) => rows.push(SweepRow {
                instance_id: inst.id,
                algorithm: "joint-baseline".into(),
                h: 0,
                iteration: 0,
                eval: None,
                solution_g: None,
                motion_cost_s: None,
                plan_wall_ms: stats.wall.as_secs_f64() * 1e3,
                expansions: stats.expansions,
                error: "no-path".into(),
            }),
            Ok(BaselineResult::Timeout(stats)) => rows.push(SweepRow {
                instance_id: inst.id,
                algorithm: "joint-baseline".into(),
                h: 0,
                iteration: 0,
                eval: None,
                solution_g: None,
                motion_cost_s: None,
                plan_wall_ms: stats.wall.as_secs_f64() * 1e3,
                expansions: stats.expansions,
                error: "timeout".into(),
            }),
            Err(e) => rows.push(error_row(inst.id, "joint-baseline", 0, e.to_string())),
        }
    }

    rows
}

fn error_row(instance_id: usize, algorithm: &str, h: usize, error: String) -> SweepRow {
    SweepRow {
        instance_id,
        algorithm: algorithm.into(),
        h,
        iteration: 0,
        eval: None,
        solution_g: None,
        motion_cost_s: None,
        plan_wall_ms: 0.0,
        expansions: 0,
        error,
    }
}

/// Runs every instance through the configured planners. Instances run in a
/// worker pool; rows come back ordered by instance id. Per-instance failures
/// land in the `error` column and the sweep continues.
pub fn run_sweep(
    set: &InstanceSet,
    lib: &PrimitiveLibrary,
    cfg: &PlannerConfig,
    sweep: &SweepConfig,
) -> Vec<SweepRow> {
    set.instances
        .par_iter()
        .map(|inst| run_instance(inst, set, lib, cfg, sweep))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub const CSV_HEADER: &str =
    "instance_id,algorithm,H,iteration,N,sum_p,p_bar,solution_g,motion_cost_s,plan_wall_ms,expansions,error";

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (n, sum_p, p_bar) = match &r.eval {
            Some(e) => (
                e.n.to_string(),
                e.sum_p.to_string(),
                e.p_bar.map_or(String::new(), |p| format!("{p:.4}")),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:.3},{},{}\n",
            r.instance_id,
            r.algorithm,
            r.h,
            r.iteration,
            n,
            sum_p,
            p_bar,
            r.solution_g.map_or(String::new(), |g| format!("{g:.6}")),
            r.motion_cost_s.map_or(String::new(), |m| format!("{m:.3}")),
            r.plan_wall_ms,
            r.expansions,
            r.error
        ));
    }
    out
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Two-sided sign-test p-value for paired differences: ties dropped,
/// exact binomial tail doubled.
pub fn sign_test_p(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let k = wins.max(losses);
    // P(X >= k) for X ~ Binomial(n, 1/2).
    let mut tail = 0.0f64;
    for j in k..=n {
        // C(n, j) / 2^n computed in log space to stay finite.
        let mut log_c = 0.0f64;
        for i in 0..j {
            log_c += ((n - i) as f64).ln() - ((j - i) as f64).ln();
        }
        tail += (log_c - n as f64 * std::f64::consts::LN_2).exp();
    }
    (2.0 * tail).min(1.0)
}

/// Human-readable summary block: median N / sum_p / wall per algorithm and
/// history size, plus the sign test between the extreme history values.
pub fn summary(rows: &[SweepRow]) -> String {
    use std::collections::BTreeMap;
    let mut out = String::from("# sweep summary\n");

    let mut groups: BTreeMap<(String, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.iteration == 0) {
        groups
            .entry((r.algorithm.clone(), r.h))
            .or_default()
            .push(r);
    }
    for ((algo, h), rs) in &groups {
        let mut ns: Vec<f64> = rs
            .iter()
            .filter_map(|r| r.eval.as_ref().map(|e| e.n as f64))
            .collect();
        let mut walls: Vec<f64> = rs.iter().map(|r| r.plan_wall_ms).collect();
        let mut sums: Vec<f64> = rs
            .iter()
            .filter_map(|r| r.eval.as_ref().map(|e| e.sum_p as f64))
            .collect();
        let fails = rs.iter().filter(|r| !r.error.is_empty()).count();
        out.push_str(&format!(
            "{algo} H={h}: runs={} failures={fails} median_N={} median_sum_p={} median_wall_ms={}\n",
            rs.len(),
            median(&mut ns).map_or("-".into(), |v| format!("{v:.1}")),
            median(&mut sums).map_or("-".into(), |v| format!("{v:.1}")),
            median(&mut walls).map_or("-".into(), |v| format!("{v:.2}")),
        ));
    }

    // Real-time feasibility: refinement iterations finishing inside the
    // first 5 s of each run.
    let mut per_instance: BTreeMap<usize, (f64, u64)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.algorithm == "split" && r.iteration > 0) {
        let e = per_instance.entry(r.instance_id).or_insert((0.0, 0));
        e.0 += r.plan_wall_ms;
        if e.0 <= 5_000.0 {
            e.1 += 1;
        }
    }
    if !per_instance.is_empty() {
        let mut counts: Vec<f64> = per_instance.values().map(|(_, k)| *k as f64).collect();
        if let Some(m) = median(&mut counts) {
            out.push_str(&format!(
                "split: median refinement iterations completed within 5 s = {m:.1}\n"
            ));
        }
    }

    // Paired sign test on N between the smallest and largest splash history.
    let hs: Vec<usize> = groups
        .keys()
        .filter(|(a, _)| a == "splash")
        .map(|(_, h)| *h)
        .collect();
    if let (Some(&h_lo), Some(&h_hi)) = (hs.first(), hs.last()) {
        if h_lo != h_hi {
            let by_inst = |h: usize| -> BTreeMap<usize, u64> {
                rows.iter()
                    .filter(|r| r.algorithm == "splash" && r.h == h && r.iteration == 0)
                    .filter_map(|r| r.eval.as_ref().map(|e| (r.instance_id, e.n)))
                    .collect()
            };
            let lo = by_inst(h_lo);
            let hi = by_inst(h_hi);
            let (mut wins, mut losses) = (0u64, 0u64);
            for (id, n_hi) in &hi {
                if let Some(n_lo) = lo.get(id) {
                    if n_hi > n_lo {
                        wins += 1;
                    } else if n_hi < n_lo {
                        losses += 1;
                    }
                }
            }
            out.push_str(&format!(
                "sign-test N(H={h_hi}) vs N(H={h_lo}): wins={wins} losses={losses} p={:.4}\n",
                sign_test_p(wins, losses)
            ));
        }
    }
    out
}
