//! End-to-end tests of the `pancover` binary: every subcommand, the exit
//! code contract, and the determinism of generated artifacts.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pancover(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pancover"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn small_map_args(out_dir: &str) -> Vec<&str> {
    vec![
        "gen-map",
        "--seed",
        "7",
        "--minutes",
        "3",
        "--snapshots",
        "1",
        "--width",
        "30",
        "--height",
        "30",
        "--out-dir",
        out_dir,
    ]
}

#[test]
fn gen_map_writes_deterministic_files() {
    let tmp = TempDir::new().unwrap();
    let out = pancover(&small_map_args("a"), tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out2 = pancover(&small_map_args("b"), tmp.path());
    assert!(out2.status.success());

    let a = std::fs::read(tmp.path().join("a/map_t180.ccmap")).unwrap();
    let b = std::fs::read(tmp.path().join("b/map_t180.ccmap")).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical maps");

    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("ccmap v1 30 30 1 180"));
}

#[test]
fn gen_map_usage_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = pancover(
        &["gen-map", "--minutes", "1", "--snapshot-times", "999999"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    let out = pancover(&["gen-map", "--snapshots", "abc"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "clap usage error");
}

fn gen_one_map(tmp: &TempDir) -> String {
    let out = pancover(&small_map_args("maps"), tmp.path());
    assert!(out.status.success());
    String::from_utf8(out.stdout).unwrap().trim().to_string()
}

#[test]
fn plan_splash_writes_valid_trajectory_and_metrics_line() {
    let tmp = TempDir::new().unwrap();
    let map = gen_one_map(&tmp);
    let out = pancover(
        &[
            "plan", "--algo", "splash", "--map", &map, "--start", "3,3,0,0", "--goal", "25,25",
            "--H", "2", "--out", "plan.traj",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stdout).unwrap();
    assert!(line.starts_with("cli,splash,2,0,"), "metrics line: {line}");
    // instance_id,algorithm,H,iteration,N,sum_p,p_bar,solution_g,motion_cost_s,plan_wall_ms,expansions,error
    assert_eq!(line.trim().matches(',').count(), 11);

    let traj = std::fs::read_to_string(tmp.path().join("plan.traj")).unwrap();
    assert!(traj.starts_with("traj v1 "));

    // Same plan again: identical trajectory file.
    let out2 = pancover(
        &[
            "plan", "--algo", "splash", "--map", &map, "--start", "3,3,0,0", "--goal", "25,25",
            "--H", "2", "--out", "plan2.traj",
        ],
        tmp.path(),
    );
    assert!(out2.status.success());
    let traj2 = std::fs::read_to_string(tmp.path().join("plan2.traj")).unwrap();
    assert_eq!(traj, traj2);
}

#[test]
fn plan_split_respects_budget_and_writes_trace() {
    let tmp = TempDir::new().unwrap();
    let map = gen_one_map(&tmp);
    let t0 = std::time::Instant::now();
    let out = pancover(
        &[
            "plan", "--algo", "split", "--map", &map, "--start", "3,3,0,0", "--goal", "25,25",
            "--timeout", "2", "--out", "split.traj",
        ],
        tmp.path(),
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(elapsed < 15.0, "2 s budget must not balloon: {elapsed:.1} s");

    let trace = std::fs::read_to_string(tmp.path().join("split.trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,cost,expansions,wall_ms,tunnel_states"
    );
    // Budget honored: summed iteration wall time stays near the budget.
    let total_ms: f64 = lines
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!(total_ms <= 4_000.0, "trace wall {total_ms} ms for a 2 s budget");
}

#[test]
fn plan_joint_baseline_respects_timeout() {
    let tmp = TempDir::new().unwrap();
    let map = gen_one_map(&tmp);
    let t0 = std::time::Instant::now();
    let out = pancover(
        &[
            "plan",
            "--algo",
            "joint-baseline",
            "--map",
            &map,
            "--start",
            "3,3,0,0",
            "--goal",
            "25,25",
            "--timeout",
            "2",
        ],
        tmp.path(),
    );
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(elapsed < 15.0, "timeout must bound the search: {elapsed:.1} s");
    // Either it solved in time (0) or timed out (3); both honor the budget.
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
}

#[test]
fn plan_no_path_exits_3() {
    let tmp = TempDir::new().unwrap();
    let map = gen_one_map(&tmp);
    // An unreachable goal: horizon too short to get across the map.
    let out = pancover(
        &[
            "plan", "--algo", "splash", "--map", &map, "--start", "2,2,0,0", "--goal", "28,28",
            "--set", "t_max=4",
        ],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_config_exits_2_missing_file_exits_4() {
    let tmp = TempDir::new().unwrap();
    let out = pancover(
        &["plan", "--algo", "splash", "--map", "nope.ccmap", "--start", "1,1", "--goal", "2,2",
          "--set", "w1=0.5"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(2), "config validation precedes I/O");

    let out = pancover(
        &["plan", "--algo", "splash", "--map", "nope.ccmap", "--start", "1,1", "--goal", "2,2"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(4), "missing map is an I/O error");
}

#[test]
fn render_is_deterministic_and_shades_overlaps() {
    let tmp = TempDir::new().unwrap();
    let map = gen_one_map(&tmp);
    let out = pancover(
        &[
            "plan", "--algo", "splash", "--map", &map, "--start", "3,3,0,0", "--goal", "25,25",
            "--H", "2", "--out", "plan.traj",
        ],
        tmp.path(),
    );
    assert!(out.status.success());

    let r1 = pancover(
        &["render", "--map", &map, "--traj", "plan.traj", "--out", "a.svg"],
        tmp.path(),
    );
    assert!(r1.status.success(), "{}", String::from_utf8_lossy(&r1.stderr));
    let r2 = pancover(
        &["render", "--map", &map, "--traj", "plan.traj", "--out", "b.svg"],
        tmp.path(),
    );
    assert!(r2.status.success());
    let a = std::fs::read(tmp.path().join("a.svg")).unwrap();
    let b = std::fs::read(tmp.path().join("b.svg")).unwrap();
    assert_eq!(a, b, "same inputs must give byte-identical SVG");
    let svg = String::from_utf8(a).unwrap();
    assert!(svg.starts_with("<svg"));

    // Map-only render works too.
    let r3 = pancover(&["render", "--map", &map, "--out", "map.svg"], tmp.path());
    assert!(r3.status.success());

    // Version-checked inputs: corrupt the trajectory header.
    let traj_text = std::fs::read_to_string(tmp.path().join("plan.traj")).unwrap();
    std::fs::write(
        tmp.path().join("bad.traj"),
        traj_text.replacen("traj v1", "traj v7", 1),
    )
    .unwrap();
    let r4 = pancover(
        &["render", "--map", &map, "--traj", "bad.traj", "--out", "c.svg"],
        tmp.path(),
    );
    assert_eq!(r4.status.code(), Some(2));
}

#[test]
fn bench_produces_csv_with_expected_arity() {
    let tmp = TempDir::new().unwrap();
    let out = pancover(
        &[
            "bench", "--maps", "2", "--pairs", "2", "--H", "0,1", "--seed", "5", "--width", "25",
            "--height", "25", "--minutes", "2", "--min-separation", "8", "--no-baseline",
            "--split-timeout", "1", "--out", "results.csv",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("median_N"), "summary block: {summary}");

    let csv = std::fs::read_to_string(tmp.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("instance_id,algorithm,H,iteration,"));
    // 4 instances x (2 H values + split final row) at minimum.
    let final_rows = lines[1..]
        .iter()
        .filter(|l| l.split(',').nth(3) == Some("0"))
        .count();
    assert_eq!(final_rows, 4 * 3);
}
