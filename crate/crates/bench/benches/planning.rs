use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pancover_bench::desk_fixture;
use pancover_core::footprint::footprint_cells;
use pancover_core::lattice::generate_primitives;
use pancover_core::search::SearchLimits;
use pancover_core::spaces::SensorPlanProblem;
use pancover_core::splash::{plan_robot, plan_sensor, splash};
use pancover_core::CellIndex;

fn bench_footprint(c: &mut Criterion) {
    let fx = desk_fixture();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("footprint_rasterize", |b| {
        b.iter_batched(
            || {
                (
                    rng.gen_range(6.0..54.0),
                    rng.gen_range(6.0..54.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            },
            |(x, y, psi)| footprint_cells(&fx.map, x, y, 0.0, psi, &fx.cfg.geometry).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_primitive_generation(c: &mut Criterion) {
    let fx = desk_fixture();
    c.bench_function("generate_primitives", |b| {
        b.iter(|| generate_primitives(&fx.cfg.lattice).unwrap())
    });
}

fn bench_robot_plan(c: &mut Criterion) {
    let fx = desk_fixture();
    let goal = CellIndex::new(50, 50);
    c.bench_function("plan_robot_60x60", |b| {
        b.iter(|| {
            plan_robot(fx.start, goal, &fx.map, &fx.lib, &fx.cfg, &SearchLimits::none()).unwrap()
        })
    });
}

fn bench_sensor_plan(c: &mut Criterion) {
    let fx = desk_fixture();
    let goal = CellIndex::new(50, 50);
    let robot = plan_robot(fx.start, goal, &fx.map, &fx.lib, &fx.cfg, &SearchLimits::none())
        .unwrap()
        .found()
        .unwrap();
    let mut group = c.benchmark_group("plan_sensor");
    for h in [0usize, 3] {
        group.bench_function(format!("H{h}"), |b| {
            let problem = SensorPlanProblem {
                waypoints: robot.waypoints.clone(),
                psi0: 2,
                history_size: h,
                n_psi: fx.cfg.geometry.n_psi,
            pan_limits: None,
            };
            b.iter(|| plan_sensor(&problem, &fx.map, &fx.cfg.geometry, &fx.cfg.costs).unwrap())
        });
    }
    group.finish();
}

fn bench_splash(c: &mut Criterion) {
    let fx = desk_fixture();
    let goal = CellIndex::new(50, 50);
    c.bench_function("splash_H3_60x60", |b| {
        b.iter(|| splash(fx.start, goal, 2, 3, &fx.map, &fx.lib, &fx.cfg).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_footprint, bench_primitive_generation, bench_robot_plan, bench_sensor_plan, bench_splash
}
criterion_main!(benches);
