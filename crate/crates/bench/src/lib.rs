//! Shared fixtures for the criterion benchmarks.

use pancover_core::harness::{gen_decayed_map, MapGenParams};
use pancover_core::lattice::generate_primitives;
use pancover_core::{CoverageMap, PlannerConfig, PrimitiveLibrary, RobotState};

pub struct Fixture {
    pub cfg: PlannerConfig,
    pub lib: PrimitiveLibrary,
    pub map: CoverageMap,
    pub start: RobotState,
}

pub fn desk_fixture() -> Fixture {
    let cfg = PlannerConfig::default();
    let lib = generate_primitives(&cfg.lattice).expect("default lattice generates");
    let params = MapGenParams {
        width: 60,
        height: 60,
        sim_minutes: 5,
        snapshot_times: vec![300],
        seed: 42,
        ..Default::default()
    };
    let map = gen_decayed_map(&params, &cfg.geometry)
        .expect("map generation")
        .pop()
        .unwrap();
    let start = RobotState {
        x: 5.5,
        y: 5.5,
        theta_bin: 2,
        v_idx: 0,
        t: map.clock(),
    };
    Fixture {
        cfg,
        lib,
        map,
        start,
    }
}
