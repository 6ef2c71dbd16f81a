//! Coverage-aware trajectory planning for a kinodynamic robot carrying a
//! pan-only sensor.
//!
//! The library plans over a decaying priority grid: a robot state lattice
//! built from offline motion primitives, a leveled sensor graph with bounded
//! pan history, decoupled and joint-space planners, anytime local refinement
//! by iterative tunneling, and a benchmark harness that generates decayed
//! maps, random instances, and result sweeps.

pub mod baseline;
pub mod config;
pub mod costs;
pub mod error;
pub mod footprint;
pub mod harness;
pub mod heuristics;
pub mod lattice;
pub mod map;
pub mod search;
pub mod spaces;
pub mod splash;
pub mod split;
pub mod trajectory;

pub use config::PlannerConfig;
pub use costs::{CostParams, EdgeCostMode};
pub use error::{Error, Result};
pub use footprint::{Footprint, SensorGeometry};
pub use lattice::{LatticeConfig, MotionPrimitive, PrimitiveLibrary, RobotState, Waypoint};
pub use map::{CellIndex, CellState, CoverageMap, Zone};
pub use splash::PlanOutcome;
pub use trajectory::Trajectory;
