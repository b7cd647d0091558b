//! Two single-axis agents jointly steering one vehicle through a barrier
//! world, with a sixteen-level cooperation ladder.
//!
//! `geometry` and `environment` hold the world, `agent` and `comms` the
//! controllers, `simulation` runs one episode, `experiment` batches and
//! sweeps them, `metrics` summarises, `cli_io` reads configs and writes CSV.

pub mod agent;
pub mod cli_io;
pub mod comms;
pub mod environment;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod seed;
pub mod simulation;

pub use agent::{AgentParams, CoopLevel, Directive};
pub use environment::{Barrier, Environment, StatusFlags, WorldConfig};
pub use experiment::{ExperimentConfig, ExperimentSummary};
pub use geometry::{Axis, Vec2};
pub use metrics::Summary;
pub use simulation::{run, RunConfig, RunResult, Simulation};
