//! Batch runner and the parameter sweeps.
//!
//! Run `i` of a batch draws its world and agent streams from seeds derived
//! from `(master_seed, i)` only, so every cooperation pair in a sweep sees
//! the same sequence of worlds, and parallel and serial execution agree.

use rayon::prelude::*;
use thiserror::Error;

use crate::agent::{AgentParams, CoopLevel};
use crate::environment::{
    random_positions, random_world, Barrier, EnvError, WorldConfig, MAX_BARRIERS,
};
use crate::metrics::{summarize, Summary};
use crate::seed::{self, STREAM_WORLD};
use crate::simulation::{run, RunConfig, RunResult, SimError, DEFAULT_CAP_MS, DEFAULT_TICK_MS};

pub const DEFAULT_NRUNS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("run {run}: {source}")]
    Run { run: usize, source: SimError },
    #[error("run {run}: world generation failed: {source}")]
    World { run: usize, source: EnvError },
    #[error("invalid experiment: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BarrierMode {
    /// Reuse these barriers for every run.
    Fixed(Vec<Barrier>),
    /// Draw `nbarriers` fresh barriers for every run.
    RandomPerRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub nruns: usize,
    pub nbarriers: usize,
    pub barrier_mode: BarrierMode,
    pub master_seed: u64,
    /// Fixed mode only: redraw start and target per run.
    pub randomize_start_target: bool,
    /// Start, target and tolerances for fixed mode without randomisation;
    /// tolerances are used in every mode.
    pub base_world: WorldConfig,
    pub params: [AgentParams; 2],
    pub tick_ms: u32,
    pub cap_ms: u32,
    pub parallel: bool,
}

impl ExperimentConfig {
    /// Random barriers per run, uniformly drawn start and target.
    pub fn random(nruns: usize, nbarriers: usize, master_seed: u64) -> Self {
        let base =
            random_world(&mut seed::rng(master_seed), 0).expect("empty world always generates");
        Self {
            nruns,
            nbarriers,
            barrier_mode: BarrierMode::RandomPerRun,
            master_seed,
            randomize_start_target: true,
            base_world: base,
            params: [AgentParams::default(); 2],
            tick_ms: DEFAULT_TICK_MS,
            cap_ms: DEFAULT_CAP_MS,
            parallel: true,
        }
    }

    /// Fixed barriers taken from `world`, with optional start/target redraws.
    pub fn fixed(
        world: WorldConfig,
        nruns: usize,
        master_seed: u64,
        randomize_start_target: bool,
    ) -> Self {
        Self {
            nruns,
            nbarriers: world.barriers.len(),
            barrier_mode: BarrierMode::Fixed(world.barriers.clone()),
            master_seed,
            randomize_start_target,
            base_world: world,
            params: [AgentParams::default(); 2],
            tick_ms: DEFAULT_TICK_MS,
            cap_ms: DEFAULT_CAP_MS,
            parallel: true,
        }
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.nruns == 0 {
            return Err(ExperimentError::Invalid("nruns must be at least 1".into()));
        }
        if self.nbarriers > MAX_BARRIERS {
            return Err(ExperimentError::Invalid(format!(
                "nbarriers {} exceeds {MAX_BARRIERS}",
                self.nbarriers
            )));
        }
        Ok(())
    }

    /// World for run `index`.
    pub fn world_for_run(&self, index: usize) -> Result<WorldConfig, ExperimentError> {
        let run_seed = self.run_seed(index);
        let mut rng = seed::rng(seed::derive(run_seed, STREAM_WORLD));
        let tol = self.base_world.target_tolerance;
        let radius = self.base_world.vehicle_radius;
        let world = match &self.barrier_mode {
            BarrierMode::RandomPerRun => random_world(&mut rng, self.nbarriers).map(|mut w| {
                w.target_tolerance = tol;
                w.vehicle_radius = radius;
                w
            }),
            BarrierMode::Fixed(barriers) if self.randomize_start_target => {
                random_positions(&mut rng, barriers, tol, radius)
            }
            BarrierMode::Fixed(barriers) => Ok(WorldConfig {
                barriers: barriers.clone(),
                ..self.base_world.clone()
            }),
        };
        world.map_err(|source| ExperimentError::World { run: index, source })
    }

    pub fn run_seed(&self, index: usize) -> u64 {
        seed::derive(self.master_seed, index as u64)
    }

    pub fn run_config(
        &self,
        index: usize,
        coop_x: CoopLevel,
        coop_y: CoopLevel,
    ) -> Result<RunConfig, ExperimentError> {
        Ok(RunConfig {
            world: self.world_for_run(index)?,
            coop: [coop_x, coop_y],
            params: self.params,
            seed: self.run_seed(index),
            tick_ms: self.tick_ms,
            cap_ms: self.cap_ms,
            record_trace: false,
        })
    }
}

pub fn run_batch(
    config: &ExperimentConfig,
    coop_x: CoopLevel,
    coop_y: CoopLevel,
) -> Result<Vec<RunResult>, ExperimentError> {
    config.check()?;
    let one = |i: usize| -> Result<RunResult, ExperimentError> {
        let rc = config.run_config(i, coop_x, coop_y)?;
        run(&rc).map_err(|source| ExperimentError::Run { run: i, source })
    };
    if config.parallel {
        (0..config.nruns).into_par_iter().map(one).collect()
    } else {
        (0..config.nruns).map(one).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub coop_x: CoopLevel,
    pub coop_y: CoopLevel,
    pub nbarriers: usize,
    pub summary: Summary,
}

pub fn summarize_pair(
    config: &ExperimentConfig,
    coop_x: CoopLevel,
    coop_y: CoopLevel,
) -> Result<ExperimentSummary, ExperimentError> {
    let results = run_batch(config, coop_x, coop_y)?;
    Ok(ExperimentSummary {
        coop_x,
        coop_y,
        nbarriers: config.nbarriers,
        summary: summarize(&results),
    })
}

fn sweep_pairs(
    config: &ExperimentConfig,
    pairs: &[(CoopLevel, CoopLevel)],
) -> Result<Vec<ExperimentSummary>, ExperimentError> {
    if config.parallel {
        pairs
            .par_iter()
            .map(|&(x, y)| summarize_pair(config, x, y))
            .collect()
    } else {
        pairs
            .iter()
            .map(|&(x, y)| summarize_pair(config, x, y))
            .collect()
    }
}

/// All sixteen levels with both agents matched, in `0000..1111` index order.
pub fn sweep_matched(config: &ExperimentConfig) -> Result<Vec<ExperimentSummary>, ExperimentError> {
    let pairs: Vec<_> = CoopLevel::all().map(|c| (c, c)).collect();
    sweep_pairs(config, &pairs)
}

/// All ordered pairs: Y level in the outer loop, X level in the inner loop.
pub fn sweep_full(config: &ExperimentConfig) -> Result<Vec<ExperimentSummary>, ExperimentError> {
    let pairs: Vec<_> = CoopLevel::all()
        .flat_map(|y| CoopLevel::all().map(move |x| (x, y)))
        .collect();
    sweep_pairs(config, &pairs)
}

/// Both pairs at 0, 1, 2 and 3 random barriers; rows ordered by count, then pair.
pub fn sweep_barriers(
    config: &ExperimentConfig,
    pair_a: (CoopLevel, CoopLevel),
    pair_b: (CoopLevel, CoopLevel),
) -> Result<Vec<ExperimentSummary>, ExperimentError> {
    let mut out = Vec::with_capacity(8);
    for n in 0..=MAX_BARRIERS {
        let cfg = ExperimentConfig {
            nbarriers: n,
            barrier_mode: BarrierMode::RandomPerRun,
            ..config.clone()
        };
        out.extend(sweep_pairs(&cfg, &[pair_a, pair_b])?);
    }
    Ok(out)
}
