//! Python bindings for the `coopnav` simulator.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use coopnav::agent::CoopLevel as CoreLevel;
use coopnav::cli_io::{self, ConfigFile};
use coopnav::environment::{random_world, Barrier, WorldConfig};
use coopnav::experiment::{self, ExperimentConfig, ExperimentSummary};
use coopnav::geometry::Vec2;
use coopnav::metrics::{self, Summary};
use coopnav::seed;
use coopnav::simulation::{self, RunConfig, RunResult as CoreResult};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn level(text: &str) -> PyResult<CoreLevel> {
    text.parse().map_err(value_err)
}

/// Cooperation level written as four bits `"bcde"`.
#[pyclass(frozen, eq, hash, from_py_object)]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct CoopLevel(CoreLevel);

#[pymethods]
impl CoopLevel {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        level(text).map(Self)
    }

    /// All sixteen levels in heatmap order.
    #[staticmethod]
    fn all() -> Vec<CoopLevel> {
        CoreLevel::all().map(Self).collect()
    }

    #[getter]
    fn index(&self) -> u8 {
        self.0.index()
    }

    #[getter]
    fn random_move(&self) -> bool {
        self.0.random_move()
    }

    #[getter]
    fn arrived_stuck(&self) -> bool {
        self.0.arrived_stuck()
    }

    #[getter]
    fn stuck_stuck(&self) -> bool {
        self.0.stuck_stuck()
    }

    #[getter]
    fn access_gate(&self) -> bool {
        self.0.access_gate()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("CoopLevel('{}')", self.0)
    }
}

/// Start, target and up to three barriers given as `(x, y, rotation, length)`.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct World(WorldConfig);

#[pymethods]
impl World {
    #[new]
    #[pyo3(signature = (target, start, barriers = Vec::new(), target_tolerance = 0.02, vehicle_radius = 0.01))]
    fn new(
        target: (f64, f64),
        start: (f64, f64),
        barriers: Vec<(f64, f64, f64, f64)>,
        target_tolerance: f64,
        vehicle_radius: f64,
    ) -> PyResult<Self> {
        let w = WorldConfig {
            target: Vec2::new(target.0, target.1),
            vehicle_start: Vec2::new(start.0, start.1),
            barriers: barriers
                .into_iter()
                .map(|(x, y, r, l)| Barrier::new(x, y, r, l))
                .collect(),
            target_tolerance,
            vehicle_radius,
        };
        w.validate().map_err(value_err)?;
        Ok(Self(w))
    }

    /// Random world drawn from `seed`.
    #[staticmethod]
    #[pyo3(signature = (seed, nbarriers = 3))]
    fn random(seed: u64, nbarriers: usize) -> PyResult<Self> {
        random_world(&mut seed::rng(seed), nbarriers)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn target(&self) -> (f64, f64) {
        (self.0.target.x, self.0.target.y)
    }

    #[getter]
    fn start(&self) -> (f64, f64) {
        (self.0.vehicle_start.x, self.0.vehicle_start.y)
    }

    #[getter]
    fn barriers(&self) -> Vec<(f64, f64, f64, f64)> {
        self.0
            .barriers
            .iter()
            .map(|b| (b.center.x, b.center.y, b.rotation, b.length))
            .collect()
    }

    /// Grid reachability of the target from the start.
    fn solvable(&self) -> PyResult<bool> {
        coopnav::environment::solvable(&self.0).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "World(target={:?}, start={:?}, barriers={})",
            self.target(),
            self.start(),
            self.0.barriers.len()
        )
    }
}

#[pyclass(frozen)]
struct RunResult(CoreResult);

#[pymethods]
impl RunResult {
    #[getter]
    fn solved(&self) -> bool {
        self.0.solved
    }

    /// Solution time in ms, `None` for a run that did not finish.
    #[getter]
    fn st_ms(&self) -> Option<u64> {
        self.0.st_ms
    }

    #[getter]
    fn comm_pct_x(&self) -> f64 {
        self.0.comm_pct_x
    }

    #[getter]
    fn comm_pct_y(&self) -> f64 {
        self.0.comm_pct_y
    }

    #[getter]
    fn ticks(&self) -> u64 {
        self.0.ticks
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn final_position(&self) -> (f64, f64) {
        (self.0.final_position.x, self.0.final_position.y)
    }

    /// Per-tick trace as CSV text, if recorded.
    fn trace_csv(&self) -> Option<String> {
        self.0.trace.as_deref().map(cli_io::emit_trace_csv)
    }

    fn __repr__(&self) -> String {
        let solved = if self.0.solved { "True" } else { "False" };
        let st = self
            .0
            .st_ms
            .map_or_else(|| "None".to_string(), |v| v.to_string());
        format!(
            "RunResult(solved={solved}, st_ms={st}, seed={})",
            self.0.seed
        )
    }
}

fn summary_dict<'py>(py: Python<'py>, s: &Summary) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("nruns", s.nruns)?;
    d.set_item("dnf", s.dnf)?;
    d.set_item("mean_st_ms", s.mean_st_ms)?;
    d.set_item("median_st_ms", s.median_st_ms)?;
    d.set_item("st_sd_ms", s.st_sd_ms)?;
    d.set_item("gm", s.gm)?;
    d.set_item("gm_se", s.gm_se)?;
    d.set_item("gm_ci95", s.gm_ci95)?;
    d.set_item("comm_pct_x", s.comm_x.mean)?;
    d.set_item("comm_pct_y", s.comm_y.mean)?;
    d.set_item("comm_pct_total", s.comm_pct_total())?;
    d.set_item("pearson_r", s.pearson_r)?;
    Ok(d)
}

fn row_dict<'py>(py: Python<'py>, row: &ExperimentSummary) -> PyResult<Bound<'py, PyDict>> {
    let d = summary_dict(py, &row.summary)?;
    d.set_item("coop_x", row.coop_x.to_string())?;
    d.set_item("coop_y", row.coop_y.to_string())?;
    d.set_item("nbarriers", row.nbarriers)?;
    Ok(d)
}

fn experiment(
    nruns: usize,
    nbarriers: usize,
    seed: u64,
    world: Option<&World>,
    randomize: bool,
) -> ExperimentConfig {
    match world {
        Some(w) => ExperimentConfig::fixed(w.0.clone(), nruns, seed, randomize),
        None => ExperimentConfig::random(nruns, nbarriers, seed),
    }
}

/// Run one episode.
#[pyfunction]
#[pyo3(signature = (world, coop_x, coop_y, seed = 1, trace = false))]
fn run(
    py: Python<'_>,
    world: &World,
    coop_x: &str,
    coop_y: &str,
    seed: u64,
    trace: bool,
) -> PyResult<RunResult> {
    let mut cfg = RunConfig::new(world.0.clone(), level(coop_x)?, level(coop_y)?, seed);
    cfg.record_trace = trace;
    py.detach(|| simulation::run(&cfg))
        .map(RunResult)
        .map_err(runtime_err)
}

/// Run a batch; random worlds unless a fixed `world` is given.
#[pyfunction]
#[pyo3(signature = (coop_x, coop_y, nruns = 200, nbarriers = 3, seed = 1, world = None, randomize_start_target = true))]
#[allow(clippy::too_many_arguments)]
fn run_batch(
    py: Python<'_>,
    coop_x: &str,
    coop_y: &str,
    nruns: usize,
    nbarriers: usize,
    seed: u64,
    world: Option<PyRef<'_, World>>,
    randomize_start_target: bool,
) -> PyResult<Vec<RunResult>> {
    let cfg = experiment(
        nruns,
        nbarriers,
        seed,
        world.as_deref(),
        randomize_start_target,
    );
    let (x, y) = (level(coop_x)?, level(coop_y)?);
    let results = py
        .detach(|| experiment::run_batch(&cfg, x, y))
        .map_err(runtime_err)?;
    Ok(results.into_iter().map(RunResult).collect())
}

/// Summary statistics of a list of run results.
#[pyfunction]
fn summarize<'py>(
    py: Python<'py>,
    results: Vec<PyRef<'py, RunResult>>,
) -> PyResult<Bound<'py, PyDict>> {
    let owned: Vec<CoreResult> = results.iter().map(|r| r.0.clone()).collect();
    summary_dict(py, &metrics::summarize(&owned))
}

/// Sixteen matched levels, one dict per level.
#[pyfunction]
#[pyo3(signature = (nruns = 200, nbarriers = 3, seed = 1))]
fn sweep_matched<'py>(
    py: Python<'py>,
    nruns: usize,
    nbarriers: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let cfg = ExperimentConfig::random(nruns, nbarriers, seed);
    let rows = py
        .detach(|| experiment::sweep_matched(&cfg))
        .map_err(runtime_err)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

#[pyfunction]
fn goodness(mean_st_ms: f64, dnf: usize, nruns: usize) -> PyResult<f64> {
    metrics::goodness(mean_st_ms, dnf, nruns)
        .map(|g| g.0)
        .map_err(value_err)
}

#[pyfunction]
fn pearson(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<f64> {
    metrics::pearson(&xs, &ys).map_err(value_err)
}

/// Parsed TOML configuration.
#[pyclass(frozen)]
struct Config(ConfigFile);

#[pymethods]
impl Config {
    #[getter]
    fn world(&self) -> World {
        World(self.0.world_config())
    }

    fn to_toml(&self) -> String {
        cli_io::to_toml(&self.0)
    }

    /// One episode with the configured agents and master seed.
    fn run(&self, py: Python<'_>) -> PyResult<RunResult> {
        let cfg = self.0.run_config();
        py.detach(|| simulation::run(&cfg))
            .map(RunResult)
            .map_err(runtime_err)
    }

    /// The configured batch.
    fn batch(&self, py: Python<'_>) -> PyResult<Vec<RunResult>> {
        let cfg = self.0.experiment_config();
        let (x, y) = (self.0.agents.x.coop, self.0.agents.y.coop);
        let results = py
            .detach(|| experiment::run_batch(&cfg, x, y))
            .map_err(runtime_err)?;
        Ok(results.into_iter().map(RunResult).collect())
    }
}

#[pyfunction]
fn parse_config(text: &str) -> PyResult<Config> {
    cli_io::parse_config(text).map(Config).map_err(value_err)
}

#[pymodule]
fn coopnav_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<CoopLevel>()?;
    m.add_class::<World>()?;
    m.add_class::<RunResult>()?;
    m.add_class::<Config>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_matched, m)?)?;
    m.add_function(wrap_pyfunction!(goodness, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    Ok(())
}
