//! Configuration files and CSV output.
//!
//! Configs are TOML documents with three sections:
//!
//! ```toml
//! [world]
//! target = [0.8, 0.5]
//! vehicle_start = [0.2, 0.5]
//! barriers = [[0.5, 0.5, 1.5707963, 0.4]]   # x, y, rotation (rad), length
//! target_tolerance = 0.02
//! vehicle_radius = 0.01
//!
//! [agents.x]
//! coop = "0110"
//! gain = 0.01
//! backoff_ms = 1000
//! target_view = true
//!
//! [agents.y]
//! coop = "0110"
//!
//! [experiment]
//! nruns = 200
//! nbarriers = 3
//! barrier_mode = "random"     # or "fixed"
//! master_seed = 1
//! randomize_start_target = true
//! ```
//!
//! Only `world.target` and `world.vehicle_start` are required. Unknown keys
//! are rejected. Decimal CSV fields carry six significant digits.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentParams, CoopLevel, DEFAULT_BACKOFF_MS, DEFAULT_GAIN, DEFAULT_MAX_STEP};
use crate::environment::{
    Barrier, EnvError, WorldConfig, DEFAULT_TARGET_TOLERANCE, DEFAULT_VEHICLE_RADIUS, MAX_BARRIERS,
};
use crate::experiment::{BarrierMode, ExperimentConfig, ExperimentSummary, DEFAULT_NRUNS};
use crate::geometry::Vec2;
use crate::simulation::{RunConfig, RunResult, TraceRow, DEFAULT_CAP_MS, DEFAULT_TICK_MS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

fn default_tolerance() -> f64 {
    DEFAULT_TARGET_TOLERANCE
}
fn default_radius() -> f64 {
    DEFAULT_VEHICLE_RADIUS
}
fn default_gain() -> f64 {
    DEFAULT_GAIN
}
fn default_backoff() -> u32 {
    DEFAULT_BACKOFF_MS
}
fn default_max_step() -> f64 {
    DEFAULT_MAX_STEP
}
fn default_true() -> bool {
    true
}
fn default_nruns() -> usize {
    DEFAULT_NRUNS
}
fn default_nbarriers() -> usize {
    MAX_BARRIERS
}
fn default_seed() -> u64 {
    1
}
fn default_tick() -> u32 {
    DEFAULT_TICK_MS
}
fn default_cap() -> u32 {
    DEFAULT_CAP_MS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldSection {
    pub target: [f64; 2],
    pub vehicle_start: [f64; 2],
    /// Rows of `[x, y, rotation, length]`.
    #[serde(default)]
    pub barriers: Vec<Vec<f64>>,
    #[serde(default = "default_tolerance")]
    pub target_tolerance: f64,
    #[serde(default = "default_radius")]
    pub vehicle_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    #[serde(default)]
    pub coop: CoopLevel,
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u32,
    #[serde(default = "default_true")]
    pub target_view: bool,
    #[serde(default = "default_max_step")]
    pub max_step: f64,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            coop: CoopLevel::NONE,
            gain: DEFAULT_GAIN,
            backoff_ms: DEFAULT_BACKOFF_MS,
            target_view: true,
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

impl AgentSection {
    pub fn params(&self) -> AgentParams {
        AgentParams {
            gain: self.gain,
            backoff_ms: self.backoff_ms,
            target_view: self.target_view,
            max_step: self.max_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsSection {
    #[serde(default)]
    pub x: AgentSection,
    #[serde(default)]
    pub y: AgentSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierModeKey {
    Fixed,
    #[default]
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_nruns")]
    pub nruns: usize,
    #[serde(default = "default_nbarriers")]
    pub nbarriers: usize,
    #[serde(default)]
    pub barrier_mode: BarrierModeKey,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_true")]
    pub randomize_start_target: bool,
    #[serde(default = "default_tick")]
    pub tick_ms: u32,
    #[serde(default = "default_cap")]
    pub cap_ms: u32,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            nruns: DEFAULT_NRUNS,
            nbarriers: MAX_BARRIERS,
            barrier_mode: BarrierModeKey::Random,
            master_seed: 1,
            randomize_start_target: true,
            tick_ms: DEFAULT_TICK_MS,
            cap_ms: DEFAULT_CAP_MS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub world: WorldSection,
    #[serde(default)]
    pub agents: AgentsSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

/// 1-based line of `key = ...` inside `[section]`, if present.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
            current = h.trim().to_string();
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Checker<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl Checker<'_> {
    fn fail(&mut self, section: &str, key: &str, message: String) {
        let line = locate(self.text, section, key).or_else(|| locate(self.text, "", section));
        self.errors.push(ConfigError {
            line,
            message: format!("{section}.{key}: {message}"),
        });
    }

    fn range(&mut self, section: &str, key: &str, ok: bool, want: &str, got: impl fmt::Display) {
        if !ok {
            self.fail(section, key, format!("must be {want}, got {got}"));
        }
    }
}

impl ConfigFile {
    /// Validate every value and the assembled world.
    fn check(&self, text: &str) -> Result<(), ConfigErrors> {
        let mut c = Checker {
            text,
            errors: Vec::new(),
        };
        let w = &self.world;
        for (key, p) in [("target", w.target), ("vehicle_start", w.vehicle_start)] {
            let ok = p.iter().all(|v| (0.0..=1.0).contains(v));
            c.range("world", key, ok, "inside [0, 1]^2", format!("{p:?}"));
        }
        c.range(
            "world",
            "barriers",
            w.barriers.len() <= MAX_BARRIERS,
            "at most 3 rows",
            w.barriers.len(),
        );
        for (i, row) in w.barriers.iter().enumerate() {
            if row.len() != 4 {
                c.fail("world", "barriers", format!("malformed barrier row {i}: expected [x, y, rotation, length], got {} values", row.len()));
                continue;
            }
            c.range(
                "world",
                "barriers",
                (0.0..PI).contains(&row[2]),
                "rotation in [0, pi)",
                row[2],
            );
            c.range(
                "world",
                "barriers",
                row[3] > 0.0 && row[3] <= 1.0,
                "length in (0, 1]",
                row[3],
            );
        }
        let tol = w.target_tolerance;
        c.range(
            "world",
            "target_tolerance",
            tol > 0.0 && tol < 1.0,
            "in (0, 1)",
            tol,
        );
        let rad = w.vehicle_radius;
        c.range(
            "world",
            "vehicle_radius",
            rad > 0.0 && rad < 0.5,
            "in (0, 0.5)",
            rad,
        );

        for (name, a) in [("agents.x", &self.agents.x), ("agents.y", &self.agents.y)] {
            c.range(
                name,
                "gain",
                a.gain > 0.0 && a.gain < 1.0,
                "in (0, 1)",
                a.gain,
            );
            c.range(
                name,
                "backoff_ms",
                a.backoff_ms > 0,
                "positive",
                a.backoff_ms,
            );
            c.range(
                name,
                "max_step",
                a.max_step > 0.0 && a.max_step.is_finite(),
                "positive",
                a.max_step,
            );
        }

        let e = &self.experiment;
        c.range("experiment", "nruns", e.nruns >= 1, "at least 1", e.nruns);
        c.range(
            "experiment",
            "nbarriers",
            e.nbarriers <= MAX_BARRIERS,
            "in [0, 3]",
            e.nbarriers,
        );
        c.range(
            "experiment",
            "tick_ms",
            e.tick_ms > 0,
            "positive",
            e.tick_ms,
        );
        let cap_ok = e.cap_ms > 0 && e.tick_ms > 0 && e.cap_ms.is_multiple_of(e.tick_ms);
        c.range(
            "experiment",
            "cap_ms",
            cap_ok,
            "a positive multiple of tick_ms",
            e.cap_ms,
        );
        if e.master_seed > i64::MAX as u64 {
            c.fail(
                "experiment",
                "master_seed",
                "must fit a TOML integer".into(),
            );
        }

        if c.errors.is_empty() {
            match self.world_config().validate() {
                Ok(_) => {}
                Err(EnvError::StartColliding { .. }) => c.fail(
                    "world",
                    "vehicle_start",
                    "vehicle starts in collision".into(),
                ),
                Err(EnvError::TargetTooClose { .. }) => c.fail(
                    "world",
                    "target",
                    "target lies within tolerance of a barrier".into(),
                ),
                Err(other) => c.fail("world", "barriers", other.to_string()),
            }
        }
        if c.errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(c.errors))
        }
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let text = to_toml(self);
        self.check(&text)
    }

    pub fn world_config(&self) -> WorldConfig {
        let w = &self.world;
        WorldConfig {
            target: Vec2::new(w.target[0], w.target[1]),
            vehicle_start: Vec2::new(w.vehicle_start[0], w.vehicle_start[1]),
            barriers: w
                .barriers
                .iter()
                .filter(|r| r.len() == 4)
                .map(|r| Barrier::new(r[0], r[1], r[2], r[3]))
                .collect(),
            target_tolerance: w.target_tolerance,
            vehicle_radius: w.vehicle_radius,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            world: self.world_config(),
            coop: [self.agents.x.coop, self.agents.y.coop],
            params: [self.agents.x.params(), self.agents.y.params()],
            seed: self.experiment.master_seed,
            tick_ms: self.experiment.tick_ms,
            cap_ms: self.experiment.cap_ms,
            record_trace: false,
        }
    }

    pub fn experiment_config(&self) -> ExperimentConfig {
        let e = &self.experiment;
        let world = self.world_config();
        ExperimentConfig {
            nruns: e.nruns,
            nbarriers: match e.barrier_mode {
                BarrierModeKey::Random => e.nbarriers,
                BarrierModeKey::Fixed => world.barriers.len(),
            },
            barrier_mode: match e.barrier_mode {
                BarrierModeKey::Random => BarrierMode::RandomPerRun,
                BarrierModeKey::Fixed => BarrierMode::Fixed(world.barriers.clone()),
            },
            master_seed: e.master_seed,
            randomize_start_target: e.randomize_start_target,
            base_world: world,
            params: [self.agents.x.params(), self.agents.y.params()],
            tick_ms: e.tick_ms,
            cap_ms: e.cap_ms,
            parallel: true,
        }
    }

    /// Replace the world with `world`, keeping everything else.
    pub fn set_world(&mut self, world: &WorldConfig) {
        self.world = WorldSection {
            target: [world.target.x, world.target.y],
            vehicle_start: [world.vehicle_start.x, world.vehicle_start.y],
            barriers: world
                .barriers
                .iter()
                .map(|b| vec![b.center.x, b.center.y, b.rotation, b.length])
                .collect(),
            target_tolerance: world.target_tolerance,
            vehicle_radius: world.vehicle_radius,
        };
    }
}

pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigErrors> {
    let cfg: ConfigFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        ConfigErrors(vec![ConfigError {
            line,
            message: e.message().trim().to_string(),
        }])
    })?;
    cfg.check(text)?;
    Ok(cfg)
}

pub fn to_toml(cfg: &ConfigFile) -> String {
    toml::to_string(cfg).expect("config is always representable as TOML")
}

/// Format like C's `%.6g`.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return String::new();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (5 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(sig6).unwrap_or_default()
}

pub const RUN_CSV_HEADER: &str = "run,solved,st_ms,comm_pct_x,comm_pct_y,seed";

pub fn emit_run_csv(results: &[RunResult]) -> String {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for (i, r) in results.iter().enumerate() {
        let st = r.st_ms.map(|s| s.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{i},{},{st},{},{},{}",
            r.solved,
            sig6(r.comm_pct_x),
            sig6(r.comm_pct_y),
            r.seed
        );
    }
    out
}

pub const SUMMARY_CSV_HEADER: &str = "coop_x,coop_y,nbarriers,nruns,dnf,mean_st_ms,median_st_ms,gm,gm_se,gm_ci_lo,gm_ci_hi,\
comm_pct_x,comm_pct_x_sd,comm_pct_x_q1,comm_pct_x_q3,comm_pct_y,comm_pct_y_sd,comm_pct_y_q1,comm_pct_y_q3,pearson_r";

pub fn emit_summary_csv(summaries: &[ExperimentSummary]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for s in summaries {
        let m = &s.summary;
        let (lo, hi) = m.gm_ci95.map_or((None, None), |(a, b)| (Some(a), Some(b)));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.coop_x,
            s.coop_y,
            s.nbarriers,
            m.nruns,
            m.dnf,
            opt(m.mean_st_ms),
            opt(m.median_st_ms),
            opt(m.gm),
            opt(m.gm_se),
            opt(lo),
            opt(hi),
            sig6(m.comm_x.mean),
            sig6(m.comm_x.std_dev),
            sig6(m.comm_x.q1),
            sig6(m.comm_x.q3),
            sig6(m.comm_y.mean),
            sig6(m.comm_y.std_dev),
            sig6(m.comm_y.q1),
            sig6(m.comm_y.q3),
            opt(m.pearson_r),
        );
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeatmapError {
    #[error("heatmap cell {coop_x}+{coop_y} is missing")]
    MissingCell {
        coop_x: CoopLevel,
        coop_y: CoopLevel,
    },
}

pub const HEATMAP_HEADER: &str = "coop_x,coop_y,gm,dnf,mean_st_ms,comm_pct_total";

/// Full 16x16 grid, Y level outer and X level inner, both in heatmap order.
pub fn emit_heatmap(summaries: &[ExperimentSummary]) -> Result<String, HeatmapError> {
    let cells: HashMap<(CoopLevel, CoopLevel), &ExperimentSummary> = summaries
        .iter()
        .map(|s| ((s.coop_x, s.coop_y), s))
        .collect();
    let mut out = String::from(HEATMAP_HEADER);
    out.push('\n');
    for coop_y in CoopLevel::all() {
        for coop_x in CoopLevel::all() {
            let s = cells
                .get(&(coop_x, coop_y))
                .ok_or(HeatmapError::MissingCell { coop_x, coop_y })?;
            let m = &s.summary;
            let _ = writeln!(
                out,
                "{coop_x},{coop_y},{},{},{},{}",
                opt(m.gm),
                m.dnf,
                opt(m.mean_st_ms),
                sig6(m.comm_pct_total())
            );
        }
    }
    Ok(out)
}

pub const TRACE_HEADER: &str =
    "tick,x,y,directive_x,directive_y,stuck_x,access_x,arrived_x,edge_x,\
stuck_y,access_y,arrived_y,edge_y,comm_x,comm_y";

pub fn emit_trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    let b = |v: bool| if v { '1' } else { '0' };
    for r in rows {
        let [fx, fy] = r.flags;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.tick,
            sig6(r.vehicle.x),
            sig6(r.vehicle.y),
            r.directives[0].as_str(),
            r.directives[1].as_str(),
            b(fx.stuck),
            b(fx.access),
            b(fx.arrived),
            b(fx.collided_edge),
            b(fy.stuck),
            b(fy.access),
            b(fy.arrived),
            b(fy.collided_edge),
            b(r.comm[0]),
            b(r.comm[1]),
        );
    }
    out
}

pub const HISTOGRAM_HEADER: &str = "bin_ms,count";

pub fn emit_histogram_csv(bins: &[(u64, usize)]) -> String {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    for (bin, count) in bins {
        let _ = writeln!(out, "{bin},{count}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::summarize;

    const MINIMAL: &str = "[world]\ntarget = [0.8, 0.5]\nvehicle_start = [0.2, 0.5]\n";

    fn solved(st: u64) -> RunResult {
        RunResult {
            solved: true,
            st_ms: Some(st),
            comm_pct_x: 0.0146092,
            comm_pct_y: 12.5,
            ticks: st / 10,
            seed: 77,
            final_position: Vec2::default(),
            trace: None,
        }
    }

    #[test]
    fn minimal_config_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.experiment.nruns, 200);
        assert_eq!(cfg.agents.x.gain, 0.01);
        let again = parse_config(&to_toml(&cfg)).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn range_errors_are_line_anchored() {
        let text = format!("{MINIMAL}\n[experiment]\nnbarriers = 4\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, Some(6));
        assert!(err.0[0].message.contains("nbarriers"));

        let text = format!("{MINIMAL}[agents.x]\ngain = 0.0\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.0[0].line, Some(5));
        assert!(err.0[0].message.contains("gain"));
    }

    #[test]
    fn structural_errors() {
        let err = parse_config("[world]\ntarget = [0.8, 0.5]\n").unwrap_err();
        assert!(err.to_string().contains("vehicle_start"), "{err}");

        let text = format!("{MINIMAL}barriers = [[0.5, 0.5, 0.3]]\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("malformed barrier row 0"), "{err}");
        assert_eq!(err.0[0].line, Some(4));

        let text = format!("{MINIMAL}colour = \"red\"\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.0[0].line, Some(4), "{err}");

        let text = format!("{MINIMAL}[agents.y]\ncoop = \"0120\"\n");
        assert!(parse_config(&text).is_err());

        let text = "[world]\ntarget = [0.8, 0.5]\nvehicle_start = [0.5, 0.5]\nbarriers = [[0.5, 0.5, 0.0, 0.3]]\n";
        let err = parse_config(text).unwrap_err();
        assert_eq!(err.0[0].line, Some(3), "{err}");
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1234.0), "1234");
        assert_eq!(sig6(12.345678), "12.3457");
        assert_eq!(sig6(0.0146092), "0.0146092");
        assert_eq!(sig6(100.0), "100");
        assert_eq!(sig6(1234567.0), "1.23457e+06");
        assert_eq!(sig6(0.00001234), "1.234e-05");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(999999.7), "1e+06");
    }

    #[test]
    fn run_csv_rows() {
        assert_eq!(emit_run_csv(&[]), format!("{RUN_CSV_HEADER}\n"));
        let dnf = RunResult {
            solved: false,
            st_ms: None,
            ..solved(0)
        };
        let csv = emit_run_csv(&[solved(1234), dnf]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "0,true,1234,0.0146092,12.5,77");
        assert_eq!(lines[2], "1,false,,0.0146092,12.5,77");
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn heatmap_layout() {
        let summary = summarize(&[RunResult {
            solved: false,
            st_ms: None,
            ..solved(0)
        }]);
        let mut all: Vec<ExperimentSummary> = CoopLevel::all()
            .flat_map(|y| CoopLevel::all().map(move |x| (x, y)))
            .map(|(coop_x, coop_y)| ExperimentSummary {
                coop_x,
                coop_y,
                nbarriers: 3,
                summary: summary.clone(),
            })
            .collect();
        let csv = emit_heatmap(&all).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 257);
        assert_eq!(lines[0], HEATMAP_HEADER);
        assert!(lines[1].starts_with("0000,0000,,1,"));
        assert!(lines[2].starts_with("1000,0000,"));
        assert!(lines[5].starts_with("0010,0000,"));
        assert!(lines[17].starts_with("0000,1000,"));
        assert!(!csv.contains("NaN"));
        all.reverse();
        assert_eq!(emit_heatmap(&all).unwrap(), csv);
        all.pop();
        assert!(matches!(
            emit_heatmap(&all),
            Err(HeatmapError::MissingCell { .. })
        ));
    }

    #[test]
    fn every_experiment_variable_is_configurable() {
        let text = r#"
[world]
target = [0.7, 0.3]
vehicle_start = [0.2, 0.6]
barriers = [[0.5, 0.5, 1.0, 0.3], [0.3, 0.2, 0.0, 0.2]]

[agents.x]
coop = "1111"
gain = 0.02
backoff_ms = 500
target_view = false

[agents.y]
coop = "0010"

[experiment]
nruns = 1000
nbarriers = 2
barrier_mode = "fixed"
master_seed = 9
"#;
        let cfg = parse_config(text).unwrap();
        let rc = cfg.run_config();
        assert_eq!(rc.world.target, Vec2::new(0.7, 0.3));
        assert_eq!(rc.world.vehicle_start, Vec2::new(0.2, 0.6));
        assert_eq!(rc.world.barriers.len(), 2);
        assert_eq!(rc.world.barriers[0], Barrier::new(0.5, 0.5, 1.0, 0.3));
        assert_eq!(rc.coop[0].to_string(), "1111");
        assert_eq!(rc.params[0].gain, 0.02);
        assert_eq!(rc.params[0].backoff_ms, 500);
        assert!(!rc.params[0].target_view);
        assert!(rc.params[1].target_view);
        let ec = cfg.experiment_config();
        assert_eq!(ec.nruns, 1000);
        assert_eq!(
            ec.barrier_mode,
            BarrierMode::Fixed(rc.world.barriers.clone())
        );
    }
}
