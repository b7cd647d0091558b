//! One-dimensional perceptual-control agent.
//!
//! Each agent owns one axis of the vehicle and acts to bring its perceived
//! coordinate to a reference: the target coordinate normally, or a temporary
//! random reference while backing off or roaming. Which of those it pursues
//! on a given tick is decided by [`arbitrate`] over the agent's cooperation
//! level and the two agents' status flags.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::StatusFlags;
use crate::geometry::Axis;

pub const DEFAULT_GAIN: f64 = 0.01;
pub const DEFAULT_BACKOFF_MS: u32 = 1000;
pub const DEFAULT_MAX_STEP: f64 = 0.005;
/// Commands smaller than this in magnitude are classified as `Stop`.
pub const ACTION_DEADBAND: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoopParseError {
    #[error("cooperation level must be four binary digits like 0110, got {0:?}")]
    Malformed(String),
}

/// Four-bit cooperation mask written `bcde`.
///
/// * `b` move randomly when not approaching the target
/// * `c` back off when self arrived and partner stuck
/// * `d` back off when both stuck
/// * `e` approach only while both have access
///
/// The numeric value `b + 2c + 4d + 8e` is the column order used by the
/// mismatched-agents heatmap: `0000, 1000, 0100, 1100, 0010, ...`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(try_from = "String", into = "String")]
pub struct CoopLevel(u8);

impl CoopLevel {
    pub const NONE: CoopLevel = CoopLevel(0);
    pub const FULL: CoopLevel = CoopLevel(0b1111);

    const B: u8 = 1;
    const C: u8 = 2;
    const D: u8 = 4;
    const E: u8 = 8;

    pub fn from_index(index: u8) -> Option<CoopLevel> {
        (index < 16).then_some(CoopLevel(index))
    }

    pub fn from_bits(b: bool, c: bool, d: bool, e: bool) -> CoopLevel {
        CoopLevel(b as u8 | (c as u8) << 1 | (d as u8) << 2 | (e as u8) << 3)
    }

    /// All sixteen levels in heatmap order.
    pub fn all() -> impl Iterator<Item = CoopLevel> + Clone {
        (0u8..16).map(CoopLevel)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn random_move(self) -> bool {
        self.0 & Self::B != 0
    }

    pub fn arrived_stuck(self) -> bool {
        self.0 & Self::C != 0
    }

    pub fn stuck_stuck(self) -> bool {
        self.0 & Self::D != 0
    }

    pub fn access_gate(self) -> bool {
        self.0 & Self::E != 0
    }

    /// True when any rule reads the partner's flags.
    pub fn listens(self) -> bool {
        self.0 & (Self::C | Self::D | Self::E) != 0
    }
}

impl fmt::Display for CoopLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bit = |set: bool| if set { '1' } else { '0' };
        write!(
            f,
            "{}{}{}{}",
            bit(self.random_move()),
            bit(self.arrived_stuck()),
            bit(self.stuck_stuck()),
            bit(self.access_gate())
        )
    }
}

impl TryFrom<String> for CoopLevel {
    type Error = CoopParseError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CoopLevel> for String {
    fn from(c: CoopLevel) -> String {
        c.to_string()
    }
}

impl FromStr for CoopLevel {
    type Err = CoopParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(t);
        let bits: Vec<bool> = t
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()
            .filter(|v: &Vec<bool>| v.len() == 4)
            .ok_or_else(|| CoopParseError::Malformed(s.to_string()))?;
        Ok(CoopLevel::from_bits(bits[0], bits[1], bits[2], bits[3]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    pub gain: f64,
    pub backoff_ms: u32,
    pub target_view: bool,
    pub max_step: f64,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            gain: DEFAULT_GAIN,
            backoff_ms: DEFAULT_BACKOFF_MS,
            target_view: true,
            max_step: DEFAULT_MAX_STEP,
        }
    }
}

/// Behavioural mode; the temporary reference lives inside the timed modes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Mode {
    #[default]
    Normal,
    BackOff {
        remaining_ms: u32,
        reference: f64,
    },
    Roam {
        remaining_ms: u32,
        reference: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Directive {
    ApproachTarget,
    Stop,
    RandomMove,
    BackOff,
}

impl Directive {
    pub fn as_str(self) -> &'static str {
        match self {
            Directive::ApproachTarget => "approach",
            Directive::Stop => "stop",
            Directive::RandomMove => "random",
            Directive::BackOff => "backoff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Forward,
    Reverse,
    Stop,
}

/// Which rule produced a directive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// An earlier back-off or roam is still running.
    ActiveMode,
    /// `d`: self stuck and partner stuck.
    StuckStuck,
    /// `c`: self arrived and partner stuck.
    ArrivedStuck,
    /// Approach the target (`a`, or `e` with both agents having access).
    Approach,
    /// `b`: random movement.
    Random,
    /// `e` gate failed and nothing else applied.
    Gated,
    Halt,
}

impl Rule {
    /// Rules that act on a flag asserted by the partner.
    pub fn consumes_partner_flag(self) -> bool {
        matches!(self, Rule::StuckStuck | Rule::ArrivedStuck)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arbitration {
    pub directive: Directive,
    pub rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub axis: Axis,
    pub mode: Mode,
    pub coop: CoopLevel,
}

impl AgentState {
    pub fn new(axis: Axis, coop: CoopLevel) -> Self {
        Self {
            axis,
            mode: Mode::Normal,
            coop,
        }
    }

    pub fn temp_reference(&self) -> Option<f64> {
        match self.mode {
            Mode::Normal => None,
            Mode::BackOff { reference, .. } | Mode::Roam { reference, .. } => Some(reference),
        }
    }

    /// Advance the mode timer by one tick, returning to `Normal` at zero.
    pub fn tick_timer(&mut self, tick_ms: u32) {
        match &mut self.mode {
            Mode::Normal => {}
            Mode::BackOff { remaining_ms, .. } | Mode::Roam { remaining_ms, .. } => {
                *remaining_ms = remaining_ms.saturating_sub(tick_ms);
                if *remaining_ms == 0 {
                    self.mode = Mode::Normal;
                }
            }
        }
    }
}

/// Proportional control: gain times error, clamped to the per-tick step.
pub fn control_step(reference: f64, perception: f64, params: &AgentParams) -> f64 {
    (params.gain * (reference - perception)).clamp(-params.max_step, params.max_step)
}

pub fn classify_action(command: f64) -> Action {
    if command > ACTION_DEADBAND {
        Action::Forward
    } else if command < -ACTION_DEADBAND {
        Action::Reverse
    } else {
        Action::Stop
    }
}

/// What rules `a` and `b` alone would do; communication is measured against it.
pub fn baseline_directive(own: &StatusFlags, coop: CoopLevel) -> Directive {
    if own.target_known {
        Directive::ApproachTarget
    } else if coop.random_move() {
        Directive::RandomMove
    } else {
        Directive::Stop
    }
}

/// Pick this tick's directive.
///
/// Precedence: running timed mode, then `d`, then `c`, then approach (gated
/// by `e` when set), then `b`, then stop.
pub fn arbitrate(
    own: &StatusFlags,
    other: &StatusFlags,
    coop: CoopLevel,
    state: &AgentState,
) -> Arbitration {
    let pick = |directive, rule| Arbitration { directive, rule };
    match state.mode {
        Mode::BackOff { .. } => return pick(Directive::BackOff, Rule::ActiveMode),
        Mode::Roam { .. } => return pick(Directive::RandomMove, Rule::ActiveMode),
        Mode::Normal => {}
    }
    if coop.stuck_stuck() && own.stuck && other.stuck {
        return pick(Directive::BackOff, Rule::StuckStuck);
    }
    if coop.arrived_stuck() && own.arrived && other.stuck {
        return pick(Directive::BackOff, Rule::ArrivedStuck);
    }
    let gated = own.target_known && coop.access_gate() && !(own.access && other.access);
    if own.target_known && !gated {
        return pick(Directive::ApproachTarget, Rule::Approach);
    }
    if coop.random_move() {
        return pick(Directive::RandomMove, Rule::Random);
    }
    pick(
        Directive::Stop,
        if gated { Rule::Gated } else { Rule::Halt },
    )
}

fn sample_reference<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.0..1.0)
}

/// Enter back-off toward a fresh uniform reference on the agent's own axis.
pub fn begin_backoff<R: Rng + ?Sized>(state: &mut AgentState, params: &AgentParams, rng: &mut R) {
    state.mode = Mode::BackOff {
        remaining_ms: params.backoff_ms,
        reference: sample_reference(rng),
    };
}

/// Start (or refresh) a roam leg toward a fresh uniform reference.
pub fn roam_reference<R: Rng + ?Sized>(state: &mut AgentState, params: &AgentParams, rng: &mut R) {
    state.mode = Mode::Roam {
        remaining_ms: params.backoff_ms,
        reference: sample_reference(rng),
    };
}

/// Resample the roam reference once `perception` has reached it, keeping the timer.
pub fn resample_roam_on_arrival<R: Rng + ?Sized>(
    state: &mut AgentState,
    perception: f64,
    tolerance: f64,
    rng: &mut R,
) {
    if let Mode::Roam { reference, .. } = &mut state.mode {
        if (perception - *reference).abs() <= tolerance {
            *reference = sample_reference(rng);
        }
    }
}

/// One agent's decision for a tick, after mode transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub directive: Directive,
    pub rule: Rule,
    pub baseline: Directive,
}

/// Arbitrate, then start a timed mode if the directive calls for one.
pub fn decide<R: Rng + ?Sized>(
    state: &mut AgentState,
    own: &StatusFlags,
    other: &StatusFlags,
    params: &AgentParams,
    rng: &mut R,
) -> Decision {
    let Arbitration { directive, rule } = arbitrate(own, other, state.coop, state);
    if rule != Rule::ActiveMode {
        match directive {
            Directive::BackOff => begin_backoff(state, params, rng),
            Directive::RandomMove => roam_reference(state, params, rng),
            Directive::ApproachTarget | Directive::Stop => {}
        }
    }
    Decision {
        directive,
        rule,
        baseline: baseline_directive(own, state.coop),
    }
}

/// Signed command for this tick given the directive.
///
/// An agent that has arrived on its axis holds still while approaching.
pub fn command(
    state: &AgentState,
    directive: Directive,
    perception: f64,
    target: f64,
    arrived: bool,
    params: &AgentParams,
) -> f64 {
    match directive {
        Directive::ApproachTarget if arrived => 0.0,
        Directive::ApproachTarget => control_step(target, perception, params),
        Directive::BackOff | Directive::RandomMove => state
            .temp_reference()
            .map_or(0.0, |r| control_step(r, perception, params)),
        Directive::Stop => 0.0,
    }
}
