//! Status exchange between the two agents and communication accounting.
//!
//! Messages are pushed synchronously every tick from a snapshot taken before
//! either agent moves. An agent is counted as communicating on a tick when a
//! rule acted on a flag its partner asserted and that changed its directive
//! from what the non-communicating rules would have chosen.

use crate::agent::{Decision, Directive};
use crate::environment::StatusFlags;
use crate::geometry::Axis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusMessage {
    pub sender: Axis,
    pub tick: u64,
    pub stuck: bool,
    pub access: bool,
    pub arrived: bool,
}

impl StatusMessage {
    pub fn snapshot(sender: Axis, tick: u64, flags: &StatusFlags) -> Self {
        Self {
            sender,
            tick,
            stuck: flags.stuck,
            access: flags.access,
            arrived: flags.arrived,
        }
    }

    /// The partner's flags as seen by the receiver. Only the transmitted
    /// fields are populated.
    pub fn as_flags(&self) -> StatusFlags {
        StatusFlags {
            stuck: self.stuck,
            access: self.access,
            arrived: self.arrived,
            ..StatusFlags::default()
        }
    }
}

/// Snapshot both agents' flags; returns `(from_x, from_y)`.
pub fn exchange(
    tick: u64,
    flags_x: &StatusFlags,
    flags_y: &StatusFlags,
) -> (StatusMessage, StatusMessage) {
    (
        StatusMessage::snapshot(Axis::X, tick, flags_x),
        StatusMessage::snapshot(Axis::Y, tick, flags_y),
    )
}

/// True when `decision` counts as a communicating tick.
///
/// Back-off is only ever entered on a consumed partner flag, so every tick of
/// it, including continuation ticks, is attributed to that message.
pub fn fired(decision: &Decision) -> bool {
    decision.directive == Directive::BackOff && decision.directive != decision.baseline
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CommLedger {
    communicating: [u64; 2],
    total_ticks: u64,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Account one tick; `fired` is indexed by [`Axis::index`].
    pub fn record_communication(&mut self, fired: [bool; 2]) {
        self.total_ticks += 1;
        for (count, f) in self.communicating.iter_mut().zip(fired) {
            *count += f as u64;
        }
    }

    pub fn total_ticks(&self) -> u64 {
        self.total_ticks
    }

    pub fn communicating_ticks(&self, axis: Axis) -> u64 {
        self.communicating[axis.index()]
    }

    /// Share of ticks spent communicating, in percent. Zero before any tick.
    pub fn comm_pct(&self, axis: Axis) -> f64 {
        if self.total_ticks == 0 {
            0.0
        } else {
            100.0 * self.communicating[axis.index()] as f64 / self.total_ticks as f64
        }
    }
}
