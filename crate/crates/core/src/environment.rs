//! World configuration, per-axis status flags, movement and world generation.
//!
//! Also hosts the grid reachability oracle used to label configurations as
//! solvable or not, independently of any agent behaviour.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use thiserror::Error;

use crate::geometry::{
    capsule_segment_intersects, clearance, is_collision_free, swept_axis_move, Axis, Blocker,
    GeometryError, MoveResult, Segment, Vec2, CONTACT_EPS,
};

pub const MAX_BARRIERS: usize = 3;
pub const DEFAULT_TARGET_TOLERANCE: f64 = 0.02;
pub const DEFAULT_VEHICLE_RADIUS: f64 = 0.01;
/// Absorbs rounding in `|p - t|` so the tolerance boundary is inclusive.
pub const ARRIVE_SLACK: f64 = 1e-12;
pub const ORACLE_GRID: usize = 400;
const MAX_GENERATION_ATTEMPTS: usize = 10_000;
/// Fraction of the commanded step below which a barrier-blocked agent is stuck.
const STUCK_PROGRESS: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("{0} barriers requested, at most {MAX_BARRIERS} allowed")]
    TooManyBarriers(usize),
    #[error("barrier {index}: {reason}")]
    InvalidBarrier { index: usize, reason: String },
    #[error("vehicle start ({x}, {y}) collides with a barrier or the world edge")]
    StartColliding { x: f64, y: f64 },
    #[error("target ({x}, {y}) lies within tolerance of a barrier")]
    TargetTooClose { x: f64, y: f64 },
    #[error("{what} must be {range}, got {value}")]
    OutOfRange {
        what: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("no valid world found after {0} attempts")]
    GenerationExhausted(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A straight barrier given by its centre, rotation and length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    pub center: Vec2,
    /// Radians in `[0, pi)`.
    pub rotation: f64,
    pub length: f64,
}

impl Barrier {
    pub fn new(x: f64, y: f64, rotation: f64, length: f64) -> Self {
        Self {
            center: Vec2::new(x, y),
            rotation,
            length,
        }
    }

    /// Barrier spanning the two given endpoints.
    pub fn from_endpoints(a: Vec2, b: Vec2) -> Self {
        let d = b - a;
        let mut rotation = d.y.atan2(d.x);
        if rotation < 0.0 {
            rotation += PI;
        }
        if rotation >= PI {
            rotation -= PI;
        }
        Self {
            center: (a + b) * 0.5,
            rotation,
            length: d.norm(),
        }
    }

    pub fn endpoints(&self) -> (Vec2, Vec2) {
        let half = Vec2::new(self.rotation.cos(), self.rotation.sin()) * (0.5 * self.length);
        (self.center - half, self.center + half)
    }

    pub fn segment(&self) -> Result<Segment, GeometryError> {
        let (a, b) = self.endpoints();
        Segment::new(a, b)
    }

    fn check(&self, index: usize) -> Result<Segment, EnvError> {
        let bad = |reason: String| EnvError::InvalidBarrier { index, reason };
        if !self.center.is_finite() || !self.rotation.is_finite() || !self.length.is_finite() {
            return Err(bad("non-finite parameter".into()));
        }
        if !(0.0..PI).contains(&self.rotation) {
            return Err(bad(format!("rotation {} outside [0, pi)", self.rotation)));
        }
        if !(self.length > 0.0 && self.length <= 1.0) {
            return Err(bad(format!("length {} outside (0, 1]", self.length)));
        }
        let (a, b) = self.endpoints();
        let inside = |p: Vec2| (-0.5..=1.5).contains(&p.x) && (-0.5..=1.5).contains(&p.y);
        if !inside(a) || !inside(b) {
            return Err(bad("endpoint outside [-0.5, 1.5]^2".into()));
        }
        Ok(self.segment()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    pub target: Vec2,
    pub vehicle_start: Vec2,
    pub barriers: Vec<Barrier>,
    /// Per-axis arrival tolerance.
    pub target_tolerance: f64,
    pub vehicle_radius: f64,
}

impl WorldConfig {
    pub fn new(target: Vec2, vehicle_start: Vec2, barriers: Vec<Barrier>) -> Self {
        Self {
            target,
            vehicle_start,
            barriers,
            target_tolerance: DEFAULT_TARGET_TOLERANCE,
            vehicle_radius: DEFAULT_VEHICLE_RADIUS,
        }
    }

    /// Check every world invariant and precompute barrier segments.
    pub fn validate(&self) -> Result<Environment, EnvError> {
        if self.barriers.len() > MAX_BARRIERS {
            return Err(EnvError::TooManyBarriers(self.barriers.len()));
        }
        if !(self.vehicle_radius > 0.0 && self.vehicle_radius < 0.5) {
            return Err(EnvError::OutOfRange {
                what: "vehicle_radius",
                range: "in (0, 0.5)",
                value: self.vehicle_radius,
            });
        }
        if !(self.target_tolerance > 0.0 && self.target_tolerance < 1.0) {
            return Err(EnvError::OutOfRange {
                what: "target_tolerance",
                range: "in (0, 1)",
                value: self.target_tolerance,
            });
        }
        for (what, p) in [
            ("target", self.target),
            ("vehicle_start", self.vehicle_start),
        ] {
            for v in [p.x, p.y] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(EnvError::OutOfRange {
                        what,
                        range: "in [0, 1]",
                        value: v,
                    });
                }
            }
        }
        let segments = self
            .barriers
            .iter()
            .enumerate()
            .map(|(i, b)| b.check(i))
            .collect::<Result<Vec<_>, _>>()?;
        let start_ok = is_collision_free(self.vehicle_start, &[], self.vehicle_radius)
            && clearance(self.vehicle_start, &segments) > self.vehicle_radius;
        if !start_ok {
            return Err(EnvError::StartColliding {
                x: self.vehicle_start.x,
                y: self.vehicle_start.y,
            });
        }
        if clearance(self.target, &segments) < self.target_tolerance {
            return Err(EnvError::TargetTooClose {
                x: self.target.x,
                y: self.target.y,
            });
        }
        Ok(Environment {
            config: self.clone(),
            segments,
        })
    }
}

/// Per-axis agent status as perceived at the start of a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct StatusFlags {
    pub collided_edge: bool,
    pub stuck: bool,
    pub target_known: bool,
    pub access: bool,
    pub arrived: bool,
}

impl StatusFlags {
    /// All 32 combinations, bit order `edge, stuck, known, access, arrived`.
    pub fn all() -> impl Iterator<Item = StatusFlags> {
        (0u8..32).map(|m| StatusFlags {
            collided_edge: m & 1 != 0,
            stuck: m & 2 != 0,
            target_known: m & 4 != 0,
            access: m & 8 != 0,
            arrived: m & 16 != 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub vehicle: Vec2,
    /// Indexed by [`Axis::index`].
    pub flags: [StatusFlags; 2],
    pub tick: u64,
}

impl WorldState {
    pub fn flags(&self, axis: Axis) -> StatusFlags {
        self.flags[axis.index()]
    }
}

/// A validated world with cached barrier segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    config: WorldConfig,
    segments: Vec<Segment>,
}

impl Environment {
    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Initial state with access/arrived computed and movement flags cleared.
    pub fn initial_state(&self, target_view: [bool; 2]) -> WorldState {
        let mut state = WorldState {
            vehicle: self.config.vehicle_start,
            flags: [StatusFlags::default(); 2],
            tick: 0,
        };
        for axis in Axis::BOTH {
            state.flags[axis.index()].target_known = target_view[axis.index()];
        }
        self.refresh_percepts(&mut state);
        state
    }

    /// True iff nothing blocks the straight run along `axis` from the vehicle
    /// to the target's coordinate on that axis.
    pub fn compute_access(&self, state: &WorldState, axis: Axis) -> bool {
        let from = state.vehicle;
        let to = from.with(axis, self.config.target.get(axis));
        // Resting contact with a barrier is not an obstruction.
        let r = self.config.vehicle_radius - CONTACT_EPS;
        !self
            .segments
            .iter()
            .any(|s| capsule_segment_intersects(from, to, r, s))
    }

    pub fn compute_arrived(&self, state: &WorldState, axis: Axis) -> bool {
        (state.vehicle.get(axis) - self.config.target.get(axis)).abs()
            <= self.config.target_tolerance + ARRIVE_SLACK
    }

    /// Recompute the position-dependent flags (access, arrived).
    pub fn refresh_percepts(&self, state: &mut WorldState) {
        for axis in Axis::BOTH {
            let access = self.compute_access(state, axis);
            let arrived = self.compute_arrived(state, axis);
            let f = &mut state.flags[axis.index()];
            f.access = access;
            f.arrived = arrived;
            if arrived {
                f.stuck = false;
            }
        }
    }

    /// Move the vehicle along `axis` and set that axis's stuck / edge flags.
    pub fn apply_axis_move(&self, state: &mut WorldState, axis: Axis, delta: f64) -> MoveResult {
        let result = swept_axis_move(
            state.vehicle,
            axis,
            delta,
            &self.segments,
            self.config.vehicle_radius,
        )
        .expect("vehicle state is collision-free by construction");
        let coord = state.vehicle.get(axis) + result.achieved;
        state.vehicle = state.vehicle.with(axis, coord);

        let starved = delta != 0.0 && result.achieved.abs() < STUCK_PROGRESS * delta.abs();
        let arrived = self.compute_arrived(state, axis);
        let f = &mut state.flags[axis.index()];
        f.stuck = starved && result.blocked_by == Blocker::Barrier && !arrived;
        f.collided_edge = starved && result.blocked_by == Blocker::Edge;
        result
    }

    pub fn success(&self, state: &WorldState) -> bool {
        Axis::BOTH.iter().all(|&a| self.compute_arrived(state, a))
    }

    pub fn solvable(&self) -> bool {
        solvable_on_grid(&self.config, &self.segments, ORACLE_GRID)
    }
}

fn solvable_on_grid(config: &WorldConfig, segments: &[Segment], n: usize) -> bool {
    let r = config.vehicle_radius;
    let tol = config.target_tolerance;
    let cell = 1.0 / n as f64;
    let centre = |i: usize| (i as f64 + 0.5) * cell;

    let mut blocked = vec![false; n * n];
    for j in 0..n {
        for i in 0..n {
            let p = Vec2::new(centre(i), centre(j));
            blocked[j * n + i] = p.x <= r
                || p.x >= 1.0 - r
                || p.y <= r
                || p.y >= 1.0 - r
                || segments.iter().any(|s| s.distance_to_point(p) <= r);
        }
    }
    let is_goal = |i: usize, j: usize| {
        (centre(i) - config.target.x).abs() <= tol && (centre(j) - config.target.y).abs() <= tol
    };

    let to_cell = |v: f64| ((v * n as f64) as usize).min(n - 1);
    let (si, sj) = (
        to_cell(config.vehicle_start.x),
        to_cell(config.vehicle_start.y),
    );
    let mut seen = vec![false; n * n];
    let mut queue = VecDeque::new();
    seen[sj * n + si] = true;
    queue.push_back((si, sj));
    while let Some((i, j)) = queue.pop_front() {
        if is_goal(i, j) && !blocked[j * n + i] {
            return true;
        }
        let neighbours = [
            (i.wrapping_sub(1), j),
            (i + 1, j),
            (i, j.wrapping_sub(1)),
            (i, j + 1),
        ];
        for (ni, nj) in neighbours {
            if ni < n && nj < n {
                let k = nj * n + ni;
                if !seen[k] && !blocked[k] {
                    seen[k] = true;
                    queue.push_back((ni, nj));
                }
            }
        }
    }
    // A start already inside the target square counts even if its cell is
    // marked blocked by discretisation.
    (config.vehicle_start.x - config.target.x).abs() <= tol
        && (config.vehicle_start.y - config.target.y).abs() <= tol
}

/// Reachability oracle on a 400x400 occupancy grid.
pub fn solvable(config: &WorldConfig) -> Result<bool, EnvError> {
    Ok(config.validate()?.solvable())
}

/// Grid reachability at an explicit resolution, for robustness checks.
pub fn solvable_at_resolution(config: &WorldConfig, n: usize) -> Result<bool, EnvError> {
    let env = config.validate()?;
    Ok(solvable_on_grid(env.config(), env.segments(), n))
}

fn uniform_point<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Vec2 {
    Vec2::new(rng.random_range(lo..hi), rng.random_range(lo..hi))
}

fn random_barrier<R: Rng + ?Sized>(rng: &mut R) -> Barrier {
    let c = uniform_point(rng, 0.1, 0.9);
    Barrier {
        center: c,
        rotation: rng.random_range(0.0..PI),
        length: rng.random_range(0.1..0.5),
    }
}

/// Draw fresh target and start positions for a fixed barrier layout.
pub fn random_positions<R: Rng + ?Sized>(
    rng: &mut R,
    barriers: &[Barrier],
    target_tolerance: f64,
    vehicle_radius: f64,
) -> Result<WorldConfig, EnvError> {
    let segments = barriers
        .iter()
        .enumerate()
        .map(|(i, b)| b.check(i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut attempts = 0;
    let mut draw = |accept: &dyn Fn(Vec2) -> bool, rng: &mut R| -> Result<Vec2, EnvError> {
        loop {
            attempts += 1;
            if attempts > MAX_GENERATION_ATTEMPTS {
                return Err(EnvError::GenerationExhausted(MAX_GENERATION_ATTEMPTS));
            }
            let p = uniform_point(rng, 0.05, 0.95);
            if accept(p) {
                return Ok(p);
            }
        }
    };
    let target = draw(&|p| clearance(p, &segments) >= target_tolerance, rng)?;
    let vehicle_start = draw(&|p| clearance(p, &segments) > vehicle_radius, rng)?;
    Ok(WorldConfig {
        target,
        vehicle_start,
        barriers: barriers.to_vec(),
        target_tolerance,
        vehicle_radius,
    })
}

/// Random world with `nbarriers` barriers and uniformly placed start/target.
pub fn random_world<R: Rng + ?Sized>(
    rng: &mut R,
    nbarriers: usize,
) -> Result<WorldConfig, EnvError> {
    if nbarriers > MAX_BARRIERS {
        return Err(EnvError::TooManyBarriers(nbarriers));
    }
    let barriers: Vec<Barrier> = (0..nbarriers).map(|_| random_barrier(rng)).collect();
    random_positions(
        rng,
        &barriers,
        DEFAULT_TARGET_TOLERANCE,
        DEFAULT_VEHICLE_RADIUS,
    )
}
