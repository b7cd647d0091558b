//! Fixed-timestep run loop.
//!
//! Each tick: snapshot flags, exchange messages, arbitrate, compute commands,
//! move X then Y, refresh percepts, account communication, advance timers.
//! Time is simulated; a run ends on success or at the cap.

use thiserror::Error;

use crate::agent::{
    command, decide, resample_roam_on_arrival, AgentParams, AgentState, CoopLevel, Decision,
    Directive, Rule,
};
use crate::comms::{exchange, fired, CommLedger};
use crate::environment::{EnvError, Environment, StatusFlags, WorldConfig, WorldState};
use crate::geometry::{Axis, Vec2};
use crate::seed::{self, SimRng, STREAM_AGENT_X, STREAM_AGENT_Y};

pub const DEFAULT_TICK_MS: u32 = 10;
pub const DEFAULT_CAP_MS: u32 = 30_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid world: {0}")]
    World(#[from] EnvError),
    #[error("invalid timing: tick {tick_ms} ms, cap {cap_ms} ms (cap must be a positive multiple of tick)")]
    Timing { tick_ms: u32, cap_ms: u32 },
    #[error("invalid agent parameters for {axis:?}: {reason}")]
    Agent { axis: Axis, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub world: WorldConfig,
    /// Indexed by [`Axis::index`].
    pub coop: [CoopLevel; 2],
    pub params: [AgentParams; 2],
    pub seed: u64,
    pub tick_ms: u32,
    pub cap_ms: u32,
    pub record_trace: bool,
}

impl RunConfig {
    pub fn new(world: WorldConfig, coop_x: CoopLevel, coop_y: CoopLevel, seed: u64) -> Self {
        Self {
            world,
            coop: [coop_x, coop_y],
            params: [AgentParams::default(); 2],
            seed,
            tick_ms: DEFAULT_TICK_MS,
            cap_ms: DEFAULT_CAP_MS,
            record_trace: false,
        }
    }

    pub fn cap_ticks(&self) -> u64 {
        (self.cap_ms / self.tick_ms) as u64
    }

    fn check(&self) -> Result<Environment, SimError> {
        if self.tick_ms == 0 || self.cap_ms == 0 || !self.cap_ms.is_multiple_of(self.tick_ms) {
            return Err(SimError::Timing {
                tick_ms: self.tick_ms,
                cap_ms: self.cap_ms,
            });
        }
        for axis in Axis::BOTH {
            let p = &self.params[axis.index()];
            if !(p.gain > 0.0 && p.gain < 1.0) {
                return Err(SimError::Agent {
                    axis,
                    reason: "gain must be in (0, 1)",
                });
            }
            if p.backoff_ms == 0 {
                return Err(SimError::Agent {
                    axis,
                    reason: "backoff_ms must be positive",
                });
            }
            if !(p.max_step > 0.0 && p.max_step.is_finite()) {
                return Err(SimError::Agent {
                    axis,
                    reason: "max_step must be positive",
                });
            }
        }
        Ok(self.world.validate()?)
    }
}

/// One row of the optional per-tick trace, recorded after the tick's moves.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub tick: u64,
    pub vehicle: Vec2,
    pub directives: [Directive; 2],
    /// Flags the tick was decided on.
    pub flags: [StatusFlags; 2],
    pub comm: [bool; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub solved: bool,
    /// Present iff solved.
    pub st_ms: Option<u64>,
    pub comm_pct_x: f64,
    pub comm_pct_y: f64,
    pub ticks: u64,
    pub seed: u64,
    pub final_position: Vec2,
    pub trace: Option<Vec<TraceRow>>,
}

impl RunResult {
    /// Mean of the two agents' communication percentages.
    pub fn comm_pct_mean(&self) -> f64 {
        0.5 * (self.comm_pct_x + self.comm_pct_y)
    }
}

/// A run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    env: Environment,
    state: WorldState,
    agents: [AgentState; 2],
    params: [AgentParams; 2],
    rngs: [SimRng; 2],
    ledger: CommLedger,
    tick_ms: u32,
    last: Option<[Decision; 2]>,
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self, SimError> {
        let env = config.check()?;
        let state = env.initial_state([config.params[0].target_view, config.params[1].target_view]);
        Ok(Self {
            env,
            state,
            agents: [
                AgentState::new(Axis::X, config.coop[0]),
                AgentState::new(Axis::Y, config.coop[1]),
            ],
            params: config.params,
            rngs: [
                seed::rng(seed::derive(config.seed, STREAM_AGENT_X)),
                seed::rng(seed::derive(config.seed, STREAM_AGENT_Y)),
            ],
            ledger: CommLedger::new(),
            tick_ms: config.tick_ms,
            last: None,
        })
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn agent(&self, axis: Axis) -> &AgentState {
        &self.agents[axis.index()]
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    /// Decisions taken on the most recent tick.
    pub fn last_decisions(&self) -> Option<[Decision; 2]> {
        self.last
    }

    pub fn solved(&self) -> bool {
        self.env.success(&self.state)
    }

    /// Advance one tick and return the trace row for it.
    pub fn step(&mut self) -> TraceRow {
        let tick = self.state.tick;
        let snapshot = self.state.flags;
        let (from_x, from_y) = exchange(tick, &snapshot[0], &snapshot[1]);
        let heard = [from_y.as_flags(), from_x.as_flags()];

        let target = self.env.config().target;
        let tolerance = self.env.config().target_tolerance;
        let mut decisions = [None; 2];
        let mut commands = [0.0; 2];
        for axis in Axis::BOTH {
            let i = axis.index();
            let agent = &mut self.agents[i];
            let rng = &mut self.rngs[i];
            let d = decide(agent, &snapshot[i], &heard[i], &self.params[i], rng);
            let perception = self.state.vehicle.get(axis);
            resample_roam_on_arrival(agent, perception, tolerance, rng);
            commands[i] = command(
                agent,
                d.directive,
                perception,
                target.get(axis),
                snapshot[i].arrived,
                &self.params[i],
            );
            decisions[i] = Some(d);
        }
        let decisions = decisions.map(|d| d.expect("both axes decided"));

        for axis in Axis::BOTH {
            self.env
                .apply_axis_move(&mut self.state, axis, commands[axis.index()]);
        }
        self.env.refresh_percepts(&mut self.state);
        // Held by the access gate with a barrier on its own line: obstructed.
        for (flags, d) in self.state.flags.iter_mut().zip(&decisions) {
            if d.rule == Rule::Gated && !flags.arrived && !flags.access {
                flags.stuck = true;
            }
        }

        let comm = [fired(&decisions[0]), fired(&decisions[1])];
        self.ledger.record_communication(comm);
        for agent in &mut self.agents {
            agent.tick_timer(self.tick_ms);
        }
        self.state.tick += 1;
        self.last = Some(decisions);

        TraceRow {
            tick,
            vehicle: self.state.vehicle,
            directives: [decisions[0].directive, decisions[1].directive],
            flags: snapshot,
            comm,
        }
    }
}

/// Run to success or to the cap.
pub fn run(config: &RunConfig) -> Result<RunResult, SimError> {
    let mut sim = Simulation::new(config)?;
    let cap = config.cap_ticks();
    let mut trace = config.record_trace.then(Vec::new);
    let solved = loop {
        if sim.state.tick >= cap {
            break false;
        }
        if sim.solved() {
            break true;
        }
        let row = sim.step();
        if let Some(t) = trace.as_mut() {
            t.push(row);
        }
    };
    let ticks = sim.state.tick;
    Ok(RunResult {
        solved,
        st_ms: solved.then(|| ticks * config.tick_ms as u64),
        comm_pct_x: sim.ledger.comm_pct(Axis::X),
        comm_pct_y: sim.ledger.comm_pct(Axis::Y),
        ticks,
        seed: config.seed,
        final_position: sim.state.vehicle,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Barrier;

    fn config(
        target: (f64, f64),
        start: (f64, f64),
        barriers: Vec<Barrier>,
        coop: &str,
    ) -> RunConfig {
        let world = WorldConfig::new(
            Vec2::new(target.0, target.1),
            Vec2::new(start.0, start.1),
            barriers,
        );
        let c: CoopLevel = coop.parse().unwrap();
        RunConfig::new(world, c, c, 11)
    }

    #[test]
    fn at_target_commands_are_zero() {
        let mut sim = Simulation::new(&config((0.5, 0.5), (0.5, 0.5), vec![], "0000")).unwrap();
        let row = sim.step();
        assert_eq!(sim.state().vehicle, Vec2::new(0.5, 0.5));
        assert!(row.flags[0].arrived && row.flags[1].arrived);
    }

    #[test]
    fn free_step_advances_by_clamp() {
        let mut sim = Simulation::new(&config((0.8, 0.8), (0.3, 0.3), vec![], "0000")).unwrap();
        sim.step();
        assert!((sim.state().vehicle.x - 0.305).abs() < 1e-15);
    }

    #[test]
    fn blocked_axis_gets_stuck_while_other_moves() {
        let wall = Barrier::from_endpoints(Vec2::new(0.5, 0.1), Vec2::new(0.5, 0.9));
        let mut sim =
            Simulation::new(&config((0.8, 0.7), (0.489, 0.5), vec![wall], "0000")).unwrap();
        sim.step();
        sim.step();
        let s = sim.state();
        assert!(s.flags(Axis::X).stuck);
        assert!((s.vehicle.x - 0.49).abs() < 1e-12);
        assert!(s.vehicle.y > 0.5);
        assert!(!s.flags(Axis::Y).stuck);
    }

    #[test]
    fn access_gate_holds_and_flags_the_blocked_axis() {
        // X sees the wall ahead, Y has already arrived.
        let wall = Barrier::from_endpoints(Vec2::new(0.5, 0.4), Vec2::new(0.5, 0.6));
        let mut sim = Simulation::new(&config((0.8, 0.5), (0.2, 0.5), vec![wall], "0001")).unwrap();
        let row = sim.step();
        assert_eq!(row.directives, [Directive::Stop, Directive::Stop]);
        assert_eq!(sim.state().vehicle, Vec2::new(0.2, 0.5));
        assert!(sim.state().flags(Axis::X).stuck && !sim.state().flags(Axis::Y).stuck);

        // With c enabled the arrived partner answers with a back-off.
        let mut sim = Simulation::new(&config((0.8, 0.5), (0.2, 0.5), vec![wall], "0101")).unwrap();
        sim.step();
        let row = sim.step();
        assert_eq!(row.directives[1], Directive::BackOff);
        assert_eq!(row.comm, [false, true]);
    }

    #[test]
    fn empty_world_solution_time_matches_scalar_oracle() {
        // Scalar oracle of one axis: clamped proportional steps until within tolerance.
        let (mut x, mut ticks) = (0.1f64, 0u64);
        while (x - 0.9).abs() > 0.02 {
            x += (0.01 * (0.9 - x)).clamp(-0.005, 0.005);
            ticks += 1;
        }
        assert_eq!(ticks, 381);
        let r = run(&config((0.9, 0.9), (0.1, 0.1), vec![], "0000")).unwrap();
        assert!(r.solved);
        assert_eq!(r.st_ms, Some(ticks * 10));
        assert_eq!(r.st_ms, Some(3810));
    }

    #[test]
    fn start_inside_target_solves_at_zero() {
        let r = run(&config((0.5, 0.5), (0.51, 0.49), vec![], "1111")).unwrap();
        assert_eq!((r.solved, r.st_ms, r.ticks), (true, Some(0), 0));
    }

    #[test]
    fn boxed_start_runs_to_cap() {
        let v = |x, y0, y1| Barrier::from_endpoints(Vec2::new(x, y0), Vec2::new(x, y1));
        let h = |y, x0, x1| Barrier::from_endpoints(Vec2::new(x0, y), Vec2::new(x1, y));
        let walls = vec![v(0.3, 0.15, 0.85), h(0.2, -0.05, 0.35), h(0.8, -0.05, 0.35)];
        for coop in ["0000", "0110", "1111"] {
            let r = run(&config((0.7, 0.5), (0.1, 0.5), walls.clone(), coop)).unwrap();
            assert!(!r.solved);
            assert_eq!(r.st_ms, None);
            assert_eq!(r.ticks, 3000);
        }
    }

    #[test]
    fn colliding_start_is_rejected() {
        let wall = Barrier::from_endpoints(Vec2::new(0.5, 0.1), Vec2::new(0.5, 0.9));
        let err = run(&config((0.8, 0.5), (0.505, 0.5), vec![wall], "0000")).unwrap_err();
        assert!(matches!(
            err,
            SimError::World(EnvError::StartColliding { .. })
        ));
        let mut bad = config((0.8, 0.5), (0.2, 0.5), vec![], "0000");
        bad.cap_ms = 30_005;
        assert!(matches!(run(&bad), Err(SimError::Timing { .. })));
    }

    #[test]
    fn trace_and_determinism() {
        let wall = Barrier::from_endpoints(Vec2::new(0.5, 0.4), Vec2::new(0.5, 0.6));
        let mut cfg = config((0.8, 0.5), (0.2, 0.5), vec![wall], "0110");
        cfg.record_trace = true;
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.as_ref().unwrap().len() as u64, a.ticks);
        assert!(a.solved, "{:?}", a.final_position);
        assert!(a.comm_pct_y > 0.0);
    }
}
