use proptest::prelude::*;

use coopnav::agent::{command, control_step, AgentParams, AgentState, CoopLevel, Directive};
use coopnav::environment::{Barrier, WorldConfig};
use coopnav::geometry::{clearance, is_collision_free, swept_axis_move, Axis, Segment, Vec2};
use coopnav::metrics::goodness;
use coopnav::simulation::{run, RunConfig};

fn barrier() -> impl Strategy<Value = Barrier> {
    (
        0.1..0.9f64,
        0.1..0.9f64,
        0.0..std::f64::consts::PI,
        0.1..0.5f64,
    )
        .prop_map(|(x, y, r, l)| Barrier::new(x, y, r, l))
}

fn segments(bs: &[Barrier]) -> Vec<Segment> {
    bs.iter().map(|b| b.segment().unwrap()).collect()
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y)]
}

fn level() -> impl Strategy<Value = CoopLevel> {
    (0u8..16).prop_map(|i| CoopLevel::from_index(i).unwrap())
}

proptest! {
    #[test]
    fn swept_move_never_penetrates(
        bs in prop::collection::vec(barrier(), 0..=3),
        x in 0.0..1.0f64, y in 0.0..1.0f64,
        ax in axis(),
        delta in -0.1..0.1f64,
    ) {
        let segs = segments(&bs);
        let pos = Vec2::new(x, y);
        prop_assume!(is_collision_free(pos, &segs, 0.01) && clearance(pos, &segs) > 0.01);
        let m = swept_axis_move(pos, ax, delta, &segs, 0.01).unwrap();
        prop_assert!(m.achieved.abs() <= delta.abs());
        prop_assert!(m.achieved * delta >= 0.0);
        let end = pos.with(ax, pos.get(ax) + m.achieved);
        prop_assert!(is_collision_free(end, &segs, 0.01));
    }

    #[test]
    fn adding_a_barrier_never_lengthens_a_move(
        bs in prop::collection::vec(barrier(), 0..=2),
        extra in barrier(),
        x in 0.0..1.0f64, y in 0.0..1.0f64,
        ax in axis(),
        delta in -0.1..0.1f64,
    ) {
        let fewer = segments(&bs);
        let mut more = fewer.clone();
        more.push(extra.segment().unwrap());
        let pos = Vec2::new(x, y);
        prop_assume!(is_collision_free(pos, &more, 0.01) && clearance(pos, &more) > 0.01);
        let a = swept_axis_move(pos, ax, delta, &fewer, 0.01).unwrap().achieved;
        let b = swept_axis_move(pos, ax, delta, &more, 0.01).unwrap().achieved;
        prop_assert!(b.abs() <= a.abs() + 1e-15);
    }

    #[test]
    fn command_respects_step_cap(reference in -2.0..2.0f64, perception in -2.0..2.0f64, gain in 0.001..0.999f64) {
        let params = AgentParams { gain, ..AgentParams::default() };
        let u = control_step(reference, perception, &params);
        prop_assert!(u.abs() <= params.max_step);
        prop_assert!(u * (reference - perception) >= 0.0);
        let state = AgentState::new(Axis::X, CoopLevel::NONE);
        let v = command(&state, Directive::ApproachTarget, perception, reference, false, &params);
        prop_assert_eq!(u, v);
    }

    #[test]
    fn level_text_round_trips(l in level()) {
        let text = l.to_string();
        prop_assert_eq!(text.parse::<CoopLevel>().unwrap(), l);
        prop_assert_eq!(format!("[{text}]").parse::<CoopLevel>().unwrap(), l);
    }

    #[test]
    fn goodness_grows_with_dnf(mean in 1.0..30000.0f64, n in 1usize..1000, k in 0usize..1000) {
        let k = k % n;
        let lo = goodness(mean, k, n).unwrap().0;
        let hi = goodness(mean, k + 1, n + 1).unwrap().0;
        prop_assert!(hi >= lo - 1e-12 || mean < 1.0 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn runs_stay_collision_free_and_deterministic(
        bs in prop::collection::vec(barrier(), 0..=3),
        sx in 0.05..0.95f64, sy in 0.05..0.95f64,
        tx in 0.05..0.95f64, ty in 0.05..0.95f64,
        cx in level(), cy in level(),
        seed in any::<u64>(),
    ) {
        let world = WorldConfig::new(Vec2::new(tx, ty), Vec2::new(sx, sy), bs);
        prop_assume!(world.validate().is_ok());
        let mut cfg = RunConfig::new(world, cx, cy, seed);
        cfg.cap_ms = 5000;
        cfg.record_trace = true;
        let a = run(&cfg).unwrap();
        let env = cfg.world.validate().unwrap();
        for row in a.trace.as_ref().unwrap() {
            prop_assert!(is_collision_free(row.vehicle, env.segments(), 0.01 - 1e-9));
        }
        prop_assert!((0.0..=100.0).contains(&a.comm_pct_x) && (0.0..=100.0).contains(&a.comm_pct_y));
        prop_assert_eq!(a, run(&cfg).unwrap());
    }
}
