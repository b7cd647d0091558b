//! Planar primitives: points, segments, circle and capsule tests, and swept
//! axis-aligned motion of a circular vehicle against segment obstacles.
//!
//! The world is the unit square. Barriers are zero-width segments and the
//! vehicle is a disc. Motion along one axis is resolved analytically as a
//! ray cast against each barrier inflated into a capsule, so no step size is
//! small enough to tunnel.

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Slack used when deciding whether the vehicle is already touching a barrier.
pub const CONTACT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("zero-length segment at ({x}, {y})")]
    DegenerateSegment { x: f64, y: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("start position ({x}, {y}) already collides ({reason})")]
    StartColliding {
        x: f64,
        y: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn get(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// Copy of `self` with the `axis` coordinate replaced.
    pub fn with(self, axis: Axis, value: f64) -> Vec2 {
        match axis {
            Axis::X => Vec2::new(value, self.y),
            Axis::Y => Vec2::new(self.x, value),
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// One of the two world axes. Each agent owns exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn unit(self) -> Vec2 {
        match self {
            Axis::X => Vec2::new(1.0, 0.0),
            Axis::Y => Vec2::new(0.0, 1.0),
        }
    }

    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// A closed line segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Vec2,
    b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if a == b {
            return Err(GeometryError::DegenerateSegment { x: a.x, y: a.y });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> Vec2 {
        self.a
    }

    pub fn b(&self) -> Vec2 {
        self.b
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn reversed(&self) -> Segment {
        Segment {
            a: self.b,
            b: self.a,
        }
    }

    /// Euclidean distance from `p` to the closest point of the segment.
    pub fn distance_to_point(&self, p: Vec2) -> f64 {
        point_segment_distance(p, self.a, self.b)
    }
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Minimum distance between two closed segments (either may be degenerate).
pub fn segment_segment_distance(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> f64 {
    if segments_cross(p0, p1, q0, q1) {
        return 0.0;
    }
    point_segment_distance(p0, q0, q1)
        .min(point_segment_distance(p1, q0, q1))
        .min(point_segment_distance(q0, p0, p1))
        .min(point_segment_distance(q1, p0, p1))
}

fn segments_cross(p0: Vec2, p1: Vec2, q0: Vec2, q1: Vec2) -> bool {
    let d1 = (p1 - p0).cross(q0 - p0);
    let d2 = (p1 - p0).cross(q1 - p0);
    let d3 = (q1 - q0).cross(p0 - q0);
    let d4 = (q1 - q0).cross(p1 - q0);
    // Collinear and touching cases fall back to endpoint distances, which are zero.
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// True iff the disc at `center` with `radius` touches or overlaps `seg`.
pub fn segment_circle_intersects(seg: &Segment, center: Vec2, radius: f64) -> bool {
    debug_assert!(radius > 0.0);
    seg.distance_to_point(center) <= radius
}

/// True iff `seg` comes within `radius` of the path `path_a -> path_b`.
pub fn capsule_segment_intersects(path_a: Vec2, path_b: Vec2, radius: f64, seg: &Segment) -> bool {
    debug_assert!(radius > 0.0);
    segment_segment_distance(path_a, path_b, seg.a, seg.b) <= radius
}

/// What stopped a swept move short of its commanded distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Blocker {
    #[default]
    None,
    Barrier,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MoveResult {
    /// Signed distance actually travelled along the axis.
    pub achieved: f64,
    pub blocked_by: Blocker,
}

/// Clearance from `pos` to the nearest barrier, `+inf` when there are none.
pub fn clearance(pos: Vec2, barriers: &[Segment]) -> f64 {
    barriers
        .iter()
        .map(|s| s.distance_to_point(pos))
        .fold(f64::INFINITY, f64::min)
}

/// True when the disc at `pos` does not penetrate any barrier and lies inside
/// the unit square inset by `radius` (both up to [`CONTACT_EPS`]).
pub fn is_collision_free(pos: Vec2, barriers: &[Segment], radius: f64) -> bool {
    let lo = radius - CONTACT_EPS;
    let hi = 1.0 - radius + CONTACT_EPS;
    pos.is_finite()
        && pos.x >= lo
        && pos.x <= hi
        && pos.y >= lo
        && pos.y <= hi
        && clearance(pos, barriers) >= radius - CONTACT_EPS
}

/// Distance along the ray `origin + t * dir` (unit `dir`, `t > 0`) at which a
/// disc of `radius` first penetrates `seg`. Returns `Some(0.0)` when the disc
/// already touches the segment and the motion would deepen the contact.
fn time_of_impact(origin: Vec2, dir: Vec2, radius: f64, seg: &Segment) -> Option<f64> {
    let dist0 = seg.distance_to_point(origin);
    if dist0 <= radius + CONTACT_EPS {
        // In contact: blocked only if moving reduces the distance. Distance is
        // convex along the ray, so a non-decreasing start never comes back.
        let ab = seg.b - seg.a;
        let t = ((origin - seg.a).dot(ab) / ab.norm_sq()).clamp(0.0, 1.0);
        let away = origin - (seg.a + ab * t);
        let rate = if dist0 > 0.0 {
            dir.dot(away) / dist0
        } else {
            -1.0
        };
        return (rate < -1e-9).then_some(0.0);
    }

    let mut best = f64::INFINITY;
    for c in [seg.a, seg.b] {
        let m = origin - c;
        let b = m.dot(dir);
        let cc = m.norm_sq() - radius * radius;
        let disc = b * b - cc;
        if disc >= 0.0 {
            let t = -b - disc.sqrt();
            if t >= 0.0 {
                best = best.min(t);
            }
        }
    }
    let ab = seg.b - seg.a;
    let len = ab.norm();
    let along = ab * (1.0 / len);
    let normal = Vec2::new(-along.y, along.x);
    let rate = dir.dot(normal);
    if rate != 0.0 {
        let s0 = (origin - seg.a).dot(normal);
        // Enter the slab through the face on our side of the line.
        let face = if s0 > 0.0 { radius } else { -radius };
        let t = (face - s0) / rate;
        if t >= 0.0 {
            let u = (origin + dir * t - seg.a).dot(along);
            if (0.0..=len).contains(&u) {
                best = best.min(t);
            }
        }
    }
    best.is_finite().then_some(best)
}

/// Move a disc of `radius` from `pos` by `delta` along `axis`, stopping at
/// the first contact with a barrier or with the unit square inset by `radius`.
pub fn swept_axis_move(
    pos: Vec2,
    axis: Axis,
    delta: f64,
    barriers: &[Segment],
    radius: f64,
) -> Result<MoveResult, GeometryError> {
    if !is_collision_free(pos, barriers, radius) {
        let reason = if clearance(pos, barriers) < radius - CONTACT_EPS {
            "barrier"
        } else {
            "bounds"
        };
        return Err(GeometryError::StartColliding {
            x: pos.x,
            y: pos.y,
            reason,
        });
    }
    if delta == 0.0 {
        return Ok(MoveResult::default());
    }
    let sign = delta.signum();
    let dir = axis.unit() * sign;
    let wanted = delta.abs();

    let coord = pos.get(axis);
    let room = if sign > 0.0 {
        (1.0 - radius) - coord
    } else {
        coord - radius
    }
    .max(0.0);

    let mut limit = wanted;
    let mut blocked_by = Blocker::None;
    if room < limit {
        limit = room;
        blocked_by = Blocker::Edge;
    }
    for seg in barriers {
        if let Some(t) = time_of_impact(pos, dir, radius, seg) {
            if t <= limit {
                limit = t;
                blocked_by = Blocker::Barrier;
            }
        }
    }
    let achieved = if blocked_by == Blocker::None {
        delta
    } else {
        sign * limit
    };
    Ok(MoveResult {
        achieved,
        blocked_by,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
        Segment::new(Vec2::new(ax, ay), Vec2::new(bx, by)).unwrap()
    }

    /// Dense sampling of the segment: an oracle independent of the projection formula.
    fn sampled_distance(p: Vec2, s: &Segment) -> f64 {
        (0..=20_000)
            .map(|i| {
                let t = i as f64 / 20_000.0;
                (p - (s.a() + (s.b() - s.a()) * t)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn zero_length_segment_is_rejected() {
        let p = Vec2::new(0.3, 0.3);
        assert!(matches!(
            Segment::new(p, p),
            Err(GeometryError::DegenerateSegment { .. })
        ));
    }

    #[test]
    fn circle_segment_examples() {
        let horiz = seg(0.0, 0.0, 1.0, 0.0);
        assert!(!segment_circle_intersects(
            &horiz,
            Vec2::new(0.5, 0.5),
            0.01
        ));
        assert!(segment_circle_intersects(
            &horiz,
            Vec2::new(0.5, 0.005),
            0.01
        ));

        let vert = seg(0.0, 0.0, 0.0, 1.0);
        let c = Vec2::new(0.0105, 0.5);
        assert!((sampled_distance(c, &vert) - 0.0105).abs() < 1e-9);
        assert!(!segment_circle_intersects(&vert, c, 0.01));
    }

    #[test]
    fn capsule_examples() {
        let a = Vec2::new(0.1, 0.5);
        let b = Vec2::new(0.9, 0.5);
        assert!(capsule_segment_intersects(
            a,
            b,
            0.01,
            &seg(0.5, 0.1, 0.5, 0.9)
        ));
        assert!(!capsule_segment_intersects(
            a,
            b,
            0.01,
            &seg(0.95, 0.1, 0.95, 0.9)
        ));

        // Oracle: sample both segments densely. Nearest approach is the endpoint
        // (0.5, 0.515), 0.015 above the path, so the capsule misses.
        let s = seg(0.5, 0.515, 0.9, 0.9);
        let path = seg(0.1, 0.5, 0.9, 0.5);
        let oracle = (0..=2000)
            .map(|i| sampled_distance(s.a() + (s.b() - s.a()) * (i as f64 / 2000.0), &path))
            .fold(f64::INFINITY, f64::min);
        assert!((oracle - 0.015).abs() < 1e-6);
        assert!(!capsule_segment_intersects(a, b, 0.01, &s));
    }

    #[test]
    fn swept_move_examples() {
        let r = swept_axis_move(Vec2::new(0.5, 0.5), Axis::X, 0.005, &[], 0.01).unwrap();
        assert_eq!(
            r,
            MoveResult {
                achieved: 0.005,
                blocked_by: Blocker::None
            }
        );

        let r = swept_axis_move(Vec2::new(0.995, 0.5), Axis::X, 0.02, &[], 0.001).unwrap();
        assert!((r.achieved - 0.004).abs() < 1e-12);
        assert_eq!(r.blocked_by, Blocker::Edge);

        let wall = [seg(0.5, 0.0, 0.5, 1.0)];
        let r = swept_axis_move(Vec2::new(0.4, 0.5), Axis::X, 0.2, &wall, 0.01).unwrap();
        assert_eq!(r.blocked_by, Blocker::Barrier);
        // Fine-step sweep oracle: last sample still outside the inflated wall.
        let mut x = 0.4;
        while Segment::distance_to_point(&wall[0], Vec2::new(x + 1e-6, 0.5)) >= 0.01 {
            x += 1e-6;
        }
        assert!((r.achieved - (x - 0.4)).abs() < 2e-6);
        assert!((r.achieved - 0.09).abs() < 1e-9);
    }

    #[test]
    fn touching_contact_blocks_inward_but_not_outward_or_sliding() {
        let wall = [seg(0.5, 0.2, 0.5, 0.8)];
        let touching = Vec2::new(0.49, 0.5);
        let into = swept_axis_move(touching, Axis::X, 0.005, &wall, 0.01).unwrap();
        assert_eq!(into.achieved, 0.0);
        assert_eq!(into.blocked_by, Blocker::Barrier);
        let away = swept_axis_move(touching, Axis::X, -0.005, &wall, 0.01).unwrap();
        assert_eq!(away.blocked_by, Blocker::None);
        let slide = swept_axis_move(touching, Axis::Y, 0.005, &wall, 0.01).unwrap();
        assert_eq!(slide.blocked_by, Blocker::None);
    }

    #[test]
    fn endpoint_contact_is_found() {
        // Moving right along y=0.505 passes just above the lower end of a
        // vertical wall; the disc clips the endpoint cap.
        let wall = [seg(0.5, 0.2, 0.5, 0.5)];
        let r = swept_axis_move(Vec2::new(0.3, 0.505), Axis::X, 0.4, &wall, 0.01).unwrap();
        assert_eq!(r.blocked_by, Blocker::Barrier);
        let expected = 0.5 - (0.01f64.powi(2) - 0.005f64.powi(2)).sqrt() - 0.3;
        assert!((r.achieved - expected).abs() < 1e-12);
    }

    #[test]
    fn colliding_start_is_an_error() {
        let wall = [seg(0.5, 0.0, 0.5, 1.0)];
        let err = swept_axis_move(Vec2::new(0.495, 0.5), Axis::Y, 0.001, &wall, 0.01);
        assert!(matches!(
            err,
            Err(GeometryError::StartColliding {
                reason: "barrier",
                ..
            })
        ));
        let err = swept_axis_move(Vec2::new(0.001, 0.5), Axis::Y, 0.001, &[], 0.01);
        assert!(matches!(
            err,
            Err(GeometryError::StartColliding {
                reason: "bounds",
                ..
            })
        ));
    }

    #[test]
    fn segment_symmetry_and_determinism() {
        let s = seg(0.1, 0.2, 0.7, 0.4);
        let c = Vec2::new(0.3, 0.31);
        assert_eq!(
            segment_circle_intersects(&s, c, 0.05),
            segment_circle_intersects(&s.reversed(), c, 0.05)
        );
        let m1 = swept_axis_move(c, Axis::Y, 0.3, &[s], 0.01).unwrap();
        let m2 = swept_axis_move(c, Axis::Y, 0.3, &[s], 0.01).unwrap();
        assert_eq!(m1.achieved.to_bits(), m2.achieved.to_bits());
    }
}
