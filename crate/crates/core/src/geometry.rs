//! Planar primitives: δ-balls, δ-tubes, and the predicates everything else is
//! built on.
//!
//! All coordinates are dimensionless, living in (a neighbourhood of) the unit
//! square. Predicates are closed-set predicates evaluated with an absolute
//! slack of [`TAU`]; generated configurations keep every decision at least
//! δ/8 away from its boundary, so the slack never changes a generated answer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default comparison slack for all predicates.
pub const TAU: f64 = 1e-12;

/// Largest supported exponent `k` (δ = 2^-k).
pub const MAX_K: u32 = 24;

/// A dyadic working scale δ = 2^-k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scale {
    k: u32,
}

impl Scale {
    pub fn new(k: u32) -> Result<Self> {
        Self::with_ceiling(k, MAX_K)
    }

    pub fn with_ceiling(k: u32, max: u32) -> Result<Self> {
        if k == 0 || k > max {
            return Err(Error::InvalidScale { k, max });
        }
        Ok(Self { k })
    }

    pub fn k(self) -> u32 {
        self.k
    }

    /// δ = 2^-k.
    pub fn delta(self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    /// D = δ⁻¹ as a float.
    pub fn d(self) -> f64 {
        (self.k as f64).exp2()
    }

    /// D = 2^k as an integer.
    pub fn d_int(self) -> u64 {
        1u64 << self.k
    }

    /// Dyadic side lengths w = 2^-n for n = k, k-1, ..., 0 (finest first).
    pub fn dyadic_levels(self) -> impl Iterator<Item = (u32, f64)> {
        (0..=self.k).rev().map(|n| (n, (-(n as f64)).exp2()))
    }
}

/// A closed disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

impl Ball {
    pub fn new(cx: f64, cy: f64, r: f64) -> Self {
        Self { cx, cy, r }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.cx, self.cy]
    }
}

/// A closed `width × length` rectangle. `theta` is the direction of the long
/// side, taken mod π and normalised into [0, π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub cx: f64,
    pub cy: f64,
    pub theta: f64,
    pub width: f64,
    pub length: f64,
}

impl Tube {
    pub fn new(cx: f64, cy: f64, theta: f64, width: f64, length: f64) -> Self {
        Self {
            cx,
            cy,
            theta: normalize_angle(theta),
            width,
            length,
        }
    }

    /// A unit-length tube of the given width.
    pub fn unit(cx: f64, cy: f64, theta: f64, width: f64) -> Self {
        Self::new(cx, cy, theta, width, 1.0)
    }

    /// Unit vector along the long side.
    pub fn dir(&self) -> [f64; 2] {
        [self.theta.cos(), self.theta.sin()]
    }

    /// Unit vector across the tube.
    pub fn normal(&self) -> [f64; 2] {
        [-self.theta.sin(), self.theta.cos()]
    }

    /// Coordinates of a point in the tube frame: (along, across).
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        (dx * c + dy * s, -dx * s + dy * c)
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let [ux, uy] = self.dir();
        let [nx, ny] = self.normal();
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        let at = |a: f64, b: f64| [self.cx + a * ux + b * nx, self.cy + a * uy + b * ny];
        [at(-hl, -hw), at(hl, -hw), at(hl, hw), at(-hl, hw)]
    }

    pub fn area(&self) -> f64 {
        self.width * self.length
    }

    /// Same midline, new width (and the same length).
    pub fn with_width(&self, width: f64) -> Self {
        Self { width, ..*self }
    }
}

/// Axis-aligned closed square `[x0, x0 + side] × [y0, y0 + side]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub x0: f64,
    pub y0: f64,
    pub side: f64,
}

impl Square {
    pub fn new(x0: f64, y0: f64, side: f64) -> Self {
        Self { x0, y0, side }
    }

    pub fn center(&self) -> [f64; 2] {
        [self.x0 + 0.5 * self.side, self.y0 + 0.5 * self.side]
    }
}

/// Reduce an angle into [0, π).
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

pub fn ball_tube_intersects(p: &Ball, t: &Tube) -> bool {
    ball_tube_intersects_tol(p, t, TAU)
}

/// Distance from the ball center to the closed rectangle, compared against
/// the radius with slack `tau`.
pub fn ball_tube_intersects_tol(p: &Ball, t: &Tube, tau: f64) -> bool {
    let (u, v) = t.to_local(p.cx, p.cy);
    let du = (u.abs() - 0.5 * t.length).max(0.0);
    let dv = (v.abs() - 0.5 * t.width).max(0.0);
    let reach = p.r + tau;
    du * du + dv * dv <= reach * reach
}

/// Signed clearance of a ball-tube pair: positive when disjoint, negative when
/// the ball reaches into the rectangle by more than touching.
pub fn ball_tube_gap(p: &Ball, t: &Tube) -> f64 {
    let (u, v) = t.to_local(p.cx, p.cy);
    let du = (u.abs() - 0.5 * t.length).max(0.0);
    let dv = (v.abs() - 0.5 * t.width).max(0.0);
    (du * du + dv * dv).sqrt() - p.r
}

/// Acute angle between tube directions, in [0, π/2].
pub fn tube_angle(s: &Tube, t: &Tube) -> f64 {
    let d = (s.theta - t.theta).abs().rem_euclid(PI);
    d.min(PI - d)
}

/// True iff all four corners of `t` lie in the closed rectangle `query`.
pub fn tube_in_query_tube(t: &Tube, query: &Tube) -> bool {
    let hl = 0.5 * query.length + TAU;
    let hw = 0.5 * query.width + TAU;
    t.corners().iter().all(|&[x, y]| {
        let (u, v) = query.to_local(x, y);
        u.abs() <= hl && v.abs() <= hw
    })
}

pub fn ball_in_ball(p: &Ball, outer: &Ball) -> bool {
    let d = (p.cx - outer.cx).hypot(p.cy - outer.cy);
    d <= outer.r - p.r + TAU
}

pub fn ball_in_square(p: &Ball, q: &Square) -> bool {
    p.cx - p.r >= q.x0 - TAU
        && p.cx + p.r <= q.x0 + q.side + TAU
        && p.cy - p.r >= q.y0 - TAU
        && p.cy + p.r <= q.y0 + q.side + TAU
}

pub fn balls_intersect(p: &Ball, q: &Ball) -> bool {
    (p.cx - q.cx).hypot(p.cy - q.cy) <= p.r + q.r + TAU
}

/// Closed rectangle intersection via separating axes.
pub fn tubes_intersect(s: &Tube, t: &Tube) -> bool {
    let cs = s.corners();
    let ct = t.corners();
    for axis in [s.dir(), s.normal(), t.dir(), t.normal()] {
        let (a0, a1) = project(&cs, axis);
        let (b0, b1) = project(&ct, axis);
        if a1 < b0 - TAU || b1 < a0 - TAU {
            return false;
        }
    }
    true
}

fn project(pts: &[[f64; 2]; 4], axis: [f64; 2]) -> (f64, f64) {
    pts.iter()
        .map(|p| p[0] * axis[0] + p[1] * axis[1])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Fraction of `t`'s area covered by `s`: area(s ∩ t) / area(t).
pub fn essential_overlap(s: &Tube, t: &Tube) -> f64 {
    let clipped = clip_convex(&t.corners(), &s.corners());
    (polygon_area(&clipped) / t.area()).clamp(0.0, 1.0)
}

/// Sutherland–Hodgman clipping of `subject` against the convex,
/// counter-clockwise polygon `clip`.
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out: Vec<[f64; 2]> = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(intersect(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn intersect(p: [f64; 2], q: [f64; 2], sp: f64, sq: f64) -> [f64; 2] {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Unsigned shoelace area.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

/// Rigid motion: rotate by `angle` about the origin, then translate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rigid {
    pub angle: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Rigid {
    pub fn point(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        (c * x - s * y + self.tx, s * x + c * y + self.ty)
    }

    pub fn ball(&self, p: &Ball) -> Ball {
        let (x, y) = self.point(p.cx, p.cy);
        Ball::new(x, y, p.r)
    }

    pub fn tube(&self, t: &Tube) -> Tube {
        let (x, y) = self.point(t.cx, t.cy);
        Tube::new(x, y, t.theta + self.angle, t.width, t.length)
    }
}
