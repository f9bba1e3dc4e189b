//! Incidence counting, the per-object diagnostics built on it, and the
//! thickening, colouring and duality transforms.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::geometry::{ball_tube_intersects, clip_convex, tube_angle, tubes_intersect, Ball, Rigid, Tube};
use crate::par;
use crate::spacing::{ball_neighbours, overlap_neighbours};

/// Pair-count guard for [`count_brute`].
pub const BRUTE_PAIRS: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceReport {
    pub method: String,
    pub total: u64,
    /// |P_t| for every tube.
    pub per_tube: Vec<u64>,
    /// |𝕋(p)| for every ball.
    pub per_ball: Vec<u64>,
    pub elapsed_seconds: f64,
}

impl IncidenceReport {
    /// Same counts, ignoring method tag and timing.
    pub fn same_counts(&self, other: &Self) -> bool {
        self.total == other.total && self.per_tube == other.per_tube && self.per_ball == other.per_ball
    }

    /// JSON with totals; per-object vectors only when asked for.
    pub fn to_json(&self, with_vectors: bool) -> Result<String> {
        let mut v = serde_json::json!({
            "method": self.method,
            "total": self.total,
            "n_tubes": self.per_tube.len(),
            "n_balls": self.per_ball.len(),
            "elapsed_seconds": self.elapsed_seconds,
        });
        if with_vectors {
            v["per_tube"] = serde_json::json!(self.per_tube);
            v["per_ball"] = serde_json::json!(self.per_ball);
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

#[cfg(not(target_arch = "wasm32"))]
pub(crate) struct Stopwatch(std::time::Instant);

#[cfg(not(target_arch = "wasm32"))]
impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self(std::time::Instant::now())
    }
    pub(crate) fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[cfg(target_arch = "wasm32")]
pub(crate) struct Stopwatch;

#[cfg(target_arch = "wasm32")]
impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self
    }
    pub(crate) fn seconds(&self) -> f64 {
        0.0
    }
}

/// Every (ball, tube) pair.
pub fn count_brute(balls: &[Ball], tubes: &[Tube]) -> Result<IncidenceReport> {
    let pairs = balls.len() as u64 * tubes.len() as u64;
    if pairs > BRUTE_PAIRS {
        return Err(Error::SizeGuard {
            what: "count_brute pairs",
            got: pairs as usize,
            limit: BRUTE_PAIRS as usize,
        });
    }
    let clock = Stopwatch::start();
    let mut per_tube = vec![0u64; tubes.len()];
    let mut per_ball = vec![0u64; balls.len()];
    for (ti, t) in tubes.iter().enumerate() {
        for (bi, b) in balls.iter().enumerate() {
            if ball_tube_intersects(b, t) {
                per_tube[ti] += 1;
                per_ball[bi] += 1;
            }
        }
    }
    Ok(IncidenceReport {
        method: "brute".into(),
        total: per_tube.iter().sum(),
        per_tube,
        per_ball,
        elapsed_seconds: clock.seconds(),
    })
}

/// Balls bucketed on a uniform grid; each tube scans only the cells covered
/// by its rectangle grown by the ball radius.
pub struct BallGrid<'a> {
    balls: &'a [Ball],
    x0: f64,
    y0: f64,
    h: f64,
    nx: i64,
    ny: i64,
    reach: f64,
    cells: HashMap<(i64, i64), Vec<u32>>,
}

impl<'a> BallGrid<'a> {
    pub fn new(balls: &'a [Ball]) -> Self {
        let r = balls.iter().map(|b| b.r).fold(0.0, f64::max);
        let h = (4.0 * r).max(1.0 / 1024.0);
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for b in balls {
            x0 = x0.min(b.cx);
            y0 = y0.min(b.cy);
            x1 = x1.max(b.cx);
            y1 = y1.max(b.cy);
        }
        if balls.is_empty() {
            (x0, y0, x1, y1) = (0.0, 0.0, 0.0, 0.0);
        }
        let nx = ((x1 - x0) / h).floor() as i64 + 1;
        let ny = ((y1 - y0) / h).floor() as i64 + 1;
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        for (i, b) in balls.iter().enumerate() {
            let key = (((b.cx - x0) / h).floor() as i64, ((b.cy - y0) / h).floor() as i64);
            cells.entry(key).or_default().push(i as u32);
        }
        Self {
            balls,
            x0,
            y0,
            h,
            nx,
            ny,
            reach: r,
            cells,
        }
    }

    /// Indices of balls meeting `t`, in increasing order.
    pub fn hits(&self, t: &Tube, out: &mut Vec<u32>) {
        out.clear();
        if self.balls.is_empty() {
            return;
        }
        let grown = Tube {
            width: t.width + 2.0 * self.reach,
            length: t.length + 2.0 * self.reach,
            ..*t
        };
        let poly = grown.corners();
        let pad = 1e-9;
        let xmin = poly.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let xmax = poly.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let i_lo = (((xmin - self.x0) / self.h - pad).floor() as i64).max(0);
        let i_hi = (((xmax - self.x0) / self.h + pad).floor() as i64).min(self.nx - 1);
        for i in i_lo..=i_hi {
            let xa = self.x0 + i as f64 * self.h;
            let xb = xa + self.h;
            let slab = [[xa - pad, -1e9], [xb + pad, -1e9], [xb + pad, 1e9], [xa - pad, 1e9]];
            let piece = clip_convex(&poly, &slab);
            if piece.is_empty() {
                continue;
            }
            let ymin = piece.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
            let ymax = piece.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
            let j_lo = (((ymin - self.y0) / self.h - pad).floor() as i64).max(0);
            let j_hi = (((ymax - self.y0) / self.h + pad).floor() as i64).min(self.ny - 1);
            for j in j_lo..=j_hi {
                if let Some(ids) = self.cells.get(&(i, j)) {
                    out.extend(
                        ids.iter()
                            .copied()
                            .filter(|&b| ball_tube_intersects(&self.balls[b as usize], t)),
                    );
                }
            }
        }
        out.sort_unstable();
    }
}

/// Grid-accelerated count; same predicate as [`count_brute`], so the
/// report is identical.
pub fn count_grid(balls: &[Ball], tubes: &[Tube]) -> IncidenceReport {
    let clock = Stopwatch::start();
    let grid = BallGrid::new(balls);
    let chunk = 256usize;
    let starts: Vec<usize> = (0..tubes.len()).step_by(chunk).collect();
    let parts = par::map(&starts, |&s| {
        let end = (s + chunk).min(tubes.len());
        let mut counts = Vec::with_capacity(end - s);
        let mut hits_all = Vec::new();
        let mut buf = Vec::new();
        for t in &tubes[s..end] {
            grid.hits(t, &mut buf);
            counts.push(buf.len() as u64);
            hits_all.extend_from_slice(&buf);
        }
        (counts, hits_all)
    });
    let mut per_tube = Vec::with_capacity(tubes.len());
    let mut per_ball = vec![0u64; balls.len()];
    for (counts, hits) in parts {
        per_tube.extend(counts);
        for b in hits {
            per_ball[b as usize] += 1;
        }
    }
    IncidenceReport {
        method: "grid".into(),
        total: per_tube.iter().sum(),
        per_tube,
        per_ball,
        elapsed_seconds: clock.seconds(),
    }
}

/// For every tube, the sorted indices of the balls it meets.
pub fn incidence_lists(balls: &[Ball], tubes: &[Tube]) -> Vec<Vec<u32>> {
    let grid = BallGrid::new(balls);
    par::map(tubes, |t| {
        let mut v = Vec::new();
        grid.hits(t, &mut v);
        v
    })
}

/// Lower edges of the angle bands: δ, 2δ, 4δ, … below π/2. Band δ is
/// [0, 2δ]; band w > δ is (w, 2w].
pub fn angle_bands(delta: f64) -> Vec<f64> {
    let mut out = vec![delta];
    let mut w = 2.0 * delta;
    while w < FRAC_PI_2 {
        out.push(w);
        w *= 2.0;
    }
    out
}

fn in_band(angle: f64, w: f64, delta: f64) -> bool {
    let tol = 1e-12;
    if w <= delta * (1.0 + tol) {
        angle <= 2.0 * delta + tol
    } else {
        angle > w + tol && angle <= 2.0 * w + tol
    }
}

/// 𝕋_w(t): tubes meeting `t` at an angle in band w.
pub fn tubes_at_angle(tubes: &[Tube], t: &Tube, w: f64, delta: f64) -> Vec<usize> {
    tubes
        .iter()
        .enumerate()
        .filter(|(_, s)| in_band(tube_angle(s, t), w, delta) && tubes_intersect(s, t))
        .map(|(i, _)| i)
        .collect()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "moment exponents need alpha > 0",
        });
    }
    Ok(())
}

/// J = Σ_p |𝕋(p)|^{(b+α)/α}.
#[allow(non_snake_case)]
pub fn moment_J(per_ball: &[u64], alpha: f64, b: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let e = (b + alpha) / alpha;
    Ok(per_ball.iter().map(|&n| (n as f64).powf(e)).sum())
}

/// j(t) = Σ_{p ∼ t} |𝕋(p)|^{b/α}, given the balls meeting t.
pub fn moment_j(per_ball: &[u64], hits_of_t: &[u32], alpha: f64, b: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let e = b / alpha;
    Ok(hits_of_t.iter().map(|&i| (per_ball[i as usize] as f64).powf(e)).sum())
}

/// Radii and widths multiplied by S; centers and midlines kept.
pub fn thicken(c: &Configuration, s: u32) -> Result<Configuration> {
    let factor = c.meta.thickening.saturating_mul(s);
    if s == 0 || factor as f64 * c.scale.delta() > 1.0 {
        return Err(Error::InvalidParameter {
            name: "S",
            value: s as f64,
            reason: "need S >= 1 and S·δ <= 1",
        });
    }
    let sf = s as f64;
    let mut out = c.clone();
    for b in &mut out.balls {
        b.r *= sf;
    }
    for t in &mut out.tubes {
        t.width *= sf;
    }
    out.meta.thickening = factor;
    Ok(out)
}

/// Greedy colouring: `colors[i]` is the class of object i, and `classes`
/// lists members per colour in input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub colors: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

fn greedy(neighbours: &[Vec<usize>]) -> Partition {
    let mut colors = vec![usize::MAX; neighbours.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut used = Vec::new();
    for (i, nbrs) in neighbours.iter().enumerate() {
        used.clear();
        used.extend(nbrs.iter().filter(|&&j| j < i).map(|&j| colors[j]));
        used.sort_unstable();
        used.dedup();
        let c = used
            .iter()
            .enumerate()
            .find(|&(pos, &c)| pos != c)
            .map_or(used.len(), |(pos, _)| pos);
        colors[i] = c;
        if c == classes.len() {
            classes.push(Vec::new());
        }
        classes[c].push(i);
    }
    Partition { colors, classes }
}

/// Conflict: the two balls intersect.
pub fn color_partition_balls(balls: &[Ball]) -> Partition {
    greedy(&ball_neighbours(balls))
}

/// Conflict: one tube covers at least half of the other.
pub fn color_partition_tubes(tubes: &[Tube]) -> Partition {
    greedy(&overlap_neighbours(tubes))
}

/// Slope of the midline; None for directions steeper than 45°.
pub fn midline(t: &Tube) -> Option<(f64, f64)> {
    let m = t.theta.tan();
    if m.abs() > 1.0 + 1e-12 {
        return None;
    }
    Some((m, t.cy - m * t.cx))
}

/// Point-line duality. A tube with midline y = m·x + q becomes a ball at
/// (m, q); a ball at (p, q) becomes a tube with midline y = −p·x + q over
/// x ∈ [−1, 1]. Applying the map twice reflects x ↦ −x; `meta.params`
/// tracks the parity as `dual_parity`.
pub fn dualize(c: &Configuration) -> Result<Configuration> {
    let size = c.object_size();
    let balls = c
        .tubes
        .iter()
        .map(|t| {
            midline(t)
                .map(|(m, q)| Ball::new(m, q, size))
                .ok_or(Error::SlopeOutOfRange { slope: t.theta.tan() })
        })
        .collect::<Result<Vec<_>>>()?;
    let tubes = c.balls.iter().map(|b| dual_tube(b, size)).collect();
    let mut meta = c.meta.clone();
    let parity = meta.params.get("dual_parity").and_then(|v| v.as_u64()).unwrap_or(0);
    meta.params.insert("dual_parity".into(), ((parity + 1) % 2).into());
    Ok(Configuration::new(c.scale, balls, tubes, meta))
}

/// Tube dual to a ball center, spanning x ∈ [−1, 1].
pub fn dual_tube(b: &Ball, width: f64) -> Tube {
    let p = b.cx;
    Tube::new(0.0, b.cy, (-p).atan(), width, 2.0 * p.hypot(1.0))
}

/// Smallest S for which a ball meets the tube widened to S·width.
pub fn required_width_factor(b: &Ball, t: &Tube) -> f64 {
    let (u, v) = t.to_local(b.cx, b.cy);
    let du = (u.abs() - 0.5 * t.length).max(0.0);
    if du > b.r {
        return f64::INFINITY;
    }
    let reach = (b.r * b.r - du * du).sqrt();
    (2.0 * (v.abs() - reach).max(0.0) / t.width).max(0.0)
}

/// Which of 8 direction groups of width π/8 a tube falls in.
pub fn angle_group(t: &Tube) -> usize {
    ((t.theta / (PI / 8.0)).floor() as usize).min(7)
}

/// Rotation about (½, ½) applied to all objects.
pub fn rotate(c: &Configuration, angle: f64) -> Configuration {
    let (s, co) = angle.sin_cos();
    let motion = Rigid {
        angle,
        tx: 0.5 - (co * 0.5 - s * 0.5),
        ty: 0.5 - (s * 0.5 + co * 0.5),
    };
    let mut out = c.clone();
    out.balls = c.balls.iter().map(|b| motion.ball(b)).collect();
    out.tubes = c.tubes.iter().map(|t| motion.tube(t)).collect();
    out
}

/// Angle that brings direction group `g` into slopes of magnitude ≤ 1.
pub fn group_rotation(g: usize) -> f64 {
    // groups 2..=5 cover [π/4, 3π/4)
    if (2..=5).contains(&g) {
        -FRAC_PI_2
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Meta;
    use crate::geometry::Scale;

    const D: f64 = 1.0 / 64.0;

    #[test]
    fn tiny_cases() {
        let t = [Tube::unit(0.5, 0.5, 0.0, D)];
        let far = [Ball::new(0.5, 0.9, D)];
        assert_eq!(count_brute(&far, &t).unwrap().total, 0);
        let on = [Ball::new(0.5, 0.5, D)];
        assert_eq!(count_brute(&on, &t).unwrap().total, 1);
        assert_eq!(count_grid(&[], &t).total, 0);
        assert_eq!(count_grid(&on, &t).total, 1);
    }

    #[test]
    fn bands_single_tube() {
        let t = Tube::unit(0.5, 0.5, 0.3, D);
        let set = [t];
        for w in angle_bands(D) {
            let got = tubes_at_angle(&set, &t, w, D);
            assert_eq!(got.len(), usize::from(w == D));
        }
        let perp = Tube::unit(0.5, 0.9, 0.3 + FRAC_PI_2, D);
        let far = Tube::unit(0.5, 0.2, 0.3, D);
        assert!(!tubes_intersect(&perp, &far));
        for w in angle_bands(D) {
            assert!(tubes_at_angle(&[perp], &far, w, D).is_empty());
        }
    }

    #[test]
    fn unit_moment() {
        let per_ball = [1, 1, 0, 1];
        assert_eq!(moment_J(&per_ball, 1.3, 0.7).unwrap(), 3.0);
        assert!(moment_J(&per_ball, 0.0, 1.0).is_err());
        assert_eq!(moment_j(&per_ball, &[0, 3], 1.0, 1.0).unwrap(), 2.0);
    }

    #[test]
    fn thicken_identity_and_scale() {
        let s = Scale::new(6).unwrap();
        let c = Configuration::new(
            s,
            vec![Ball::new(0.2, 0.2, D)],
            vec![Tube::unit(0.5, 0.5, 1.0, D)],
            Meta::new("t", 1.0, 1.0),
        );
        assert_eq!(thicken(&c, 1).unwrap(), c);
        let t4 = thicken(&c, 4).unwrap();
        assert_eq!(t4.balls[0].r, 4.0 * D);
        assert_eq!(t4.meta.thickening, 4);
        assert!(t4.check_uniform().is_ok());
        assert!(thicken(&c, 65).is_err());
    }

    #[test]
    fn coloring_cliques() {
        let apart: Vec<Ball> = (0..5).map(|i| Ball::new(0.1 + 0.2 * i as f64, 0.5, D)).collect();
        assert_eq!(color_partition_balls(&apart).classes.len(), 1);
        let same = vec![Ball::new(0.4, 0.4, D); 6];
        assert_eq!(color_partition_balls(&same).classes.len(), 6);
    }

    #[test]
    fn duality_on_midline() {
        let s = Scale::new(8).unwrap();
        let d = s.delta();
        let t = Tube::unit(0.4, 0.3, 0.5, d);
        let (m, q) = midline(&t).unwrap();
        let x = 0.55;
        let b = Ball::new(x, m * x + q, d);
        let c = Configuration::new(s, vec![b], vec![t], Meta::new("t", 0.0, 0.0));
        let dual = dualize(&c).unwrap();
        let db = dual.balls[0];
        let (dm, dq) = midline(&dual.tubes[0]).unwrap();
        assert!((db.cy - (dm * db.cx + dq)).abs() < 1e-12);
        // twice: reflected slope, same intercept
        let back = dualize(&dual).unwrap();
        let (m2, q2) = midline(&back.tubes[0]).unwrap();
        assert!((m2 + m).abs() < 1e-12 && (q2 - q).abs() < 1e-12);
        assert_eq!(back.meta.params["dual_parity"], 0);
    }

    #[test]
    fn steep_tube_rejected() {
        let s = Scale::new(6).unwrap();
        let c = Configuration::new(s, vec![], vec![Tube::unit(0.5, 0.5, 1.2, D)], Meta::new("t", 0.0, 0.0));
        assert!(matches!(dualize(&c), Err(Error::SlopeOutOfRange { .. })));
        let g = angle_group(&c.tubes[0]);
        let turned = rotate(&c, group_rotation(g));
        assert!(dualize(&turned).is_ok());
    }
}
