//! Measured (δ, s, K)-set profiles for balls and tubes.
//!
//! A profile records, for every dyadic width w = 2^-n between δ and 1, the
//! largest number of objects found inside a single radius-w ball (or w × 2
//! tube) and the implied constant `max_count / (w/δ)^s`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ball_in_ball, ball_in_square, balls_intersect, essential_overlap, tube_in_query_tube, Ball, Scale, Square, Tube,
    TAU,
};
use crate::par;

/// Object-count guard for the quadratic oracles.
pub const BRUTE_LIMIT: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level_n: u32,
    pub w: f64,
    pub max_count: usize,
    pub implied_k: f64,
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingProfile {
    pub k: u32,
    pub s: f64,
    /// Finest level (w = δ) first.
    pub levels: Vec<LevelRecord>,
}

impl SpacingProfile {
    fn from_counts(scale: Scale, s: f64, raw: Vec<(u32, f64, usize, String)>) -> Self {
        let delta = scale.delta();
        let mut running = 0usize;
        let mut witness = String::new();
        let levels = raw
            .into_iter()
            .map(|(n, w, count, wit)| {
                // a witness at a finer level also sits inside some coarser query
                if count >= running {
                    running = count;
                    witness = wit;
                }
                LevelRecord {
                    level_n: n,
                    w,
                    max_count: running,
                    implied_k: running as f64 / (w / delta).powf(s),
                    witness: witness.clone(),
                }
            })
            .collect();
        Self {
            k: scale.k(),
            s,
            levels,
        }
    }

    /// max_w implied_K(w).
    pub fn k_max(&self) -> f64 {
        self.levels.iter().map(|l| l.implied_k).fold(0.0, f64::max)
    }

    pub fn level(&self, n: u32) -> Option<&LevelRecord> {
        self.levels.iter().find(|l| l.level_n == n)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level_n,w,max_count,implied_K,witness\n");
        for l in &self.levels {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                l.level_n,
                fmt17(l.w),
                l.max_count,
                fmt17(l.implied_k),
                l.witness
            );
        }
        out
    }
}

/// Fixed 17-significant-digit formatting used by every CSV writer.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

fn uniform_radius(balls: &[Ball]) -> Result<f64> {
    let r = balls.first().map_or(0.0, |b| b.r);
    match balls.iter().find(|b| (b.r - r).abs() > 1e-12 * r) {
        Some(b) => Err(Error::MixedRadii { first: r, other: b.r }),
        None => Ok(r),
    }
}

fn uniform_width(tubes: &[Tube]) -> Result<f64> {
    let w = tubes.first().map_or(0.0, |t| t.width);
    match tubes.iter().find(|t| (t.width - w).abs() > 1e-12 * w) {
        Some(t) => Err(Error::MixedRadii {
            first: w,
            other: t.width,
        }),
        None => Ok(w),
    }
}

fn check_exponent(s: f64) -> Result<()> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "spacing exponent must lie in [0, 2]",
        });
    }
    Ok(())
}

/// Finest dyadic level n ≤ k whose square (at the ball center) contains the ball.
pub(crate) fn finest_level(b: &Ball, k: u32) -> Option<u32> {
    (0..=k).rev().find(|&n| {
        let side = (-(n as f64)).exp2();
        let i = (b.cx / side).floor();
        let j = (b.cy / side).floor();
        ball_in_square(b, &Square::new(i * side, j * side, side))
    })
}

pub(crate) fn cell(x: f64, side: f64) -> i64 {
    (x / side).floor() as i64
}

/// Dyadic-square counting: each ball is charged to every dyadic square that
/// contains it, and the per-level maxima are reported.
pub fn ball_profile_dyadic(scale: Scale, balls: &[Ball], s: f64) -> Result<SpacingProfile> {
    check_exponent(s)?;
    uniform_radius(balls)?;
    let k = scale.k();
    let mut maps: Vec<HashMap<(i64, i64), usize>> = vec![HashMap::new(); k as usize + 1];
    for b in balls {
        if let Some(top) = finest_level(b, k) {
            for n in 0..=top {
                let side = (-(n as f64)).exp2();
                *maps[n as usize]
                    .entry((cell(b.cx, side), cell(b.cy, side)))
                    .or_default() += 1;
            }
        }
    }
    let raw = scale
        .dyadic_levels()
        .map(|(n, w)| {
            let best = maps[n as usize]
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| (b.0 .1, b.0 .0).cmp(&(a.0 .1, a.0 .0))));
            match best {
                Some((&(i, j), &c)) => (n, w, c, format!("square(n={n};i={i};j={j})")),
                None => (n, w, 0, String::new()),
            }
        })
        .collect();
    Ok(SpacingProfile::from_counts(scale, s, raw))
}

/// Best count over query balls with a ball center on the boundary. Some
/// maximal query ball can be moved until a contained center sits on its
/// boundary, so this makes the search exact. For each center p the query
/// centers lie on the circle of radius w − r about p; each neighbour q is
/// captured on an arc, and an angular sweep finds the deepest point.
fn boundary_search(balls: &[Ball], grid: &HashMap<(i64, i64), Vec<usize>>, w: f64, best: &mut (usize, String)) {
    let Some(first) = balls.first() else { return };
    let rho = w - first.r;
    if rho <= 0.0 {
        return;
    }
    let two_pi = 2.0 * PI;
    let mut events: Vec<(f64, i32)> = Vec::new();
    for p in balls {
        events.clear();
        let mut base = 0usize;
        let (ci, cj) = (cell(p.cx, w), cell(p.cy, w));
        for di in -2..=2 {
            for dj in -2..=2 {
                let Some(ids) = grid.get(&(ci + di, cj + dj)) else {
                    continue;
                };
                for &j in ids {
                    let q = &balls[j];
                    let (dx, dy) = (q.cx - p.cx, q.cy - p.cy);
                    let d = dx.hypot(dy);
                    if d <= TAU {
                        base += 1;
                        continue;
                    }
                    if d > 2.0 * rho + TAU {
                        continue;
                    }
                    let half = (d / (2.0 * rho)).min(1.0).acos();
                    let start = (dy.atan2(dx) - half).rem_euclid(two_pi);
                    let end = start + 2.0 * half;
                    events.extend([(start, 1), (end, -1), (start + two_pi, 1), (end + two_pi, -1)]);
                }
            }
        }
        if base + events.len() / 4 <= best.0 {
            continue;
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let mut cur = 0i32;
        for &(angle, delta) in &events {
            cur += delta;
            let count = base + cur.max(0) as usize;
            if count > best.0 {
                let (sn, cs) = angle.sin_cos();
                let c = [p.cx + rho * cs, p.cy + rho * sn];
                *best = (count, format!("ball(x={};y={})", c[0], c[1]));
            }
        }
    }
}

/// Radius-w ball counting over candidate centers: every ball center, the
/// center of every dyadic square of side w that holds a ball, and an exact
/// search over query balls with a ball center on their boundary.
pub fn ball_profile_brute(scale: Scale, balls: &[Ball], s: f64) -> Result<SpacingProfile> {
    check_exponent(s)?;
    uniform_radius(balls)?;
    if balls.len() > BRUTE_LIMIT {
        return Err(Error::SizeGuard {
            what: "ball_profile_brute",
            got: balls.len(),
            limit: BRUTE_LIMIT,
        });
    }
    let k = scale.k();
    let levels: Vec<(u32, f64)> = scale.dyadic_levels().collect();
    let raw = par::map(&levels, |&(n, w)| {
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (idx, b) in balls.iter().enumerate() {
            grid.entry((cell(b.cx, w), cell(b.cy, w))).or_default().push(idx);
        }
        let mut centers: Vec<[f64; 2]> = balls.iter().map(Ball::center).collect();
        let mut squares: Vec<(i64, i64)> = balls
            .iter()
            .filter(|b| finest_level(b, k).is_some_and(|top| top >= n))
            .map(|b| (cell(b.cx, w), cell(b.cy, w)))
            .collect();
        squares.sort_unstable();
        squares.dedup();
        centers.extend(
            squares
                .iter()
                .map(|&(i, j)| [(i as f64 + 0.5) * w, (j as f64 + 0.5) * w]),
        );
        let mut best = (0usize, String::new());
        for c in &centers {
            let query = Ball::new(c[0], c[1], w);
            let (ci, cj) = (cell(c[0], w), cell(c[1], w));
            let mut count = 0;
            for di in -1..=1 {
                for dj in -1..=1 {
                    if let Some(ids) = grid.get(&(ci + di, cj + dj)) {
                        count += ids.iter().filter(|&&i| ball_in_ball(&balls[i], &query)).count();
                    }
                }
            }
            if count > best.0 {
                best = (count, format!("ball(x={};y={})", c[0], c[1]));
            }
        }
        boundary_search(balls, &grid, w, &mut best);
        (n, w, best.0, best.1)
    });
    Ok(SpacingProfile::from_counts(scale, s, raw))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeMode {
    DyadicNet,
    Brute,
}

/// Tubes sorted by direction, for windowed angle queries.
struct AngleIndex<'a> {
    tubes: &'a [Tube],
    order: Vec<usize>,
    thetas: Vec<f64>,
}

impl<'a> AngleIndex<'a> {
    fn new(tubes: &'a [Tube]) -> Self {
        let mut order: Vec<usize> = (0..tubes.len()).collect();
        order.sort_by(|&a, &b| tubes[a].theta.total_cmp(&tubes[b].theta));
        let thetas = order.iter().map(|&i| tubes[i].theta).collect();
        Self { tubes, order, thetas }
    }

    /// Indices of tubes whose direction is within `radius` of `theta` mod π.
    fn near(&self, theta: f64, radius: f64, out: &mut Vec<usize>) {
        out.clear();
        if self.order.is_empty() {
            return;
        }
        if radius >= PI / 2.0 {
            out.extend(self.order.iter().copied());
            return;
        }
        let mut push_range = |lo: f64, hi: f64| {
            let a = self.thetas.partition_point(|&t| t < lo);
            let b = self.thetas.partition_point(|&t| t <= hi);
            out.extend(self.order[a..b].iter().copied());
        };
        let lo = theta - radius;
        let hi = theta + radius;
        push_range(lo.max(0.0), hi.min(PI));
        if lo < 0.0 {
            push_range(lo + PI, PI);
        }
        if hi >= PI {
            push_range(0.0, hi - PI);
        }
        out.sort_unstable();
        out.dedup();
    }

    fn tube(&self, i: usize) -> &Tube {
        &self.tubes[i]
    }
}

/// Max over window positions `a` of #{intervals [lo, hi] containing a}.
fn max_coverage(intervals: &mut [(f64, f64)]) -> (usize, f64) {
    let mut events: Vec<(f64, i32)> = Vec::with_capacity(2 * intervals.len());
    for &(lo, hi) in intervals.iter() {
        if lo <= hi {
            events.push((lo, 1));
            events.push((hi, -1));
        }
    }
    // starts before ends at equal coordinates: intervals are closed
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut cur = 0i32;
    let mut best = (0usize, 0.0);
    for (x, d) in events {
        cur += d;
        if cur as usize > best.0 {
            best = (cur as usize, x);
        }
    }
    best
}

/// Count over a fixed direction `phi` of tubes fitting in some width-`w`,
/// length-2 query tube whose normal offset is a multiple of w/2.
fn net_direction(idx: &AngleIndex, cand: &[usize], phi: f64, w: f64) -> (usize, i64, f64) {
    let (s, c) = phi.sin_cos();
    let half = 0.5 * w;
    let slack = 1e-9;
    let mut buckets: HashMap<i64, Vec<(f64, f64)>> = HashMap::new();
    for &i in cand {
        let t = idx.tube(i);
        let (mut ulo, mut uhi, mut vlo, mut vhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for [x, y] in t.corners() {
            let u = x * c + y * s;
            let v = -x * s + y * c;
            ulo = ulo.min(u);
            uhi = uhi.max(u);
            vlo = vlo.min(v);
            vhi = vhi.max(v);
        }
        if vhi - vlo > w * (1.0 + slack) || uhi - ulo > 2.0 * (1.0 + slack) {
            continue;
        }
        let m_lo = ((vhi - half) / half - slack).ceil() as i64;
        let m_hi = ((vlo + half) / half + slack).floor() as i64;
        for m in m_lo..=m_hi {
            buckets.entry(m).or_default().push((uhi - 1.0, ulo + 1.0));
        }
    }
    let mut best = (0usize, 0i64, 0.0);
    let mut keys: Vec<i64> = buckets.keys().copied().collect();
    keys.sort_unstable();
    for m in keys {
        let ivs = buckets.get_mut(&m).expect("key present");
        let (count, a) = max_coverage(ivs);
        if count > best.0 {
            best = (count, m, a);
        }
    }
    best
}

/// Smallest power-of-two direction count with angular step ≤ w.
fn direction_count(w: f64) -> u64 {
    let mut n = 4u64;
    while PI / n as f64 > w {
        n *= 2;
    }
    n
}

/// Tube profile over a canonical net of w × 2 query tubes, optionally
/// augmented by queries anchored on every data tube.
pub fn tube_profile(scale: Scale, tubes: &[Tube], s: f64, mode: TubeMode) -> Result<SpacingProfile> {
    check_exponent(s)?;
    uniform_width(tubes)?;
    if mode == TubeMode::Brute && tubes.len() > BRUTE_LIMIT {
        return Err(Error::SizeGuard {
            what: "tube_profile(brute)",
            got: tubes.len(),
            limit: BRUTE_LIMIT,
        });
    }
    let idx = AngleIndex::new(tubes);
    let min_len = tubes.iter().map(|t| t.length).fold(f64::INFINITY, f64::min);
    let levels: Vec<(u32, f64)> = scale.dyadic_levels().collect();
    let raw = par::map(&levels, |&(n, w)| {
        // a tube of length L fits in width w only if |sin Δθ| ≤ w / L
        let radius = if min_len.is_finite() && w < min_len {
            (w / min_len).asin() + 1e-9
        } else {
            PI
        };
        let mut cand = Vec::new();
        let mut best = (0usize, String::new());
        let nd = direction_count(w);
        for j in 0..nd {
            let phi = j as f64 * PI / nd as f64;
            idx.near(phi, radius, &mut cand);
            if cand.len() <= best.0 {
                continue;
            }
            let (count, m, a) = net_direction(&idx, &cand, phi, w);
            if count > best.0 {
                best = (
                    count,
                    format!("net(theta={phi};offset={};along={a})", m as f64 * 0.5 * w),
                );
            }
        }
        if mode == TubeMode::Brute {
            for (ai, anchor) in tubes.iter().enumerate() {
                let query = Tube::new(anchor.cx, anchor.cy, anchor.theta, w, 2.0);
                idx.near(anchor.theta, radius, &mut cand);
                if cand.len() <= best.0 {
                    continue;
                }
                let count = cand
                    .iter()
                    .filter(|&&i| tube_in_query_tube(idx.tube(i), &query))
                    .count();
                if count > best.0 {
                    best = (count, format!("anchor(tube={ai})"));
                }
            }
        }
        (n, w, best.0, best.1)
    });
    Ok(SpacingProfile::from_counts(scale, s, raw))
}

/// Max over balls of the number of balls (itself included) meeting it.
pub fn max_intersect_degree_balls(balls: &[Ball]) -> usize {
    ball_neighbours(balls).iter().map(Vec::len).max().unwrap_or(0)
}

/// Neighbour lists of the intersection relation on balls, each list
/// including the ball itself.
pub(crate) fn ball_neighbours(balls: &[Ball]) -> Vec<Vec<usize>> {
    if balls.is_empty() {
        return Vec::new();
    }
    let side = 2.0 * balls.iter().map(|b| b.r).fold(0.0, f64::max);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, b) in balls.iter().enumerate() {
        grid.entry((cell(b.cx, side), cell(b.cy, side))).or_default().push(i);
    }
    balls
        .iter()
        .map(|b| {
            let (ci, cj) = (cell(b.cx, side), cell(b.cy, side));
            let mut out = Vec::new();
            for di in -1..=1 {
                for dj in -1..=1 {
                    if let Some(ids) = grid.get(&(ci + di, cj + dj)) {
                        out.extend(ids.iter().copied().filter(|&i| balls_intersect(b, &balls[i])));
                    }
                }
            }
            out.sort_unstable();
            out
        })
        .collect()
}

/// Neighbour lists of the "≥ half-area overlap" relation on tubes, each
/// list including the tube itself.
pub(crate) fn overlap_neighbours(tubes: &[Tube]) -> Vec<Vec<usize>> {
    if tubes.is_empty() {
        return Vec::new();
    }
    let wmax = tubes.iter().map(|t| t.width).fold(0.0, f64::max);
    let lmin = tubes.iter().map(|t| t.length).fold(f64::INFINITY, f64::min);
    let lmax = tubes.iter().map(|t| t.length).fold(0.0, f64::max);
    // two rectangles at acute angle φ share at most w²/sin φ area
    let band = if 2.0 * wmax < lmin {
        (2.0 * wmax / lmin).asin() + 1e-9
    } else {
        PI / 2.0
    };
    let nb = ((PI / band).floor() as i64).max(1);
    let bucket_width = PI / nb as f64;
    let side = lmax.hypot(wmax);
    let key = |t: &Tube| {
        (
            ((t.theta / bucket_width).floor() as i64).min(nb - 1),
            cell(t.cx, side),
            cell(t.cy, side),
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, t) in tubes.iter().enumerate() {
        grid.entry(key(t)).or_default().push(i);
    }
    let buckets = |tb: i64| -> Vec<i64> {
        if nb < 3 {
            (0..nb).collect()
        } else {
            vec![(tb - 1).rem_euclid(nb), tb, (tb + 1).rem_euclid(nb)]
        }
    };
    let mut out = Vec::with_capacity(tubes.len());
    for (idx, t) in tubes.iter().enumerate() {
        let (tb, ci, cj) = key(t);
        let mut nbrs = Vec::new();
        for b in buckets(tb) {
            for di in -1..=1 {
                for dj in -1..=1 {
                    if let Some(ids) = grid.get(&(b, ci + di, cj + dj)) {
                        nbrs.extend(
                            ids.iter()
                                .copied()
                                .filter(|&i| i == idx || essential_overlap(&tubes[i], t) >= 0.5),
                        );
                    }
                }
            }
        }
        nbrs.sort_unstable();
        out.push(nbrs);
    }
    out
}

/// Max over tubes of the number of tubes (itself included) covering at least
/// half of its area.
pub fn max_overlap_degree_tubes(tubes: &[Tube]) -> usize {
    overlap_neighbours(tubes).iter().map(Vec::len).max().unwrap_or(0)
}
