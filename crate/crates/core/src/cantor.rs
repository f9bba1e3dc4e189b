//! Deterministic discrete Cantor sets of prescribed dimension and the
//! cross-shaped product sets built from them.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball_tube_intersects, Ball, Scale, Tube};

/// Surviving lattice points m (standing for mδ) of a dyadic Cantor set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteCantor {
    pub k: u32,
    pub s: f64,
    /// Sorted, includes 0 and D.
    pub points: Vec<u64>,
}

/// Number of level-k intervals kept: min(2^k, ⌈2^{ks}⌉).
pub fn target_count(k: u32, s: f64) -> u64 {
    let full = 1u64 << k;
    let want = ((k as f64 * s).exp2() - 1e-9).ceil() as u64;
    want.clamp(1, full)
}

/// Builds the set by pushing an integer quota down the dyadic tree.
///
/// The root carries N_k. A node with quota q and r levels left splits into
/// children with quotas ⌈q/2⌉ (left) and ⌊q/2⌋ (right) when q exceeds what one
/// child may hold, min(2^{r-1}, 2^{(r-1)s}); otherwise the whole quota goes to
/// the left child. Left-first filling keeps the prefix [0, d] dense.
pub fn cantor_generate(k: u32, s: f64) -> Result<DiscreteCantor> {
    let scale = Scale::new(k)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter {
            name: "s",
            value: s,
            reason: "Cantor dimension must lie in [0, 1]",
        });
    }
    let mut nodes: Vec<(u64, u64)> = vec![(0, target_count(k, s))];
    for j in 0..k {
        let r = (k - j) as f64;
        let cap = (r - 1.0).exp2().min(((r - 1.0) * s).exp2());
        let mut next = Vec::with_capacity(2 * nodes.len());
        for &(i, q) in &nodes {
            if q >= 2 && q as f64 > cap {
                next.push((2 * i, q.div_ceil(2)));
                next.push((2 * i + 1, q / 2));
            } else {
                next.push((2 * i, q));
            }
        }
        nodes = next;
    }
    let mut points: Vec<u64> = nodes.into_iter().map(|(i, _)| i).collect();
    points.push(scale.d_int());
    points.sort_unstable();
    points.dedup();
    Ok(DiscreteCantor { k, s, points })
}

/// Worst-case ratios found by an exhaustive dyadic scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub has_endpoints: bool,
    /// |points| / D^s.
    pub size_ratio: f64,
    /// max over closed dyadic intervals I of |points ∩ I| / (|I|/δ)^s.
    pub upper_ratio: f64,
    /// min over dyadic d of |points ∩ [0, d]| / (d/δ)^s.
    pub prefix_ratio: f64,
}

impl FrostmanReport {
    /// The four invariants with constants ½, 4 and ¼.
    pub fn passes(&self) -> bool {
        self.has_endpoints
            && (0.5..=4.0).contains(&self.size_ratio)
            && self.upper_ratio <= 4.0
            && self.prefix_ratio >= 0.25
    }
}

impl DiscreteCantor {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn count_in(&self, lo: u64, hi: u64) -> usize {
        let a = self.points.partition_point(|&p| p < lo);
        let b = self.points.partition_point(|&p| p <= hi);
        b - a
    }

    /// Scans every dyadic interval at every level.
    pub fn frostman_report(&self) -> FrostmanReport {
        let d = 1u64 << self.k;
        let mut upper: f64 = 0.0;
        let mut prefix = f64::INFINITY;
        for j in 0..=self.k {
            let len = d >> j;
            let weight = (len as f64).powf(self.s);
            for i in 0..(1u64 << j) {
                let c = self.count_in(i * len, (i + 1) * len);
                upper = upper.max(c as f64 / weight);
            }
            prefix = prefix.min(self.count_in(0, len) as f64 / weight);
        }
        FrostmanReport {
            has_endpoints: self.points.first() == Some(&0) && self.points.last() == Some(&d),
            size_ratio: self.len() as f64 / (d as f64).powf(self.s),
            upper_ratio: upper,
            prefix_ratio: prefix,
        }
    }
}

/// Cross-shaped product set inside the square [x0, x0 + w] × [y0, y0 + w].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductSet {
    pub k: u32,
    pub w: f64,
    pub origin: [f64; 2],
    /// Selected offsets m (in units of δ) with 1 ≤ m < w/δ.
    pub marks: Vec<u64>,
    pub balls: Vec<Ball>,
}

/// Offsets 1 ≤ m < W whose column (or row) is populated: the Cantor points
/// rescaled to [0, W], plus the columns adjacent to the endpoints 0 and W.
fn product_marks(cells: u64, s: f64) -> Result<Vec<u64>> {
    let depth = 64 - (cells - 1).leading_zeros();
    let depth = depth.max(1);
    let c = cantor_generate(depth, s)?;
    let full = 1u64 << depth;
    let mut marks: Vec<u64> = c
        .points
        .iter()
        .map(|&m| m * cells / full)
        .chain([1, cells - 1])
        .filter(|&m| m >= 1 && m < cells)
        .collect();
    marks.sort_unstable();
    marks.dedup();
    Ok(marks)
}

/// 𝒫_w with the square's lower-left corner at the origin.
pub fn build_pw(k: u32, w: f64, s: f64) -> Result<ProductSet> {
    build_pw_at(k, w, s, [0.0, 0.0])
}

/// 𝒫_w translated to the square with lower-left corner `origin`.
pub fn build_pw_at(k: u32, w: f64, s: f64, origin: [f64; 2]) -> Result<ProductSet> {
    let scale = Scale::new(k)?;
    let delta = scale.delta();
    let ratio = w / delta;
    let cells = ratio.round() as u64;
    if !(delta..=1.0).contains(&w) || (ratio - cells as f64).abs() > 1e-9 || !cells.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "w",
            value: w,
            reason: "side must be a multiple of 2δ in [δ, 1]",
        });
    }
    let marks = product_marks(cells, s)?;
    let marked: HashSet<u64> = marks.iter().copied().collect();
    let mut balls = Vec::new();
    for m in 1..cells {
        for n in 1..cells {
            if marked.contains(&m) || marked.contains(&n) {
                balls.push(Ball::new(
                    origin[0] + m as f64 * delta,
                    origin[1] + n as f64 * delta,
                    delta,
                ));
            }
        }
    }
    Ok(ProductSet {
        k,
        w,
        origin,
        marks,
        balls,
    })
}

/// Number of balls of the product set meeting `t`.
pub fn tube_hits_pw(t: &Tube, pw: &ProductSet) -> usize {
    pw.balls.iter().filter(|b| ball_tube_intersects(b, t)).count()
}

/// δ-balls covering Cantor(k, u) × {0, δ, …, 1}.
pub fn product_cover(k: u32, u: f64) -> Result<Vec<Ball>> {
    let scale = Scale::new(k)?;
    let c = cantor_generate(k, u)?;
    let delta = scale.delta();
    let d = scale.d_int();
    let mut balls = Vec::with_capacity(c.len() * (d as usize + 1));
    for &m in &c.points {
        for n in 0..=d {
            balls.push(Ball::new(m as f64 * delta, n as f64 * delta, delta));
        }
    }
    Ok(balls)
}
