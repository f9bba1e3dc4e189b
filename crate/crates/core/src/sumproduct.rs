//! Discretized sum-product instances: covers of A + B and A·C, the tubes
//! t_bc with midline y = cx − bc, and the ball families F_bc they must hit.
//!
//! The window [½, 4½]² is mapped onto the unit square by
//! (x, y) ↦ ((x − ½)/4, (y − ½)/4), so the incidence engine runs at k + 2.

use serde::{Deserialize, Serialize};

use crate::cantor::cantor_generate;
use crate::config::{Configuration, Meta};
use crate::error::{Error, Result};
use crate::geometry::{ball_tube_intersects, Ball, Scale, Tube, TAU};
use crate::par;
use crate::spacing::ball_profile_brute;

const FRAME_SHIFT: f64 = 0.5;
const FRAME_SCALE: f64 = 0.25;

/// Greedy δ-ball cover of a finite point set on a line. Each ball starts at
/// the leftmost uncovered point; returns the ball centers.
pub fn greedy_cover(points: &[f64], delta: f64) -> Vec<f64> {
    let mut p = points.to_vec();
    p.sort_by(f64::total_cmp);
    let mut centers = Vec::new();
    let mut i = 0;
    while i < p.len() {
        let start = p[i];
        centers.push(start + delta);
        while i < p.len() && p[i] <= start + 2.0 * delta + TAU {
            i += 1;
        }
    }
    centers
}

/// Center of the cover ball containing x.
fn cover_center(cover: &[f64], x: f64, delta: f64) -> Option<f64> {
    let i = cover.partition_point(|&c| c - delta <= x + TAU);
    let c = *cover.get(i.checked_sub(1)?)?;
    (x <= c + delta + TAU).then_some(c)
}

/// 1D spacing constant: max over w = δ2^j ≤ 1 and windows [a, a + 2w]
/// anchored at a center of count / (w/δ)^s, at least 1.
pub fn spacing_constant_1d(centers: &[f64], delta: f64, s: f64) -> f64 {
    let mut p = centers.to_vec();
    p.sort_by(f64::total_cmp);
    let mut best: f64 = 1.0;
    let mut w = delta;
    while w <= 1.0 + TAU {
        let mut hi = 0;
        for (lo, &x) in p.iter().enumerate() {
            hi = hi.max(lo);
            while hi < p.len() && p[hi] <= x + 2.0 * w + TAU {
                hi += 1;
            }
            best = best.max((hi - lo) as f64 / (w / delta).powf(s));
        }
        w *= 2.0;
    }
    best
}

fn check_set(name: &'static str, centers: &[f64], delta: f64) -> Result<Vec<f64>> {
    let mut p = centers.to_vec();
    p.sort_by(f64::total_cmp);
    if let Some(&x) = p.iter().find(|&&x| !(1.0 - TAU..=2.0 + TAU).contains(&x)) {
        return Err(Error::InvalidParameter {
            name,
            value: x,
            reason: "centers must lie in [1, 2]",
        });
    }
    if p.is_empty() {
        return Err(Error::TooFewPoints { need: 1, got: 0 });
    }
    // touching balls are allowed
    if p.windows(2).any(|w| w[1] - w[0] < 2.0 * delta - TAU) {
        return Err(Error::NotDisjoint { name });
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumProductInstance {
    pub k: u32,
    /// Declared exponents (u, v, v′) of A, B, C.
    pub exponents: [f64; 3],
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Cover centers of {a + b}.
    pub x: Vec<f64>,
    /// Cover centers of {a·c}.
    pub y: Vec<f64>,
}

/// Builds covers for the given center sets (each in [1, 2], pairwise
/// separated by at least 2δ).
pub fn build_instance(k: u32, exponents: [f64; 3], a: &[f64], b: &[f64], c: &[f64]) -> Result<SumProductInstance> {
    let scale = Scale::new(k)?;
    Scale::new(k + 2)?;
    let delta = scale.delta();
    let a = check_set("A", a, delta)?;
    let b = check_set("B", b, delta)?;
    let c = check_set("C", c, delta)?;
    let sums: Vec<f64> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
    let prods: Vec<f64> = a.iter().flat_map(|x| c.iter().map(move |y| x * y)).collect();
    Ok(SumProductInstance {
        k,
        exponents,
        x: greedy_cover(&sums, delta),
        y: greedy_cover(&prods, delta),
        a,
        b,
        c,
    })
}

/// Arithmetic progression 1 + (2i + 1)δ, i < D/2, for A, B and C.
pub fn ap_instance(k: u32) -> Result<SumProductInstance> {
    let scale = Scale::new(k)?;
    let delta = scale.delta();
    let pts: Vec<f64> = (0..scale.d_int() / 2)
        .map(|i| 1.0 + (2 * i + 1) as f64 * delta)
        .collect();
    build_instance(k, [1.0, 1.0, 1.0], &pts, &pts, &pts)
}

/// Cantor centers 1 + (2m + 1)δ for m in the level-(k−1) set of dimension s,
/// dropping the right endpoint.
pub fn cantor_centers(k: u32, s: f64) -> Result<Vec<f64>> {
    let scale = Scale::new(k)?;
    if k < 2 {
        return Err(Error::InvalidScale {
            k,
            max: crate::geometry::MAX_K,
        });
    }
    let half = scale.d_int() / 2;
    let delta = scale.delta();
    Ok(cantor_generate(k - 1, s)?
        .points
        .into_iter()
        .filter(|&m| m < half)
        .map(|m| 1.0 + (2 * m + 1) as f64 * delta)
        .collect())
}

pub fn cantor_instance(k: u32, u: f64, v: f64, vp: f64) -> Result<SumProductInstance> {
    let a = cantor_centers(k, u)?;
    let b = cantor_centers(k, v)?;
    let c = cantor_centers(k, vp)?;
    build_instance(k, [u, v, vp], &a, &b, &c)
}

impl SumProductInstance {
    pub fn delta(&self) -> f64 {
        (-(self.k as f64)).exp2()
    }

    /// Scale of the unit-square frame.
    pub fn frame_scale(&self) -> Scale {
        Scale::new(self.k + 2).expect("checked at build time")
    }

    /// |F| = |X||Y|.
    pub fn f_size(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn n_tubes(&self) -> usize {
        self.b.len() * self.c.len()
    }

    pub fn to_frame(x: f64, y: f64) -> (f64, f64) {
        ((x - FRAME_SHIFT) * FRAME_SCALE, (y - FRAME_SHIFT) * FRAME_SCALE)
    }

    pub fn frame_ball(&self, x: f64, y: f64) -> Ball {
        let (fx, fy) = Self::to_frame(x, y);
        Ball::new(fx, fy, self.delta() * FRAME_SCALE)
    }

    /// t_bc in the frame: the δ/2-neighbourhood of y = cx − bc over
    /// x ∈ [b + 1 − 2δ, b + 2 + 2δ].
    pub fn tube(&self, b: f64, c: f64) -> Tube {
        let delta = self.delta();
        let xm = b + 1.5;
        let (fx, fy) = Self::to_frame(xm, c * (xm - b));
        let len = (1.0 + 4.0 * delta) * (1.0 + c * c).sqrt();
        Tube::new(fx, fy, c.atan(), delta * FRAME_SCALE, len * FRAME_SCALE)
    }

    /// Cover centers (X̃(a + b), Ỹ(a·c)) for each a, deduplicated.
    pub fn family(&self, b: f64, c: f64) -> Vec<(f64, f64)> {
        let delta = self.delta();
        let mut out: Vec<(f64, f64)> = self
            .a
            .iter()
            .map(|&a| {
                (
                    cover_center(&self.x, a + b, delta).expect("sum is covered"),
                    cover_center(&self.y, a * c, delta).expect("product is covered"),
                )
            })
            .collect();
        out.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        out.dedup();
        out
    }

    /// Tubes t_bc and the union of the families, in the frame.
    pub fn to_configuration(&self) -> Configuration {
        let mut pts = Vec::new();
        let mut tubes = Vec::with_capacity(self.n_tubes());
        for &b in &self.b {
            for &c in &self.c {
                tubes.push(self.tube(b, c));
                pts.extend(self.family(b, c));
            }
        }
        pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
        pts.dedup();
        let balls = pts.into_iter().map(|(x, y)| self.frame_ball(x, y)).collect();
        let [u, v, vp] = self.exponents;
        let meta = Meta::new("sumproduct", v + vp, u)
            .with("frame_shift", FRAME_SHIFT)
            .with("frame_scale", FRAME_SCALE)
            .with("base_k", self.k as f64);
        Configuration::new(self.frame_scale(), balls, tubes, meta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumProductReport {
    pub k: u32,
    pub n_a: usize,
    pub n_b: usize,
    pub n_c: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub n_f: usize,
    pub n_tubes: usize,
    /// Distinct tubes equals |B||C|.
    pub tube_count_ok: bool,
    /// Every t_bc meets every ball of F_bc.
    pub all_meet: bool,
    /// Largest distance from (a + b, a·c) to its cover point, over δ.
    pub max_distance: f64,
    pub distance_ok: bool,
    /// Σ_bc |F_bc|.
    pub family_incidences: u64,
    /// Largest implied K over the families at exponent u, if checked.
    pub family_k: Option<f64>,
    pub family_ok: Option<bool>,
    pub k_u: f64,
    pub k_v: f64,
    pub k_vp: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl SumProductReport {
    pub fn structural_ok(&self) -> bool {
        self.tube_count_ok && self.all_meet && self.distance_ok && self.family_ok.unwrap_or(true)
    }
}

/// max(|X|, |Y|) lower bound with unit constant:
/// K_u^{−e} K_v^{−e} D^{−e} |B|^e |C|^e |A|^{1/(2(1−c))},
/// c = 1/max(u + v + v′, 2), e = c/(2(1 − c)).
pub fn corollary_rhs(exponents: [f64; 3], k_u: f64, k_v: f64, d: f64, na: usize, nb: usize, nc: usize) -> f64 {
    let [u, v, vp] = exponents;
    let c = 1.0 / (u + v + vp).max(2.0);
    let e = c / (2.0 * (1.0 - c));
    let g = 1.0 / (2.0 * (1.0 - c));
    let lg = -e * k_u.log2() - e * k_v.log2() - e * d.log2()
        + e * (nb as f64).log2()
        + e * (nc as f64).log2()
        + g * (na as f64).log2();
    lg.exp2()
}

/// Structural checks and the LHS/RHS comparison. With `validate_families`
/// every F_bc is spacing-validated at exponent u (limit 4·64·K_u).
pub fn verify_instance(inst: &SumProductInstance, validate_families: bool) -> Result<SumProductReport> {
    let delta = inst.delta();
    let [u, v, vp] = inst.exponents;
    let k_u = spacing_constant_1d(&inst.a, delta, u);
    let k_v = spacing_constant_1d(&inst.b, delta, v);
    let k_vp = spacing_constant_1d(&inst.c, delta, vp);
    let frame = inst.frame_scale();

    let pairs: Vec<(f64, f64)> = inst
        .b
        .iter()
        .flat_map(|&b| inst.c.iter().map(move |&c| (b, c)))
        .collect();
    struct PairCheck {
        meet: bool,
        dist: f64,
        size: usize,
        k: f64,
    }
    let checks = par::map(&pairs, |&(b, c)| -> Result<PairCheck> {
        let t = inst.tube(b, c);
        let mut dist: f64 = 0.0;
        for &a in &inst.a {
            let x = cover_center(&inst.x, a + b, delta).expect("sum is covered");
            let y = cover_center(&inst.y, a * c, delta).expect("product is covered");
            dist = dist.max((x - (a + b)).hypot(y - a * c) / delta);
        }
        let fam = inst.family(b, c);
        let balls: Vec<Ball> = fam.iter().map(|&(x, y)| inst.frame_ball(x, y)).collect();
        let meet = balls.iter().all(|p| ball_tube_intersects(p, &t));
        let k = if validate_families {
            ball_profile_brute(frame, &balls, u)?.k_max()
        } else {
            0.0
        };
        Ok(PairCheck {
            meet,
            dist,
            size: balls.len(),
            k,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut tube_keys: Vec<(u64, u64)> = pairs.iter().map(|(b, c)| (b.to_bits(), c.to_bits())).collect();
    tube_keys.sort_unstable();
    tube_keys.dedup();

    let max_distance = checks.iter().map(|c| c.dist).fold(0.0, f64::max);
    let family_k = validate_families.then(|| checks.iter().map(|c| c.k).fold(0.0, f64::max));
    let lhs = inst.x.len().max(inst.y.len()) as f64;
    let rhs = corollary_rhs(
        inst.exponents,
        k_u,
        k_v,
        (inst.k as f64).exp2(),
        inst.a.len(),
        inst.b.len(),
        inst.c.len(),
    );
    Ok(SumProductReport {
        k: inst.k,
        n_a: inst.a.len(),
        n_b: inst.b.len(),
        n_c: inst.c.len(),
        n_x: inst.x.len(),
        n_y: inst.y.len(),
        n_f: inst.f_size(),
        n_tubes: inst.n_tubes(),
        tube_count_ok: tube_keys.len() == inst.b.len() * inst.c.len(),
        all_meet: checks.iter().all(|c| c.meet),
        max_distance,
        distance_ok: max_distance <= std::f64::consts::SQRT_2 + 1e-9,
        family_incidences: checks.iter().map(|c| c.size as u64).sum(),
        family_ok: family_k.map(|k| k <= 4.0 * 64.0 * k_u),
        family_k,
        k_u,
        k_v,
        k_vp,
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}
