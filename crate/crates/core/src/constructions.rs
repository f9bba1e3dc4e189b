//! Generators for the extremal ball/tube configurations, Furstenberg-type
//! configurations and the product-set regularization.
//!
//! Counts that are powers of D are floored. Balls of constructions 2–4 sit on
//! the odd lattice (δ(2ℤ+1))², so every ball/tube decision generated here has
//! a margin of at least δ/2 except for incidental contacts between unrelated
//! bundles.

use std::collections::{HashMap, HashSet};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cantor::{build_pw_at, cantor_generate, product_cover};
use crate::config::{Configuration, Meta};
use crate::error::{Error, Result};
use crate::geometry::{Ball, Scale, Square, Tube};
use crate::spacing::{cell, finest_level};

/// Angular step between neighbouring tubes of a fan, in units of the nominal
/// step. Two unit tubes crossing at angle φ share a δ/sin φ fraction of their
/// area, so 3δ keeps neighbours below the half-overlap threshold.
pub const ANGLE_SEP: f64 = 3.0;

const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructionId {
    One,
    Two,
    Three,
    Four,
}

impl ConstructionId {
    pub const ALL: [ConstructionId; 4] = [Self::One, Self::Two, Self::Three, Self::Four];

    pub fn number(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
            Self::Three => 3,
            Self::Four => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::One => "construction1",
            Self::Two => "construction2",
            Self::Three => "construction3",
            Self::Four => "construction4",
        }
    }

    /// Whether (α, β) lies in the closed parameter region of the generator.
    pub fn admits(self, alpha: f64, beta: f64) -> bool {
        let dom = |x: f64| (0.0..=2.0).contains(&x);
        if !dom(alpha) || !dom(beta) {
            return false;
        }
        match self {
            Self::One => alpha <= beta + 1.0 + EPS && beta <= alpha + 1.0 + EPS && alpha + beta <= 3.0 + EPS,
            Self::Two => alpha + EPS >= beta + 1.0,
            Self::Three => beta + EPS >= alpha + 1.0,
            Self::Four => alpha + beta + EPS >= 3.0,
        }
    }

    fn requirement(self) -> &'static str {
        match self {
            Self::One => "alpha <= beta + 1, beta <= alpha + 1, alpha + beta <= 3",
            Self::Two => "alpha >= beta + 1",
            Self::Three => "beta >= alpha + 1",
            Self::Four => "alpha + beta >= 3",
        }
    }

    fn check(self, k: u32, alpha: f64, beta: f64) -> Result<Scale> {
        if !self.admits(alpha, beta) {
            return Err(Error::RegionViolation {
                construction: self.name(),
                alpha,
                beta,
                requirement: self.requirement(),
            });
        }
        if k < 4 {
            return Err(Error::InvalidParameter {
                name: "k",
                value: k as f64,
                reason: "constructions need k >= 4",
            });
        }
        Scale::new(k)
    }
}

impl fmt::Display for ConstructionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for ConstructionId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().trim_start_matches("construction") {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "3" => Ok(Self::Three),
            "4" => Ok(Self::Four),
            other => Err(format!("unknown construction {other:?} (expected 1-4)")),
        }
    }
}

/// Dispatch on the construction id.
pub fn generate(id: ConstructionId, k: u32, alpha: f64, beta: f64) -> Result<Configuration> {
    match id {
        ConstructionId::One => construct1(k, alpha, beta),
        ConstructionId::Two => construct2(k, alpha, beta),
        ConstructionId::Three => construct3(k, alpha, beta),
        ConstructionId::Four => construct4(k, alpha, beta),
    }
}

fn floor_pow(d: f64, e: f64) -> usize {
    ((d.powf(e) + EPS).floor() as usize).max(1)
}

/// Nearest point of the odd lattice δ(2ℤ+1).
fn snap_odd(x: f64, delta: f64) -> f64 {
    let j = ((x / delta - 1.0) / 2.0).round();
    (2.0 * j + 1.0) * delta
}

/// Bundle exponents for the first construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Construction1Params {
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub lambda: f64,
}

impl Construction1Params {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let id = ConstructionId::One;
        if !id.admits(alpha, beta) {
            return Err(Error::RegionViolation {
                construction: id.name(),
                alpha,
                beta,
                requirement: id.requirement(),
            });
        }
        let a = alpha.min(1.0);
        let b = beta.min(1.0);
        // α = β = 0 is a single ball on a single tube
        let (gamma, kappa) = if a + b == 0.0 {
            (0.5, 0.0)
        } else {
            ((a - alpha + beta) / (a + b), (a * beta + b * alpha - a * b) / (a + b))
        };
        Ok(Self {
            alpha,
            beta,
            a,
            b,
            gamma,
            kappa,
            lambda: gamma.min(1.0 - gamma),
        })
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must lie in [0, 1]",
            });
        }
        self.lambda = lambda;
        Ok(self)
    }

    /// The four defining inequalities for λ, each with slack 1e-12. With
    /// m = max(λ, 1 − λ):
    /// (1−γ)a(a+1−α) + mκ ≤ a, γb(b+1−β) + mκ ≤ b,
    /// γ + (1−γ)min(a, b) ≥ mκ and 0 ≤ λ ≤ min(γ, 1−γ).
    pub fn lambda_conditions(&self) -> [bool; 4] {
        let tol = 1e-12;
        let (a, b, g, kap, l) = (self.a, self.b, self.gamma, self.kappa, self.lambda);
        let m = l.max(1.0 - l);
        [
            (1.0 - g) * a * (a + 1.0 - self.alpha) + m * kap <= a + tol,
            g * b * (b + 1.0 - self.beta) + m * kap <= b + tol,
            g + (1.0 - g) * a.min(b) + tol >= m * kap,
            -tol <= l && l <= g.min(1.0 - g) + tol && g.min(1.0 - g) <= 1.0 + tol,
        ]
    }

    /// Incidence exponent guaranteed by the bundle count: α + γb.
    pub fn exponent(&self) -> f64 {
        self.alpha + self.gamma * self.b
    }
}

/// Index ranges of one bundle's tubes and balls inside a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    pub tubes: Range<usize>,
    pub balls: Range<usize>,
}

pub fn construct1(k: u32, alpha: f64, beta: f64) -> Result<Configuration> {
    let params = Construction1Params::new(alpha, beta)?;
    Ok(construct1_with(k, &params)?.0)
}

/// Bundles of rotated tubes sharing a δ × δ^{1-γ} core, with balls strung
/// along the core axis, arranged on a grid of translates (columns) and
/// rotates (rows).
pub fn construct1_with(k: u32, p: &Construction1Params) -> Result<(Configuration, Vec<Bundle>)> {
    let scale = ConstructionId::One.check(k, p.alpha, p.beta)?;
    let delta = scale.delta();
    let d = scale.d();

    let n_bundles = floor_pow(d, p.kappa);
    let cols = (d.powf((1.0 - p.lambda) * p.kappa).round() as usize).clamp(1, n_bundles);
    let rows = n_bundles.div_ceil(cols);

    let n_tubes = floor_pow(d, (1.0 - p.gamma) * p.a);
    let step_in = ANGLE_SEP * delta.powf(p.gamma + (1.0 - p.gamma) * p.a);
    let fan = step_in * (n_tubes - 1) as f64;
    let step_row = delta.powf(p.lambda * p.kappa).max(fan + 2.0 * step_in);

    let n_balls = floor_pow(d, p.gamma * p.b);
    let ball_gap = delta.powf(1.0 - p.gamma + p.gamma * p.b);

    let mut balls = Vec::with_capacity(n_bundles * n_balls);
    let mut tubes = Vec::with_capacity(n_bundles * n_tubes);
    let mut bundles = Vec::with_capacity(n_bundles);
    for idx in 0..n_bundles {
        let (r, c) = (idx / cols, idx % cols);
        let ox = (c as f64 + 0.5) / cols as f64;
        let oy = (r as f64 + 0.5) / rows as f64;
        let axis = FRAC_PI_2 + (r as f64 - (rows as f64 - 1.0) / 2.0) * step_row;
        let t0 = tubes.len();
        for i in 0..n_tubes {
            let th = axis + (i as f64 - (n_tubes as f64 - 1.0) / 2.0) * step_in;
            tubes.push(Tube::unit(ox, oy, th, delta));
        }
        let b0 = balls.len();
        let (s, co) = axis.sin_cos();
        for i in 0..n_balls {
            let rho = (i as f64 - (n_balls as f64 - 1.0) / 2.0) * ball_gap;
            balls.push(Ball::new(ox + rho * co, oy + rho * s, delta));
        }
        bundles.push(Bundle {
            tubes: t0..tubes.len(),
            balls: b0..balls.len(),
        });
    }
    let meta = Meta::new(ConstructionId::One.name(), p.alpha, p.beta)
        .with("gamma", p.gamma)
        .with("kappa", p.kappa)
        .with("lambda", p.lambda)
        .with("bundles", n_bundles)
        .with("grid_cols", cols)
        .with("grid_rows", rows)
        .with("tubes_per_bundle", n_tubes)
        .with("balls_per_bundle", n_balls)
        .with("angle_sep", ANGLE_SEP);
    Ok((Configuration::new(scale, balls, tubes, meta), bundles))
}

/// Vertical fans of tubes with apex on the horizontal segment y = ½ + δ.
/// Returns the tubes and the apex x-coordinates.
fn fan_bundles(scale: Scale, alpha: f64) -> (Vec<Tube>, Vec<f64>, f64, usize) {
    let delta = scale.delta();
    let spacing = delta.powf(alpha - 1.0).max(2.0 * delta);
    let n_b = ((0.5 / spacing + EPS).floor() as usize).max(1);
    let x0 = 0.5 - (n_b as f64 - 1.0) / 2.0 * spacing;
    // spacing ≥ 2δ keeps the snapped apexes distinct
    let centers: Vec<f64> = (0..n_b).map(|i| snap_odd(x0 + i as f64 * spacing, delta)).collect();
    // total fan angle ½ keeps each bundle inside a ¼ × 1 rectangle
    let step = ANGLE_SEP * delta;
    let n_f = (0.5 / step + EPS).floor() as usize + 1;
    let y = 0.5 + delta;
    let mut tubes = Vec::with_capacity(n_b * n_f);
    for &x in &centers {
        for i in 0..n_f {
            let th = FRAC_PI_2 + (i as f64 - (n_f as f64 - 1.0) / 2.0) * step;
            tubes.push(Tube::unit(x, y, th, delta));
        }
    }
    (tubes, centers, spacing, n_f)
}

/// δ^{α-1}-separated fans, with δ^β-separated balls at some fan apexes.
pub fn construct2(k: u32, alpha: f64, beta: f64) -> Result<Configuration> {
    let id = ConstructionId::Two;
    let scale = id.check(k, alpha, beta)?;
    let delta = scale.delta();
    let (tubes, centers, spacing, n_f) = fan_bundles(scale, alpha);
    let every = ((delta.powf(beta) / spacing - EPS).ceil() as usize).max(1);
    let y = 0.5 + delta;
    let balls: Vec<Ball> = centers.iter().step_by(every).map(|&x| Ball::new(x, y, delta)).collect();
    let meta = Meta::new(id.name(), alpha, beta)
        .with("bundles", centers.len())
        .with("bundle_spacing", spacing)
        .with("tubes_per_bundle", n_f)
        .with("ball_every", every)
        .with("angle_sep", ANGLE_SEP);
    Ok(Configuration::new(scale, balls, tubes, meta))
}

/// Columns of lattice balls, some of which carry a vertical tube.
pub fn construct3(k: u32, alpha: f64, beta: f64) -> Result<Configuration> {
    let id = ConstructionId::Three;
    let scale = id.check(k, alpha, beta)?;
    let delta = scale.delta();
    let d = scale.d();
    let half = scale.d_int() as usize / 2;
    let n_c = floor_pow(d, beta - 1.0).min(half);
    let col_x: Vec<f64> = (0..n_c).map(|i| (2 * (i * half / n_c) + 1) as f64 * delta).collect();
    let mut balls = Vec::with_capacity(n_c * half);
    for &x in &col_x {
        for j in 0..half {
            balls.push(Ball::new(x, (2 * j + 1) as f64 * delta, delta));
        }
    }
    let n_t = floor_pow(d, alpha).min(n_c);
    let tubes: Vec<Tube> = (0..n_t)
        .map(|t| Tube::unit(col_x[t * n_c / n_t], 0.5, FRAC_PI_2, delta))
        .collect();
    let meta = Meta::new(id.name(), alpha, beta)
        .with("ball_columns", n_c)
        .with("balls_per_column", half)
        .with("tube_columns", n_t);
    Ok(Configuration::new(scale, balls, tubes, meta))
}

/// Fans as in construction 2 over a δ^{β/2}-spaced ball grid in [¼, ¾]².
pub fn construct4(k: u32, alpha: f64, beta: f64) -> Result<Configuration> {
    let id = ConstructionId::Four;
    let scale = id.check(k, alpha, beta)?;
    let delta = scale.delta();
    let (tubes, centers, spacing, n_f) = fan_bundles(scale, alpha);
    let gap = delta.powf(beta / 2.0).max(2.0 * delta);
    let n_g = ((scale.d().powf(beta / 2.0) / 2.0 + EPS).floor() as usize)
        .min((0.5 / gap + EPS).floor() as usize)
        .max(1);
    let start = 0.5 - (n_g as f64 - 1.0) / 2.0 * gap;
    let line: Vec<f64> = (0..n_g).map(|i| snap_odd(start + i as f64 * gap, delta)).collect();
    let mut balls = Vec::with_capacity(n_g * n_g);
    for &x in &line {
        for &y in &line {
            balls.push(Ball::new(x, y, delta));
        }
    }
    let meta = Meta::new(id.name(), alpha, beta)
        .with("bundles", centers.len())
        .with("bundle_spacing", spacing)
        .with("tubes_per_bundle", n_f)
        .with("grid_side", n_g)
        .with("grid_spacing", gap)
        .with("angle_sep", ANGLE_SEP);
    Ok(Configuration::new(scale, balls, tubes, meta))
}

fn check_unit(name: &'static str, x: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&x) {
        return Err(Error::InvalidParameter {
            name,
            value: x,
            reason: "outside the admissible range",
        });
    }
    Ok(())
}

/// δ-balls covering Cantor(k, u) × [0, 1].
pub fn furstenberg_product(k: u32, u: f64) -> Result<Vec<Ball>> {
    check_unit("u", u, 0.0, 1.0)?;
    product_cover(k, u)
}

/// Tubes each carrying a Cantor-distributed set of incident balls.
#[derive(Clone, Debug, PartialEq)]
pub struct FurstenbergConfig {
    pub scale: Scale,
    pub u: f64,
    pub v: f64,
    pub tubes: Vec<Tube>,
    /// Deduplicated on the δ-lattice.
    pub balls: Vec<Ball>,
    /// For each tube, indices into `balls` of the balls placed on it.
    pub per_tube: Vec<Vec<usize>>,
}

impl FurstenbergConfig {
    pub fn to_configuration(&self) -> Configuration {
        let meta = Meta::new("furstenberg", self.v, self.u + 1.0)
            .with("u", self.u)
            .with("v", self.v);
        Configuration::new(self.scale, self.balls.clone(), self.tubes.clone(), meta)
    }

    pub fn tube_balls(&self, t: usize) -> Vec<Ball> {
        self.per_tube[t].iter().map(|&i| self.balls[i]).collect()
    }
}

/// D offsets × ⌊D^{v-1}⌋ directions spread over one radian around vertical;
/// each tube carries balls at Cantor(k, u) positions along its midline.
pub fn furstenberg_config(k: u32, u: f64, v: f64) -> Result<FurstenbergConfig> {
    let scale = Scale::new(k)?;
    if !(u > 0.0 && u <= 1.0 && (1.0..=2.0).contains(&v)) {
        return Err(Error::RegionViolation {
            construction: "furstenberg",
            alpha: u,
            beta: v,
            requirement: "0 < u <= 1 <= v <= 2",
        });
    }
    let delta = scale.delta();
    let d = scale.d_int() as usize;
    let n_dir = if v <= 1.0 { 1 } else { floor_pow(scale.d(), v - 1.0) };
    let thetas: Vec<f64> = (0..n_dir)
        .map(|j| FRAC_PI_2 + (j as f64 - (n_dir as f64 - 1.0) / 2.0) / n_dir as f64)
        .collect();
    let cantor = cantor_generate(k, u)?;
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut balls = Vec::new();
    let mut tubes = Vec::with_capacity(n_dir * d);
    let mut per_tube = Vec::with_capacity(n_dir * d);
    for &th in &thetas {
        let (s, c) = th.sin_cos();
        for i in 0..d {
            let t = Tube::unit((i as f64 + 0.5) * delta, 0.5, th, delta);
            let mut on = Vec::with_capacity(cantor.len());
            for &m in &cantor.points {
                let tau = m as f64 * delta - 0.5;
                let key = (
                    ((t.cx + tau * c) / delta).round() as i64,
                    ((t.cy + tau * s) / delta).round() as i64,
                );
                let id = *index.entry(key).or_insert_with(|| {
                    balls.push(Ball::new(key.0 as f64 * delta, key.1 as f64 * delta, delta));
                    balls.len() - 1
                });
                on.push(id);
            }
            on.sort_unstable();
            on.dedup();
            tubes.push(t);
            per_tube.push(on);
        }
    }
    Ok(FurstenbergConfig {
        scale,
        u,
        v,
        tubes,
        balls,
        per_tube,
    })
}

/// Output of [`regularize`].
#[derive(Clone, Debug, PartialEq)]
pub struct Regularized {
    pub balls: Vec<Ball>,
    /// Every over-full dyadic square.
    pub heavy: Vec<Square>,
    /// Maximal over-full squares; these were replaced.
    pub replaced: Vec<Square>,
    pub copies: usize,
}

fn on_odd_lattice(x: f64, delta: f64) -> bool {
    let q = x / delta;
    let r = q.round();
    (q - r).abs() <= 1e-9 && (r as i64).rem_euclid(2) == 1
}

/// Replaces each maximal dyadic square holding ≥ K·(w/δ)^{β+1} balls by
/// ⌈K⌉ superposed copies of the product set 𝒫_w placed in that square.
pub fn regularize(scale: Scale, balls: &[Ball], beta: f64, k_beta: f64) -> Result<Regularized> {
    check_unit("beta", beta, 0.0, 1.0)?;
    if k_beta.is_nan() || k_beta < 1.0 {
        return Err(Error::InvalidParameter {
            name: "K_beta",
            value: k_beta,
            reason: "must be at least 1",
        });
    }
    let delta = scale.delta();
    if let Some(b) = balls
        .iter()
        .find(|b| !on_odd_lattice(b.cx, delta) || !on_odd_lattice(b.cy, delta))
    {
        return Err(Error::LatticeViolation {
            cx: b.cx,
            cy: b.cy,
            delta,
        });
    }
    let k = scale.k();
    let tops: Vec<Option<u32>> = balls.iter().map(|b| finest_level(b, k)).collect();
    // levels strictly between δ and 1
    let mut heavy_keys: Vec<HashSet<(i64, i64)>> = vec![HashSet::new(); k as usize + 1];
    let mut heavy = Vec::new();
    for n in 1..k {
        let w = (-(n as f64)).exp2();
        let mut counts: HashMap<(i64, i64), usize> = HashMap::new();
        for (b, top) in balls.iter().zip(&tops) {
            if top.is_some_and(|t| t >= n) {
                *counts.entry((cell(b.cx, w), cell(b.cy, w))).or_default() += 1;
            }
        }
        let threshold = k_beta * (w / delta).powf(beta + 1.0);
        let mut keys: Vec<(i64, i64)> = counts
            .into_iter()
            .filter(|&(_, c)| c as f64 >= threshold)
            .map(|(key, _)| key)
            .collect();
        keys.sort_unstable();
        for &(i, j) in &keys {
            heavy.push(Square::new(i as f64 * w, j as f64 * w, w));
        }
        heavy_keys[n as usize] = keys.into_iter().collect();
    }
    let ancestor_heavy = |n: u32, (i, j): (i64, i64)| {
        (1..n).any(|m| {
            let shift = n - m;
            heavy_keys[m as usize].contains(&(i >> shift, j >> shift))
        })
    };
    let mut replaced = Vec::new();
    let mut replaced_keys: Vec<(u32, (i64, i64))> = Vec::new();
    for n in 1..k {
        let mut keys: Vec<(i64, i64)> = heavy_keys[n as usize].iter().copied().collect();
        keys.sort_unstable();
        for key in keys {
            if !ancestor_heavy(n, key) {
                let w = (-(n as f64)).exp2();
                replaced.push(Square::new(key.0 as f64 * w, key.1 as f64 * w, w));
                replaced_keys.push((n, key));
            }
        }
    }
    let inside_replaced = |b: &Ball, top: Option<u32>| {
        replaced_keys.iter().any(|&(n, key)| {
            let w = (-(n as f64)).exp2();
            top.is_some_and(|t| t >= n) && (cell(b.cx, w), cell(b.cy, w)) == key
        })
    };
    let mut out: Vec<Ball> = balls
        .iter()
        .zip(&tops)
        .filter(|(b, top)| !inside_replaced(b, **top))
        .map(|(b, _)| *b)
        .collect();
    let copies = (k_beta - EPS).ceil() as usize;
    for q in &replaced {
        let pw = build_pw_at(k, q.side, beta, [q.x0, q.y0])?;
        for _ in 0..copies {
            out.extend_from_slice(&pw.balls);
        }
    }
    Ok(Regularized {
        balls: out,
        heavy,
        replaced,
        copies,
    })
}

/// Uniform random balls and tubes (centers in [0,1]², directions in [0, π)).
pub fn random_configuration(k: u32, n_balls: usize, n_tubes: usize, seed: u64) -> Result<Configuration> {
    let scale = Scale::new(k)?;
    let delta = scale.delta();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balls = (0..n_balls).map(|_| Ball::new(rng.gen(), rng.gen(), delta)).collect();
    let tubes = (0..n_tubes)
        .map(|_| {
            let th = rng.gen_range(0.0..std::f64::consts::PI);
            Tube::unit(rng.gen(), rng.gen(), th, delta)
        })
        .collect();
    let mut meta = Meta::new("random", 0.0, 0.0);
    meta.seed = Some(seed);
    Ok(Configuration::new(scale, balls, tubes, meta))
}

/// Random balls with centers on the odd lattice (repeats allowed).
pub fn random_lattice_balls(k: u32, n: usize, seed: u64) -> Result<Vec<Ball>> {
    let scale = Scale::new(k)?;
    let delta = scale.delta();
    let half = scale.d_int() / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let i = rng.gen_range(0..half);
            let j = rng.gen_range(0..half);
            Ball::new((2 * i + 1) as f64 * delta, (2 * j + 1) as f64 * delta, delta)
        })
        .collect())
}
