//! The exponent surface f(α, β), scale sweeps with least-squares slope fits,
//! and exponent-level checks of the upper bounds.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constructions::{furstenberg_config, furstenberg_product, generate, ConstructionId};
use crate::error::{Error, Result};
use crate::geometry::{Ball, Scale, Tube};
use crate::incidence::count_grid;
use crate::par;
use crate::spacing::{ball_profile_brute, ball_profile_dyadic, fmt17, tube_profile, TubeMode, BRUTE_LIMIT};

/// Default cap on |P| and |𝕋| per sweep point.
pub const MAX_OBJECTS: usize = 1_000_000;

fn check_domain(alpha: f64, beta: f64) -> Result<()> {
    for (name, x) in [("alpha", alpha), ("beta", beta)] {
        if !(0.0..=2.0).contains(&x) {
            return Err(Error::InvalidParameter {
                name,
                value: x,
                reason: "must lie in [0, 2]",
            });
        }
    }
    Ok(())
}

/// Which formula of the surface applies at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Piece {
    TubesHeavy,
    BallsHeavy,
    Dense,
    Bundles,
}

impl Piece {
    pub fn at(alpha: f64, beta: f64) -> Self {
        if alpha >= beta + 1.0 {
            Self::TubesHeavy
        } else if beta >= alpha + 1.0 {
            Self::BallsHeavy
        } else if alpha + beta >= 3.0 {
            Self::Dense
        } else {
            Self::Bundles
        }
    }

    pub fn eval(self, alpha: f64, beta: f64) -> f64 {
        match self {
            Self::TubesHeavy => beta + 1.0,
            Self::BallsHeavy => alpha + 1.0,
            Self::Dense => alpha + beta - 1.0,
            Self::Bundles => {
                let a = alpha.min(1.0);
                let b = beta.min(1.0);
                if a + b == 0.0 {
                    0.0
                } else {
                    (a * alpha + b * beta + a * b) / (a + b)
                }
            }
        }
    }

    /// Construction that realises this piece.
    pub fn construction(self) -> ConstructionId {
        match self {
            Self::Bundles => ConstructionId::One,
            Self::TubesHeavy => ConstructionId::Two,
            Self::BallsHeavy => ConstructionId::Three,
            Self::Dense => ConstructionId::Four,
        }
    }
}

/// Sharp incidence exponent: I ≈ D^{f(α, β)}.
pub fn f_surface(alpha: f64, beta: f64) -> Result<f64> {
    check_domain(alpha, beta)?;
    Ok(Piece::at(alpha, beta).eval(alpha, beta))
}

/// c + (1 − c)(α + β) with c⁻¹ = max(α + β − 1, 2).
pub fn two_sided_exponent(alpha: f64, beta: f64) -> f64 {
    let c = 1.0 / (alpha + beta - 1.0).max(2.0);
    c + (1.0 - c) * (alpha + beta)
}

/// Exponent of the ball-dominated bound with |P| = D^β, |𝕋| = D^α:
/// (αb + bβ + α²)/(α + b), b = min(β, 1).
pub fn ball_dominated_exponent(alpha: f64, beta: f64) -> f64 {
    let b = beta.min(1.0);
    if alpha + b == 0.0 {
        return 0.0;
    }
    (alpha * b + b * beta + alpha * alpha) / (alpha + b)
}

/// Least-squares line through (x, y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn fit_ols(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter {
            name: "x",
            value: mx,
            reason: "fit needs at least two distinct abscissae",
        });
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit {
        slope,
        intercept: my - slope * mx,
        r2,
        n,
    })
}

/// Slope of log₂ y against k.
pub fn fit_log2(ks: &[u32], ys: &[f64]) -> Result<Fit> {
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    fit_ols(&xs, &ls)
}

/// Upper-bound theorems evaluated with unit constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    /// I^{α+b} ≤ D^{αb} K_β^α K_α^b |P|^b |𝕋|^α, for b ≥ α.
    BallsDominate,
    /// I^{a+β} ≤ D^{aβ} K_β^a K_α^β |P|^β |𝕋|^a, for a ≥ β.
    TubesDominate,
    /// I ≤ D^c (K_α K_β)^c |P|^{1-c} |𝕋|^{1-c}, c⁻¹ = max(α+β−1, 2).
    TwoSided,
}

impl Bound {
    pub const ALL: [Bound; 3] = [Self::BallsDominate, Self::TubesDominate, Self::TwoSided];

    pub fn label(self) -> &'static str {
        match self {
            Self::BallsDominate => "balls-dominate",
            Self::TubesDominate => "tubes-dominate",
            Self::TwoSided => "two-sided",
        }
    }

    /// Whether the bound is checked at (α, β): the dominance bounds need
    /// their dominance hypothesis and min(α, β) ≤ 1; the two-sided bound is
    /// checked for α, β ≥ 1. At α = β = 0 the dominance bounds are vacuous.
    pub fn applies(self, alpha: f64, beta: f64) -> bool {
        let (a, b) = (alpha.min(1.0), beta.min(1.0));
        match self {
            Self::BallsDominate => b >= alpha && alpha + b > 0.0,
            Self::TubesDominate => a >= beta && a + beta > 0.0,
            Self::TwoSided => alpha >= 1.0 && beta >= 1.0,
        }
    }

    /// Right-hand side as a bound on I.
    pub fn rhs(self, m: &Measured) -> f64 {
        let (al, be) = (m.alpha, m.beta);
        let (a, b) = (al.min(1.0), be.min(1.0));
        let (p, t) = (m.n_balls as f64, m.n_tubes as f64);
        let log = |x: f64| x.log2();
        let lg = match self {
            Self::BallsDominate => {
                (al * b * log(m.d) + al * log(m.k_beta) + b * log(m.k_alpha) + b * log(p) + al * log(t)) / (al + b)
            }
            Self::TubesDominate => {
                (a * be * log(m.d) + a * log(m.k_beta) + be * log(m.k_alpha) + be * log(p) + a * log(t)) / (a + be)
            }
            Self::TwoSided => {
                let c = 1.0 / (al + be - 1.0).max(2.0);
                c * log(m.d) + c * log(m.k_alpha * m.k_beta) + (1.0 - c) * (log(p) + log(t))
            }
        };
        lg.exp2()
    }
}

/// Inputs to the bound checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub alpha: f64,
    pub beta: f64,
    pub d: f64,
    pub n_balls: usize,
    pub n_tubes: usize,
    pub incidences: u64,
    pub k_alpha: f64,
    pub k_beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub bound: Bound,
    pub rhs: f64,
    pub ratio: f64,
}

/// Every applicable bound with its ratio I / RHS.
pub fn check_upper(m: &Measured) -> Vec<BoundValue> {
    Bound::ALL
        .iter()
        .filter(|b| b.applies(m.alpha, m.beta))
        .map(|&bound| {
            let rhs = bound.rhs(m);
            BoundValue {
                bound,
                rhs,
                ratio: m.incidences as f64 / rhs,
            }
        })
        .collect()
}

/// Ball spacing constant: dyadic squares for lattice-centred sets, radius-w
/// balls otherwise (when small enough). Never below 1.
pub fn measure_k_balls(scale: Scale, balls: &[Ball], s: f64) -> Result<f64> {
    let delta = scale.delta();
    let odd = |x: f64| {
        let q = x / delta;
        (q - q.round()).abs() < 1e-9 && (q.round() as i64).rem_euclid(2) == 1
    };
    let lattice = balls.iter().all(|b| odd(b.cx) && odd(b.cy));
    let k = if lattice || balls.len() > BRUTE_LIMIT {
        ball_profile_dyadic(scale, balls, s)?.k_max()
    } else {
        ball_profile_brute(scale, balls, s)?.k_max()
    };
    Ok(k.max(1.0))
}

/// Tube spacing constant from the query-tube net. Never below 1.
pub fn measure_k_tubes(scale: Scale, tubes: &[Tube], s: f64) -> Result<f64> {
    Ok(tube_profile(scale, tubes, s, TubeMode::DyadicNet)?.k_max().max(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: u32,
    pub d: u64,
    pub alpha: f64,
    pub beta: f64,
    pub n_balls: usize,
    pub n_tubes: usize,
    pub incidences: u64,
    pub k_alpha: f64,
    pub k_beta: f64,
    pub seconds: f64,
}

impl SweepRow {
    pub fn measured(&self) -> Measured {
        Measured {
            alpha: self.alpha,
            beta: self.beta,
            d: self.d as f64,
            n_balls: self.n_balls,
            n_tubes: self.n_tubes,
            incidences: self.incidences,
            k_alpha: self.k_alpha,
            k_beta: self.k_beta,
        }
    }
}

/// Growth rate of I / RHS for one bound across the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTrend {
    pub bound: Bound,
    pub ratios: Vec<f64>,
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub construction: ConstructionId,
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<SweepRow>,
    pub fit: Fit,
    pub expected: f64,
    pub bounds: Vec<BoundTrend>,
}

pub const CSV_HEADER: &str = "k,D,alpha,beta,n_balls,n_tubes,I,K_alpha_meas,K_beta_meas";

impl SweepResult {
    /// Rows as CSV; `seconds` is appended only with `timings` since wall
    /// time is not reproducible.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = String::from(CSV_HEADER);
        if timings {
            out.push_str(",seconds");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.k,
                r.d,
                fmt17(r.alpha),
                fmt17(r.beta),
                r.n_balls,
                r.n_tubes,
                r.incidences,
                fmt17(r.k_alpha),
                fmt17(r.k_beta)
            );
            if timings {
                let _ = write!(out, ",{}", fmt17(r.seconds));
            }
            out.push('\n');
        }
        out
    }

    /// Largest I / RHS growth rate over the applicable bounds.
    pub fn worst_bound_slope(&self) -> Option<f64> {
        self.bounds.iter().map(|b| b.slope).reduce(f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub max_objects: usize,
    pub timings: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_objects: MAX_OBJECTS,
            timings: true,
        }
    }
}

fn guard(what: &'static str, got: usize, limit: usize) -> Result<()> {
    if got > limit {
        return Err(Error::SizeGuard { what, got, limit });
    }
    Ok(())
}

/// One sweep point: generate, measure spacing, count.
pub fn sweep_point(id: ConstructionId, k: u32, alpha: f64, beta: f64, opts: &SweepOptions) -> Result<SweepRow> {
    let d = (k as f64).exp2();
    // |𝕋| ≲ D^α and |P| ≲ D^β up to the generator constants
    guard("estimated tubes", d.powf(alpha) as usize / 32, opts.max_objects)?;
    guard("estimated balls", d.powf(beta) as usize / 32, opts.max_objects)?;
    let start = crate::incidence::Stopwatch::start();
    let cfg = generate(id, k, alpha, beta)?;
    guard("tubes", cfg.tubes.len(), opts.max_objects)?;
    guard("balls", cfg.balls.len(), opts.max_objects)?;
    let report = count_grid(&cfg.balls, &cfg.tubes);
    let k_alpha = measure_k_tubes(cfg.scale, &cfg.tubes, alpha)?;
    let k_beta = measure_k_balls(cfg.scale, &cfg.balls, beta)?;
    Ok(SweepRow {
        k,
        d: cfg.scale.d_int(),
        alpha,
        beta,
        n_balls: cfg.balls.len(),
        n_tubes: cfg.tubes.len(),
        incidences: report.total,
        k_alpha,
        k_beta,
        seconds: if opts.timings { start.seconds() } else { 0.0 },
    })
}

/// Runs a construction over k_min..=k_max and fits log₂ I against k.
pub fn sweep(
    id: ConstructionId,
    alpha: f64,
    beta: f64,
    k_min: u32,
    k_max: u32,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    check_domain(alpha, beta)?;
    if k_max < k_min + 3 {
        return Err(Error::TooFewPoints {
            need: 4,
            got: (k_max + 1).saturating_sub(k_min) as usize,
        });
    }
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let rows = par::map(&ks, |&k| sweep_point(id, k, alpha, beta, opts))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let incid: Vec<f64> = rows.iter().map(|r| (r.incidences.max(1)) as f64).collect();
    let fit = fit_log2(&ks, &incid)?;
    let mut bounds = Vec::new();
    for bound in Bound::ALL.into_iter().filter(|b| b.applies(alpha, beta)) {
        let ratios: Vec<f64> = rows
            .iter()
            .map(|r| r.incidences.max(1) as f64 / bound.rhs(&r.measured()))
            .collect();
        let slope = fit_log2(&ks, &ratios)?.slope;
        bounds.push(BoundTrend { bound, ratios, slope });
    }
    Ok(SweepResult {
        construction: id,
        alpha,
        beta,
        rows,
        fit,
        expected: f_surface(alpha, beta)?,
        bounds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FurstenbergReport {
    pub u: f64,
    pub v: f64,
    pub ks: Vec<u32>,
    pub union_sizes: Vec<usize>,
    pub union_fit: Fit,
    /// min(2u + v − 1, u + 1).
    pub bound_exponent: f64,
    pub union_ok: bool,
    pub product_sizes: Option<Vec<usize>>,
    pub product_fit: Option<Fit>,
    pub product_ok: Option<bool>,
}

impl FurstenbergReport {
    pub fn passes(&self) -> bool {
        self.union_ok && self.product_ok.unwrap_or(true)
    }
}

/// Size growth of Furstenberg configurations against the lower-bound
/// exponent; for u + v ≥ 2 also the product set against u + 1.
pub fn furstenberg_check(u: f64, v: f64, k_min: u32, k_max: u32) -> Result<FurstenbergReport> {
    if k_max < k_min + 1 {
        return Err(Error::TooFewPoints {
            need: 2,
            got: (k_max + 1).saturating_sub(k_min) as usize,
        });
    }
    let ks: Vec<u32> = (k_min..=k_max).collect();
    let union_sizes = par::map(&ks, |&k| furstenberg_config(k, u, v).map(|f| f.balls.len()))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<f64> = union_sizes.iter().map(|&n| n as f64).collect();
    let union_fit = fit_log2(&ks, &ys)?;
    let bound_exponent = (2.0 * u + v - 1.0).min(u + 1.0);
    let (product_sizes, product_fit, product_ok) = if u + v >= 2.0 {
        let sizes = par::map(&ks, |&k| furstenberg_product(k, u).map(|b| b.len()))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let ys: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
        let fit = fit_log2(&ks, &ys)?;
        let ok = (fit.slope - (u + 1.0)).abs() <= 0.05;
        (Some(sizes), Some(fit), Some(ok))
    } else {
        (None, None, None)
    };
    Ok(FurstenbergReport {
        u,
        v,
        ks,
        union_sizes,
        union_ok: union_fit.slope >= bound_exponent - 0.15,
        union_fit,
        bound_exponent,
        product_sizes,
        product_fit,
        product_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_anchor_values() {
        assert_eq!(f_surface(1.0, 1.0).unwrap(), 1.5);
        assert_eq!(f_surface(2.0, 2.0).unwrap(), 3.0);
        assert_eq!(f_surface(2.0, 0.5).unwrap(), 1.5);
        assert_eq!(f_surface(0.0, 0.0).unwrap(), 0.0);
        assert!(f_surface(2.1, 0.0).is_err());
    }

    #[test]
    fn exact_power_law_fit() {
        let ks: Vec<u32> = (3..10).collect();
        let ys: Vec<f64> = ks.iter().map(|&k| (1.5 * k as f64).exp2()).collect();
        let f = fit_log2(&ks, &ys).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!(fit_ols(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn singleton_bounds_hold() {
        for (alpha, beta) in [(0.0, 0.0), (1.0, 1.0), (0.5, 1.8), (2.0, 2.0)] {
            let m = Measured {
                alpha,
                beta,
                d: 64.0,
                n_balls: 1,
                n_tubes: 1,
                incidences: 1,
                k_alpha: 1.0,
                k_beta: 1.0,
            };
            for b in check_upper(&m) {
                assert!(b.rhs >= 1.0 && b.ratio <= 1.0, "{b:?} at ({alpha}, {beta})");
            }
        }
    }

    #[test]
    fn sweep_needs_four_points() {
        let o = SweepOptions::default();
        assert!(matches!(
            sweep(ConstructionId::One, 1.0, 1.0, 6, 8, &o),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn furstenberg_bound_exponent() {
        let r = furstenberg_check(0.5, 1.0, 5, 7).unwrap();
        assert_eq!(r.bound_exponent, 1.0);
        assert!(r.product_fit.is_none());
        let r = furstenberg_check(1.0, 1.0, 5, 7).unwrap();
        assert!((r.product_fit.unwrap().slope - 2.0).abs() < 0.05);
    }
}
