//! Browser bindings: construction geometry with incidence counts, the
//! exponent surface as a grid, and Cantor sets with their box counts.
//!
//! Everything crosses the boundary as JSON strings or flat `f64` arrays.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use inclab::cantor::cantor_generate;
use inclab::constructions::{generate, ConstructionId};
use inclab::experiments::{f_surface, fit_ols, Piece};
use inclab::incidence::count_grid;

/// Largest k the page may request; keeps drawing responsive.
pub const MAX_DEMO_K: u32 = 9;

#[derive(Serialize)]
struct Scene {
    k: u32,
    alpha: f64,
    beta: f64,
    radius: f64,
    /// [cx, cy] per ball.
    balls: Vec<[f64; 2]>,
    /// Four corners per tube.
    tubes: Vec<[[f64; 2]; 4]>,
    per_ball: Vec<u64>,
    incidences: u64,
    /// log_D I, to compare against `f`.
    exponent: f64,
    f: f64,
}

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn scene(id: u8, k: u32, alpha: f64, beta: f64) -> Result<String, String> {
    if k > MAX_DEMO_K {
        return Err(format!("k = {k} is above the demo limit {MAX_DEMO_K}"));
    }
    let id: ConstructionId = id.to_string().parse()?;
    let cfg = generate(id, k, alpha, beta).map_err(|e| e.to_string())?;
    let report = count_grid(&cfg.balls, &cfg.tubes);
    let s = Scene {
        k,
        alpha,
        beta,
        radius: cfg.scale.delta(),
        balls: cfg.balls.iter().map(|b| [b.cx, b.cy]).collect(),
        tubes: cfg.tubes.iter().map(|t| t.corners()).collect(),
        incidences: report.total,
        exponent: (report.total.max(1) as f64).log2() / k as f64,
        per_ball: report.per_ball,
        f: f_surface(alpha, beta).map_err(|e| e.to_string())?,
    };
    serde_json::to_string(&s).map_err(|e| e.to_string())
}

/// Generates a construction and counts its incidences.
#[wasm_bindgen]
pub fn construction_scene(id: u8, k: u32, alpha: f64, beta: f64) -> Result<String, JsValue> {
    scene(id, k, alpha, beta).map_err(err)
}

/// Which construction (1-4) realises f at (alpha, beta).
#[wasm_bindgen]
pub fn extremal_construction(alpha: f64, beta: f64) -> u8 {
    Piece::at(alpha, beta).construction().number()
}

/// f on an (n + 1) × (n + 1) grid over [0, 2]², row-major in beta then alpha.
#[wasm_bindgen]
pub fn surface_grid(n: u32) -> Vec<f64> {
    let n = n.max(1);
    let step = 2.0 / n as f64;
    let mut out = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for j in 0..=n {
        for i in 0..=n {
            out.push(f_surface(i as f64 * step, j as f64 * step).unwrap_or(f64::NAN));
        }
    }
    out
}

#[derive(Serialize)]
struct CantorView {
    k: u32,
    s: f64,
    /// Points m/D in [0, 1].
    points: Vec<f64>,
    /// Occupied dyadic intervals per level j = 0..=k.
    box_counts: Vec<u64>,
    box_slope: f64,
    frostman_ok: bool,
}

fn cantor(k: u32, s: f64) -> Result<String, String> {
    let c = cantor_generate(k, s).map_err(|e| e.to_string())?;
    let d = 1u64 << k;
    let mut box_counts = Vec::with_capacity(k as usize + 1);
    for j in 0..=k {
        let len = d >> j;
        let mut cells: Vec<u64> = c.points.iter().map(|&p| (p / len).min((1 << j) - 1)).collect();
        cells.dedup();
        box_counts.push(cells.len() as u64);
    }
    let xs: Vec<f64> = (0..=k).map(f64::from).collect();
    let ys: Vec<f64> = box_counts.iter().map(|&n| (n as f64).log2()).collect();
    let box_slope = fit_ols(&xs, &ys).map(|f| f.slope).unwrap_or(0.0);
    let v = CantorView {
        k,
        s,
        points: c.points.iter().map(|&p| p as f64 / d as f64).collect(),
        box_counts,
        box_slope,
        frostman_ok: c.frostman_report().passes(),
    };
    serde_json::to_string(&v).map_err(|e| e.to_string())
}

/// A discrete Cantor set of dimension s at scale 2^-k with its box counts.
#[wasm_bindgen]
pub fn cantor_view(k: u32, s: f64) -> Result<String, JsValue> {
    cantor(k, s).map_err(err)
}
