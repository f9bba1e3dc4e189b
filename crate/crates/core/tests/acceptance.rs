//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use inclab::cantor::cantor_generate;
use inclab::constructions::*;
use inclab::experiments::*;
use inclab::geometry::*;
use inclab::incidence::{color_partition_balls, color_partition_tubes, count_brute, count_grid};
use inclab::spacing::{ball_profile_brute, ball_profile_dyadic};
use inclab::sumproduct::{ap_instance, cantor_instance, verify_instance, SumProductInstance};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

const SWEEPS: [(ConstructionId, f64, f64, u32, u32, f64); 4] = [
    (ConstructionId::One, 1.0, 1.0, 6, 11, 0.08),
    (ConstructionId::Two, 1.8, 0.5, 6, 11, 0.10),
    (ConstructionId::Three, 0.5, 1.8, 6, 11, 0.10),
    (ConstructionId::Four, 1.7, 1.6, 5, 8, 0.10),
];

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut same = 0;
    for seed in 0..100u64 {
        let k = 5 + (seed % 4) as u32;
        let nb = 100 + (seed as usize * 389) % 1900;
        let nt = 100 + (seed as usize * 211) % 1900;
        let c = random_configuration(k, nb, nt, seed).unwrap();
        let g = count_grid(&c.balls, &c.tubes);
        let b = count_brute(&c.balls, &c.tubes).unwrap();
        same += g.same_counts(&b) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        same == 100 && secs < 60.0,
        format!("{same}/100 instances identical in totals and per-object vectors, {secs:.1} s (limit 60 s)"),
    )
}

fn run_sweeps() -> Vec<(SweepResult, f64, f64)> {
    let opts = SweepOptions::default();
    SWEEPS
        .iter()
        .map(|&(id, a, b, k0, k1, tol)| {
            let start = Instant::now();
            let r = sweep(id, a, b, k0, k1, &opts).unwrap();
            (r, start.elapsed().as_secs_f64(), tol)
        })
        .collect()
}

fn sharpness(sweeps: &[(SweepResult, f64, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, secs, tol) in sweeps {
        let ok = (r.fit.slope - r.expected).abs() <= *tol && *secs < 120.0;
        pass &= ok;
        parts.push(format!(
            "{} ({}, {}) slope {:.3} vs {:.2} ± {:.2} in {:.1} s",
            r.construction.name(),
            r.alpha,
            r.beta,
            r.fit.slope,
            r.expected,
            tol,
            secs
        ));
    }
    outcome(pass, parts.join("; "))
}

fn upper_bounds(sweeps: &[(SweepResult, f64, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, _, _) in sweeps {
        if r.bounds.is_empty() {
            pass = false;
        }
        for b in &r.bounds {
            pass &= b.slope <= 0.1;
            parts.push(format!("{} {} {:.3}", r.construction.name(), b.bound.label(), b.slope));
        }
    }
    outcome(pass, format!("I/RHS slopes (limit 0.1): {}", parts.join(", ")))
}

fn spacing_certification() -> Outcome {
    let opts = SweepOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for &(id, a, b, ..) in &SWEEPS {
        let rows: Vec<SweepRow> = [6, 8, 10]
            .iter()
            .map(|&k| sweep_point(id, k, a, b, &opts).unwrap())
            .collect();
        let at8 = rows[1].k_alpha.max(rows[1].k_beta);
        let growth = (rows[2].k_alpha / rows[0].k_alpha).max(rows[2].k_beta / rows[0].k_beta);
        pass &= at8 <= 128.0 && growth <= 2.0;
        parts.push(format!(
            "{} K_alpha {:.2} K_beta {:.2} at k=8, growth 6->10 {:.2}",
            id.name(),
            rows[1].k_alpha,
            rows[1].k_beta,
            growth
        ));
    }
    outcome(pass, parts.join("; "))
}

fn dyadic_sandwich() -> Outcome {
    let scale = Scale::new(6).unwrap();
    let mut ok = 0;
    for seed in 0..50u64 {
        let n = 20 + (seed as usize * 53) % 480;
        let balls = random_lattice_balls(6, n, 1000 + seed).unwrap();
        let s = 0.2 + 0.4 * (seed % 5) as f64;
        let kd = ball_profile_dyadic(scale, &balls, s).unwrap().k_max();
        let kb = ball_profile_brute(scale, &balls, s).unwrap().k_max();
        ok += (kd <= kb && kb <= 64.0 * kd) as usize;
    }
    outcome(
        ok == 50,
        format!("{ok}/50 sets satisfy K_dyadic <= K_brute <= 64 K_dyadic"),
    )
}

fn coloring() -> Outcome {
    let mut ok = 0;
    let mut worst = (0, 0);
    for seed in 0..50u64 {
        let c = random_configuration(6, 300, 120, 2000 + seed).unwrap();
        let balls_ok = {
            let part = color_partition_balls(&c.balls);
            let n = c.balls.len();
            let deg = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i && balls_intersect(&c.balls[i], &c.balls[j]))
                        .count()
                })
                .max()
                .unwrap_or(0);
            worst = worst.max((part.classes.len(), deg));
            part.classes.len() <= deg + 1
                && part.classes.iter().all(|cl| {
                    cl.iter()
                        .enumerate()
                        .all(|(x, &i)| cl[x + 1..].iter().all(|&j| !balls_intersect(&c.balls[i], &c.balls[j])))
                })
        };
        let tubes_ok = {
            let part = color_partition_tubes(&c.tubes);
            let m = c.tubes.len();
            let conflict = |i: usize, j: usize| {
                essential_overlap(&c.tubes[i], &c.tubes[j]) >= 0.5 || essential_overlap(&c.tubes[j], &c.tubes[i]) >= 0.5
            };
            let deg = (0..m)
                .map(|i| (0..m).filter(|&j| j != i && conflict(i, j)).count())
                .max()
                .unwrap_or(0);
            part.classes.len() <= deg + 1
                && part.classes.iter().all(|cl| {
                    cl.iter()
                        .enumerate()
                        .all(|(x, &i)| cl[x + 1..].iter().all(|&j| !conflict(i, j)))
                })
        };
        ok += (balls_ok && tubes_ok) as usize;
    }
    outcome(
        ok == 50,
        format!("{ok}/50 instances conflict-free with class count <= max degree + 1 (largest ball case: {} classes, degree {})", worst.0, worst.1),
    )
}

fn cantor() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [0.3, 0.5, 0.8] {
        let rep = cantor_generate(10, s).unwrap().frostman_report();
        let ks: Vec<u32> = (5..=11).collect();
        let sizes: Vec<f64> = ks
            .iter()
            .map(|&k| cantor_generate(k, s).unwrap().len() as f64)
            .collect();
        let slope = fit_log2(&ks, &sizes).unwrap().slope;
        let ok = rep.passes() && (slope - s).abs() <= 0.1;
        pass &= ok;
        parts.push(format!(
            "s={s}: invariants {} (size {:.2}, upper {:.2}, prefix {:.2}), box slope {:.3}",
            if rep.passes() { "hold" } else { "fail" },
            rep.size_ratio,
            rep.upper_ratio,
            rep.prefix_ratio,
            slope
        ));
    }
    outcome(pass, parts.join("; "))
}

fn furstenberg() -> Outcome {
    let prod = furstenberg_check(0.8, 1.5, 6, 10).unwrap();
    let conf = furstenberg_check(0.8, 1.5, 6, 9).unwrap();
    let p = prod.product_fit.unwrap().slope;
    let pass = (p - 1.8).abs() <= 0.05 && conf.union_fit.slope >= 1.65;
    outcome(
        pass,
        format!(
            "product slope {p:.3} vs 1.8 ± 0.05; configuration slope {:.3} (need >= 1.65)",
            conf.union_fit.slope
        ),
    )
}

fn sum_product() -> Outcome {
    let ap7 = verify_instance(&ap_instance(7).unwrap(), true).unwrap();
    let ca7 = verify_instance(&cantor_instance(7, 0.8, 0.8, 0.8).unwrap(), true).unwrap();
    let ks: Vec<u32> = (6..=9).collect();
    let mut slope_ok = true;
    let mut parts = vec![
        format!(
            "AP k=7 structure {}",
            if ap7.structural_ok() { "exact" } else { "broken" }
        ),
        format!(
            "Cantor k=7 structure {}",
            if ca7.structural_ok() { "exact" } else { "broken" }
        ),
    ];
    type Builder = fn(u32) -> SumProductInstance;
    let builders: [(&str, Builder); 2] = [
        ("AP", |k| ap_instance(k).unwrap()),
        ("Cantor", |k| cantor_instance(k, 0.8, 0.8, 0.8).unwrap()),
    ];
    for (name, build) in builders {
        let reps: Vec<_> = ks.iter().map(|&k| verify_instance(&build(k), false).unwrap()).collect();
        let lhs = fit_log2(&ks, &reps.iter().map(|r| r.lhs).collect::<Vec<_>>())
            .unwrap()
            .slope;
        let rhs = fit_log2(&ks, &reps.iter().map(|r| r.rhs).collect::<Vec<_>>())
            .unwrap()
            .slope;
        slope_ok &= lhs >= rhs - 0.1 && reps.iter().all(|r| r.structural_ok());
        parts.push(format!("{name} LHS slope {lhs:.3} vs RHS slope {rhs:.3}"));
    }
    outcome(ap7.structural_ok() && ca7.structural_ok() && slope_ok, parts.join("; "))
}

fn regularization() -> Outcome {
    let k = 7;
    let scale = Scale::new(k).unwrap();
    let delta = scale.delta();
    let beta = 0.5;

    let mut sparse = Vec::new();
    for i in 0..16 {
        for j in 0..16 {
            sparse.push(Ball::new((8 * i + 1) as f64 * delta, (8 * j + 1) as f64 * delta, delta));
        }
    }
    let fixed = regularize(scale, &sparse, beta, 1.0).unwrap();
    let fixed_ok = fixed.replaced.is_empty() && fixed.balls == sparse;

    let mut full = Vec::new();
    for i in 0..16 {
        for j in 0..16 {
            full.push(Ball::new((2 * i + 1) as f64 * delta, (2 * j + 1) as f64 * delta, delta));
        }
    }
    let reg = regularize(scale, &full, beta, 1.0).unwrap();
    let k_new = ball_profile_brute(scale, &reg.balls, beta + 1.0).unwrap().k_max();

    // P_t: balls meeting t in the columns of a dimension-β Cantor set
    let cols: Vec<u64> = cantor_generate(4, beta).unwrap().points;
    let (mut before, mut after) = (0usize, 0usize);
    let mut kt: f64 = 0.0;
    for th in [FRAC_PI_4, FRAC_PI_4 + 0.03, 3.0 * FRAC_PI_4, 1.2, 1.5] {
        for off in 0..40 {
            let t = Tube::unit(0.025 + off as f64 * 0.01, 0.125, th, delta);
            let pt: Vec<Ball> = full
                .iter()
                .filter(|b| ball_tube_intersects(b, &t))
                .filter(|b| cols.contains(&((((b.cx / delta).round() as u64) - 1) / 2)))
                .copied()
                .collect();
            if pt.is_empty() {
                continue;
            }
            kt = kt.max(ball_profile_brute(scale, &pt, beta).unwrap().k_max());
            before += pt.len();
            after += reg.balls.iter().filter(|b| ball_tube_intersects(b, &t)).count();
        }
    }
    let ratio = after as f64 / before as f64;
    let pass = fixed_ok && k_new <= 64.0 * 64.0 && ratio >= 0.25;
    outcome(
        pass,
        format!(
            "fixed point {}; heavy square replaced by {} balls (from {}), K at beta+1 = {k_new:.2}; sum |P'_t| / sum |P_t| = {ratio:.2} (need >= 0.25, P_t spacing K <= {kt:.2})",
            if fixed_ok { "holds" } else { "broken" },
            reg.balls.len(),
            full.len()
        ),
    )
}

fn surface() -> Outcome {
    let n = 200;
    let grid = |i: usize| 2.0 * i as f64 / (n - 1) as f64;
    let mut cont = 0.0f64;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        // α = β + 1, β ∈ [0, 1]
        let (a, b) = (t + 1.0, t);
        cont = cont.max((Piece::TubesHeavy.eval(a, b) - Piece::Bundles.eval(a, b)).abs());
        // β = α + 1
        let (a, b) = (t, t + 1.0);
        cont = cont.max((Piece::BallsHeavy.eval(a, b) - Piece::Bundles.eval(a, b)).abs());
        // α + β = 3, α ∈ [1, 2]
        let (a, b) = (1.0 + t, 2.0 - t);
        cont = cont.max((Piece::Dense.eval(a, b) - Piece::Bundles.eval(a, b)).abs());
    }
    let mut id1 = 0.0f64;
    let mut id2 = 0.0f64;
    let mut id2_above = true;
    let mut points = 0;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (grid(i), grid(j));
            let f = f_surface(a, b).unwrap();
            points += 1;
            if a >= 1.0 && b >= 1.0 {
                id1 = id1.max((f - two_sided_exponent(a, b)).abs());
            }
            if b.min(1.0) >= a && a + b.min(1.0) > 0.0 {
                let g = ball_dominated_exponent(a, b);
                if b <= a + 1.0 {
                    id2 = id2.max((f - g).abs());
                } else {
                    id2_above &= g >= f - 1e-12;
                }
            }
        }
    }
    let pass = cont <= 1e-12 && id1 <= 1e-12 && id2 <= 1e-12 && id2_above;
    outcome(
        pass,
        format!("{points} grid points; boundary gap {cont:.1e}, two-sided identity {id1:.1e}, ball-dominated identity {id2:.1e}"),
    )
}

fn main() {
    let sweeps = run_sweeps();
    let results: Vec<(&str, Outcome)> = vec![
        ("oracle equivalence", oracle_equivalence()),
        ("sharpness slopes", sharpness(&sweeps)),
        ("upper-bound consistency", upper_bounds(&sweeps)),
        ("spacing certification", spacing_certification()),
        ("dyadic sandwich", dyadic_sandwich()),
        ("coloring partition", coloring()),
        ("cantor sets", cantor()),
        ("furstenberg", furstenberg()),
        ("sum-product", sum_product()),
        ("regularization", regularization()),
        ("exponent surface", surface()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += (!o.pass) as usize;
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
