use inclab::cantor::{build_pw, cantor_generate, tube_hits_pw};
use inclab::constructions::*;
use inclab::geometry::*;
use inclab::spacing::{ball_profile_brute, ball_profile_dyadic, max_intersect_degree_balls, max_overlap_degree_tubes};
use inclab::Configuration;

const SAMPLES: [(ConstructionId, f64, f64); 12] = [
    (ConstructionId::One, 1.0, 1.0),
    (ConstructionId::One, 0.5, 0.8),
    (ConstructionId::One, 1.4, 0.9),
    (ConstructionId::One, 0.7, 1.5),
    (ConstructionId::Two, 1.8, 0.5),
    (ConstructionId::Two, 1.2, 0.1),
    (ConstructionId::Three, 0.5, 1.8),
    (ConstructionId::Three, 0.2, 1.3),
    (ConstructionId::Four, 1.7, 1.6),
    (ConstructionId::Four, 2.0, 1.0),
    (ConstructionId::Four, 1.5, 1.5),
    (ConstructionId::Four, 2.0, 2.0),
];

#[test]
fn counts_track_the_exponents() {
    for (id, alpha, beta) in SAMPLES {
        for k in [6, 8] {
            let c = generate(id, k, alpha, beta).unwrap();
            let d = (k as f64).exp2();
            let (nt, nb) = (c.tubes.len() as f64, c.balls.len() as f64);
            assert!(
                nt >= d.powf(alpha) / 32.0 && nt <= 32.0 * d.powf(alpha),
                "{id} ({alpha},{beta}) k={k}: |T|={nt}"
            );
            assert!(
                nb >= d.powf(beta) / 32.0 && nb <= 32.0 * d.powf(beta),
                "{id} ({alpha},{beta}) k={k}: |P|={nb}"
            );
        }
    }
}

#[test]
fn objects_are_essentially_distinct() {
    for (id, alpha, beta) in SAMPLES {
        let c = generate(id, 7, alpha, beta).unwrap();
        assert!(max_overlap_degree_tubes(&c.tubes) <= 2, "{id} ({alpha},{beta})");
        assert!(max_intersect_degree_balls(&c.balls) <= 10, "{id} ({alpha},{beta})");
        c.check_uniform().unwrap();
    }
}

#[test]
fn every_bundle_ball_meets_every_bundle_tube() {
    for (alpha, beta) in [(1.0, 1.0), (0.5, 0.8), (1.4, 0.9), (0.7, 1.5), (0.3, 0.3)] {
        let p = Construction1Params::new(alpha, beta).unwrap();
        assert!(p.lambda_conditions().iter().all(|&ok| ok), "({alpha},{beta})");
        let (c, bundles) = construct1_with(8, &p).unwrap();
        for b in &bundles {
            for t in &c.tubes[b.tubes.clone()] {
                for ball in &c.balls[b.balls.clone()] {
                    assert!(ball_tube_intersects(ball, t));
                }
            }
        }
    }
}

#[test]
fn lambda_conditions_over_the_region() {
    for i in 0..=40 {
        for j in 0..=40 {
            let (alpha, beta) = (i as f64 * 0.05, j as f64 * 0.05);
            if ConstructionId::One.admits(alpha, beta) {
                let p = Construction1Params::new(alpha, beta).unwrap();
                assert!(p.lambda_conditions().iter().all(|&ok| ok), "({alpha},{beta})");
            }
        }
    }
}

#[test]
fn outside_region_is_rejected() {
    assert!(generate(ConstructionId::Two, 7, 1.0, 1.0).is_err());
    assert!(generate(ConstructionId::Three, 7, 1.0, 1.0).is_err());
    assert!(generate(ConstructionId::Four, 7, 1.0, 1.0).is_err());
    assert!(generate(ConstructionId::One, 7, 2.0, 0.5).is_err());
}

#[test]
fn generation_is_deterministic_and_round_trips() {
    for (id, alpha, beta) in SAMPLES {
        let a = generate(id, 6, alpha, beta).unwrap();
        let b = generate(id, 6, alpha, beta).unwrap();
        assert_eq!(a, b);
        let back = Configuration::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
    }
}

#[test]
fn furstenberg_tube_sets_are_spaced() {
    let f = furstenberg_config(7, 0.8, 1.5).unwrap();
    let d = 128.0f64;
    assert!(f.tubes.len() as f64 >= d.powf(1.5) / 32.0);
    for t in (0..f.tubes.len()).step_by(37) {
        let balls = f.tube_balls(t);
        assert!(balls.len() as f64 >= d.powf(0.8) / 4.0);
        let k = ball_profile_brute(f.scale, &balls, 0.8).unwrap().k_max();
        assert!(k <= 64.0, "tube {t}: K = {k}");
        for b in &balls {
            assert!(ball_tube_intersects(b, &f.tubes[t]));
        }
    }
}

#[test]
fn product_sets_meet_crossing_tubes() {
    let k = 7;
    let delta = (-(k as f64)).exp2();
    let w = 0.25;
    let s = 0.6;
    let pw = build_pw(k, w, s).unwrap();
    let marks = cantor_generate(5, s).unwrap();
    // a tube entering through the left edge and crossing d/δ columns
    for d_cols in [4usize, 8, 16, 31] {
        let d = d_cols as f64 * delta;
        let th: f64 = 0.3;
        let len = d / th.cos();
        let t = Tube::new(0.5 * d, 0.1 + 0.5 * len * th.sin(), th, delta, len);
        let hits = tube_hits_pw(&t, &pw);
        assert!(hits as f64 >= (d / delta).powf(s) / 4.0, "d={d_cols}: {hits}");
    }
    assert!(marks.len() >= 2);
}

#[test]
fn regularize_fixed_point() {
    let k = 6;
    let scale = Scale::new(k).unwrap();
    // a sparse lattice set: one ball per 8 × 8 block
    let delta = scale.delta();
    let mut balls = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            balls.push(Ball::new((8 * i + 1) as f64 * delta, (8 * j + 1) as f64 * delta, delta));
        }
    }
    let r = regularize(scale, &balls, 0.5, 1.0).unwrap();
    assert!(r.replaced.is_empty());
    assert_eq!(r.balls, balls);
}

#[test]
fn regularize_replaces_full_square() {
    let k = 7;
    let scale = Scale::new(k).unwrap();
    let delta = scale.delta();
    let mut balls = Vec::new();
    for i in 0..16 {
        for j in 0..16 {
            balls.push(Ball::new((2 * i + 1) as f64 * delta, (2 * j + 1) as f64 * delta, delta));
        }
    }
    let r = regularize(scale, &balls, 0.5, 1.0).unwrap();
    assert_eq!(r.replaced, vec![Square::new(0.0, 0.0, 0.25)]);
    assert!(r.balls.len() <= 4 * balls.len());
    for (x, a) in r.replaced.iter().enumerate() {
        for b in &r.replaced[x + 1..] {
            let apart =
                a.x0 + a.side <= b.x0 || b.x0 + b.side <= a.x0 || a.y0 + a.side <= b.y0 || b.y0 + b.side <= a.y0;
            assert!(apart);
        }
    }
    let kd = ball_profile_dyadic(scale, &r.balls, 1.5).unwrap().k_max();
    let kb = ball_profile_brute(scale, &r.balls, 1.5).unwrap().k_max();
    assert!(kd <= 64.0 && kb <= 64.0 * 64.0, "{kd} {kb}");
}
