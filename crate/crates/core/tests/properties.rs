use std::f64::consts::PI;

use inclab::cantor::cantor_generate;
use inclab::experiments::{f_surface, fit_ols};
use inclab::geometry::*;
use inclab::incidence::{count_brute, count_grid};
use inclab::sumproduct::greedy_cover;
use proptest::prelude::*;

fn tube() -> impl Strategy<Value = Tube> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..PI, 1.0..8.0f64).prop_map(|(x, y, th, w)| Tube::unit(x, y, th, w / 64.0))
}

fn ball() -> impl Strategy<Value = Ball> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| Ball::new(x, y, 1.0 / 64.0))
}

fn rigid() -> impl Strategy<Value = Rigid> {
    (0.0..2.0 * PI, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(angle, tx, ty)| Rigid { angle, tx, ty })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn incidence_is_rigid_invariant(p in ball(), t in tube(), g in rigid()) {
        // away from tangency so rounding cannot flip the answer
        prop_assume!(ball_tube_gap(&p, &t).abs() > 1e-9);
        prop_assert_eq!(ball_tube_intersects(&p, &t), ball_tube_intersects(&g.ball(&p), &g.tube(&t)));
    }

    #[test]
    fn tube_angle_is_a_pseudometric(s in tube(), t in tube(), u in tube()) {
        let (st, tu, su) = (tube_angle(&s, &t), tube_angle(&t, &u), tube_angle(&s, &u));
        prop_assert!(su <= st + tu + 1e-12);
        prop_assert!((st - tube_angle(&t, &s)).abs() < 1e-15);
        prop_assert!((0.0..=PI / 2.0 + 1e-15).contains(&st));
        prop_assert_eq!(tube_angle(&s, &s), 0.0);
    }

    #[test]
    fn overlap_area_is_symmetric(s in tube(), dx in -0.05..0.05f64, dy in -0.05..0.05f64, dth in -0.2..0.2f64) {
        let t = Tube::unit(s.cx + dx, s.cy + dy, s.theta + dth, s.width);
        // equal areas, so the two normalised overlaps agree
        prop_assert!((essential_overlap(&s, &t) - essential_overlap(&t, &s)).abs() < 1e-9);
        prop_assert!((essential_overlap(&s, &s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn tube_intersection_is_symmetric(s in tube(), t in tube()) {
        prop_assert_eq!(tubes_intersect(&s, &t), tubes_intersect(&t, &s));
    }

    #[test]
    fn counts_are_permutation_invariant(
        balls in prop::collection::vec(ball(), 0..60),
        tubes in prop::collection::vec(tube(), 0..30),
        seed in any::<u64>(),
    ) {
        let tubes: Vec<Tube> = tubes.into_iter().map(|t| t.with_width(1.0 / 64.0)).collect();
        let base = count_grid(&balls, &tubes);
        let mut pb: Vec<usize> = (0..balls.len()).collect();
        let mut pt: Vec<usize> = (0..tubes.len()).collect();
        let mut s = seed | 1;
        let mut next = |n: usize| { s ^= s << 13; s ^= s >> 7; s ^= s << 17; (s % n as u64) as usize };
        for i in (1..pb.len()).rev() { let j = next(i + 1); pb.swap(i, j); }
        for i in (1..pt.len()).rev() { let j = next(i + 1); pt.swap(i, j); }
        let b2: Vec<Ball> = pb.iter().map(|&i| balls[i]).collect();
        let t2: Vec<Tube> = pt.iter().map(|&i| tubes[i]).collect();
        let shuffled = count_grid(&b2, &t2);
        prop_assert_eq!(base.total, shuffled.total);
        for (new, &old) in pb.iter().enumerate() {
            prop_assert_eq!(shuffled.per_ball[new], base.per_ball[old]);
        }
        for (new, &old) in pt.iter().enumerate() {
            prop_assert_eq!(shuffled.per_tube[new], base.per_tube[old]);
        }
    }

    #[test]
    fn double_counting(
        balls in prop::collection::vec(ball(), 0..80),
        tubes in prop::collection::vec(tube(), 0..40),
    ) {
        let tubes: Vec<Tube> = tubes.into_iter().map(|t| t.with_width(1.0 / 64.0)).collect();
        let r = count_brute(&balls, &tubes).unwrap();
        prop_assert_eq!(r.per_ball.iter().sum::<u64>(), r.total);
        prop_assert_eq!(r.per_tube.iter().sum::<u64>(), r.total);
        prop_assert!(r.same_counts(&count_grid(&balls, &tubes)));
    }

    #[test]
    fn rigid_motion_preserves_overlap(s in tube(), dx in -0.05..0.05f64, dth in -0.2..0.2f64, g in rigid()) {
        let t = Tube::unit(s.cx + dx, s.cy, s.theta + dth, s.width);
        let a = essential_overlap(&s, &t);
        let b = essential_overlap(&g.tube(&s), &g.tube(&t));
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn surface_is_bounded(alpha in 0.0..=2.0f64, beta in 0.0..=2.0f64) {
        let f = f_surface(alpha, beta).unwrap();
        // trivial bounds: I ≤ |P||𝕋| and I ≤ D·max(|P|, |𝕋|)
        prop_assert!(f <= alpha + beta + 1e-12);
        prop_assert!(f <= alpha.max(beta) + 1.0 + 1e-12);
        prop_assert!(f >= 0.5 * (alpha + beta) - 1e-12);
    }

    #[test]
    fn surface_is_monotone(alpha in 0.0..=1.9f64, beta in 0.0..=1.9f64, h in 0.0..0.1f64) {
        let f = f_surface(alpha, beta).unwrap();
        prop_assert!(f_surface(alpha + h, beta).unwrap() >= f - 1e-12);
        prop_assert!(f_surface(alpha, beta + h).unwrap() >= f - 1e-12);
    }

    #[test]
    fn cantor_sets_keep_endpoints_and_frostman_bounds(k in 3u32..12, s in 0.0..=1.0f64) {
        let c = cantor_generate(k, s).unwrap();
        prop_assert_eq!(c.points[0], 0);
        prop_assert_eq!(*c.points.last().unwrap(), 1u64 << k);
        prop_assert!(c.points.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(c.frostman_report().passes());
    }

    #[test]
    fn greedy_cover_covers(points in prop::collection::vec(1.0..4.0f64, 1..300)) {
        let delta = 1.0 / 128.0;
        let cover = greedy_cover(&points, delta);
        prop_assert!(cover.windows(2).all(|w| w[1] - w[0] > 2.0 * delta));
        for x in &points {
            prop_assert!(cover.iter().any(|c| (c - x).abs() <= delta + TAU));
        }
    }

    #[test]
    fn fit_recovers_lines(slope in -3.0..3.0f64, icpt in -5.0..5.0f64) {
        let xs: Vec<f64> = (0..8).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| slope * x + icpt).collect();
        let f = fit_ols(&xs, &ys).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-9);
        prop_assert!((f.intercept - icpt).abs() < 1e-9);
    }
}
