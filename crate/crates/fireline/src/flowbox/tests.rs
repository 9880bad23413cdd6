use super::*;
use crate::geometry::{segment_length_in_disc, Disc};
use crate::strategy::dust_segments;
use proptest::prelude::*;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
    Segment::new(p(ax, ay), p(bx, by)).unwrap()
}

fn free_scene(segs: &[Segment]) -> Scene {
    Scene::new(vec![Disc::new(p(0., 0.), 0.1).unwrap()], segs, 3.0, 1.0).unwrap()
}

fn cfg_near(x: f64, y: f64, r: f64) -> FlowBoxConfig {
    FlowBoxConfig { region: Some(BBox::from_points([p(x - r, y - r), p(x + r, y + r)])), ..Default::default() }
}

/// Independent check of a box: side lengths, the level set, the offset
/// curve, sides against every barrier segment and the mass inside by
/// point sampling.
fn assert_valid(fb: &FlowBox, solver: &TimeSolver) {
    assert!((fb.side_a.length() - fb.h).abs() < 1e-12 * (1.0 + fb.h));
    assert!((fb.side_b.length() - fb.h).abs() < 1e-12 * (1.0 + fb.h));
    for q in &fb.lower.points {
        assert!((solver.min_time(*q) - fb.t0).abs() < 1e-9, "{q}");
    }
    for q in &fb.upper.points[1..fb.upper.points.len() - 1] {
        assert!((fb.lower.dist_to_point(*q) - fb.h).abs() < 1e-9);
    }
    for b in solver.scene().barrier.segments() {
        assert_eq!(segments_cross(b, &fb.side_a), Crossing::Disjoint);
        assert_eq!(segments_cross(b, &fb.side_b), Crossing::Disjoint);
    }
    let mut inside = 0.0;
    let k = 2000;
    for b in solver.scene().barrier.segments() {
        let w = b.length() / k as f64;
        inside += (0..k).filter(|&i| fb.contains(b.at((i as f64 + 0.5) / k as f64))).count() as f64 * w;
    }
    assert!((inside - fb.mass_inside).abs() < 1e-3 * fb.frame.scale, "{inside} {}", fb.mass_inside);
    assert!(fb.mass_inside <= fb.eps * fb.frame.scale);
}

#[test]
fn mass_curve_steps_and_limits() {
    let m = MassCurve::from_weights(vec![(1.0, 0.5), (2.0, 0.25), (2.0, 0.25)]);
    assert_eq!(m.at(0.5), 0.0);
    assert_eq!(m.at(1.0), 0.5);
    assert_eq!(m.before(1.0), 0.0);
    assert_eq!(m.at(1.5), 0.5);
    assert_eq!(m.before(2.0), 0.5);
    assert_eq!(m.at(2.0), 1.0);
    assert_eq!(m.breakpoints(), vec![1.0, 2.0]);
}

#[test]
fn ramps_spread_mass_evenly() {
    let m = MassCurve::from_ramps(&[(0.0, 2.0, 1.0), (1.0, 1.0, 0.5)]);
    assert!((m.at(0.5) - 0.25).abs() < 1e-15);
    assert!((m.before(1.0) - 0.5).abs() < 1e-15);
    assert!((m.at(1.0) - 1.0).abs() < 1e-15);
    assert!((m.at(3.0) - 1.5).abs() < 1e-15);
}

#[test]
fn profile_curve_matches_phi() {
    let prof = TouchProfile {
        sample_times: vec![1.0, 2.0, 3.0],
        phi: vec![0.5, 1.0, 2.0],
        slope: vec![0.25, 0.0, 0.0],
        components: vec![],
        total_length: 2.0,
        resolution: 0.0,
        diameter: 1.0,
    };
    let m = MassCurve::from_profile(&prof);
    for t in [0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0] {
        assert!((m.at(t) - prof.phi_at(t)).abs() < 1e-15, "{t}");
    }
    assert_eq!(m.before(2.0), 0.75);
}

#[test]
fn sunrise_zero_mass_takes_window_start() {
    let m = MassCurve::default();
    assert_eq!(choose_t0(&m, 0.1, 0.3, 0.5, 1.0).unwrap(), 0.3);
    assert_eq!(choose_h(&m, 0.1, 0.25, 0.33).unwrap(), 0.33);
}

#[test]
fn sunrise_skips_past_a_jump() {
    let eps = 0.1;
    // 6·eps·0.8 at t = 0.5: from t = 0 the jump is too steep, from 0.5 on nothing grows
    let m = MassCurve::from_weights(vec![(0.5, 6.0 * eps * 0.8)]);
    assert_eq!(choose_t0(&m, eps, 0.0, 1.0, 2.0).unwrap(), 0.5);
    // a smaller jump is fine from the start
    let m = MassCurve::from_weights(vec![(0.5, 6.0 * eps * 0.4)]);
    assert_eq!(choose_t0(&m, eps, 0.0, 1.0, 2.0).unwrap(), 0.0);
}

#[test]
fn sunrise_fails_on_steep_growth() {
    let eps = 0.1;
    let m = MassCurve::new(vec![(0.0, 0.0), (10.0, 7.0 * eps * 10.0)]);
    assert!(matches!(choose_t0(&m, eps, 0.0, 1.0, 2.0), Err(FlowBoxError::NoSunrise { .. })));
    let m = MassCurve::new(vec![(0.0, 0.0), (10.0, 13.0 * eps * 10.0)]);
    assert!(matches!(choose_h(&m, eps, 0.1, 0.3), Err(FlowBoxError::NoSunrise { .. })));
}

#[test]
fn offset_stops_below_a_jump() {
    let eps = 0.1;
    let m = MassCurve::from_weights(vec![(0.2, 12.0 * eps * 0.5)]);
    let h = choose_h(&m, eps, 0.1, 0.3).unwrap();
    assert!(h < 0.2 && h > 0.2 - 1e-9, "{h}");
    // a jump at the bottom is allowed when enough distance follows
    let m = MassCurve::from_weights(vec![(0.12, 12.0 * eps * 0.1)]);
    assert_eq!(choose_h(&m, eps, 0.1, 0.3).unwrap(), 0.3);
}

#[test]
fn polygon_helpers() {
    let sq = vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)];
    assert_eq!(polygon_area(&sq), 1.0);
    assert!(point_in_polygon(p(0.5, 0.5), &sq));
    assert!(!point_in_polygon(p(1.5, 0.5), &sq));
    let (inside, outside) = split_by_polygon(&seg(-1., 0.5, 0.5, 0.5), &sq);
    assert_eq!(inside.len(), 1);
    assert_eq!(outside.len(), 1);
    assert!((inside[0].length() - 0.5).abs() < 1e-15);
    assert!((outside[0].length() - 1.0).abs() < 1e-15);
    // in and out again through a notch
    let notch = vec![p(0., 0.), p(3., 0.), p(3., 2.), p(2., 2.), p(1.5, 0.5), p(1., 2.), p(0., 2.)];
    let (i, o) = split_by_polygon(&seg(-1., 1.5, 4., 1.5), &notch);
    assert_eq!((i.len(), o.len()), (2, 3));
    let li: f64 = i.iter().map(Segment::length).sum();
    let lo: f64 = o.iter().map(Segment::length).sum();
    assert!((li + lo - 5.0).abs() < 1e-12);
    // notch spans x in [1+1/6, 2-1/6] at y = 1.5
    assert!((li - (3.0 - (2.0 - 1.0 / 3.0 - 1.0))).abs() < 1e-12, "{li}");
}

#[test]
fn frame_round_trip() {
    let f = AnchorFrame::new(p(1., 2.), 0.5, p(3., 4.), 0.2);
    let (s1, s2) = f.to_frame(f.to_world(0.3, -0.7));
    assert!((s1 - 0.3).abs() < 1e-12 && (s2 + 0.7).abs() < 1e-12);
    assert!(polygon_area(&f.square(1.0)) > 0.0);
    assert!((polygon_area(&f.square(1.0)) - 0.16).abs() < 1e-12);
}

#[test]
fn anchor_in_free_space_is_first_candidate() {
    let scene = free_scene(&[]);
    let solver = TimeSolver::build(&scene);
    let a = find_anchor(&solver, 0.1, &cfg_near(2.0, 0.0, 0.2), 1).unwrap();
    assert_eq!(a.tried, 1);
    assert!(a.densities.iter().all(|d| d.1 == 0.0));
    let dir = a.frame.origin.unit();
    assert!((a.frame.e2 - dir).norm() < 1e-9);
    assert!((a.frame.t_bar - (a.frame.origin.norm() - 0.1)).abs() < 1e-9);
}

#[test]
fn anchor_on_a_wall_is_rejected() {
    let scene = free_scene(&[seg(2.0, -0.5, 2.0, 0.5)]);
    let solver = TimeSolver::build(&scene);
    let mut cfg = cfg_near(2.0, 0.0, 0.0);
    cfg.candidates = 5;
    let e = find_anchor(&solver, 0.3, &cfg, 1).unwrap_err();
    let FlowBoxError::NoAnchor { tried, best_density } = e else { panic!("{e:?}") };
    assert_eq!(tried, 5);
    // the smallest radius sees a full diameter of wall
    let r = density_radii(0.3)[4];
    assert!(best_density >= 2.0 * r / (r * r) - 1e-9);
}

#[test]
fn anchor_between_dust_grains() {
    let dust = dust_segments(&BBox::from_points([p(1.0, -1.0), p(3.0, 1.0)]), 100, 0.1, 4).unwrap();
    let scene = free_scene(&dust);
    let solver = TimeSolver::build(&scene);
    let eps = 0.3;
    let a = find_anchor(&solver, eps, &cfg_near(2.0, 0.0, 0.5), 4).unwrap();
    // density by point sampling of the grains
    for &(r, _) in &a.densities {
        let m: f64 = dust
            .iter()
            .map(|s| {
                let k = 400;
                (0..k).filter(|&i| s.at((i as f64 + 0.5) / k as f64).dist(a.frame.origin) <= r).count() as f64 * s.length() / k as f64
            })
            .sum();
        assert!(m / (r * r) < eps + 1e-2, "{r} {m}");
        let exact: f64 = dust.iter().map(|s| segment_length_in_disc(s, a.frame.origin, r)).sum();
        assert!((m - exact).abs() < 1e-5);
    }
}

#[test]
fn free_space_box_is_an_annular_sector() {
    let scene = free_scene(&[]);
    let solver = TimeSolver::build(&scene);
    let cfg = cfg_near(2.0, 0.0, 0.01);
    let a = find_anchor(&solver, 0.1, &cfg, 2).unwrap();
    let t0 = choose_t0_for(&solver, &a.frame, 0.1, &cfg).unwrap();
    assert!((t0 - (a.frame.t_bar + 0.1)).abs() < 1e-12);
    let fb = build_flowbox(&solver, &a, t0, 0.1, &cfg).unwrap();
    assert!((fb.h - 0.1).abs() < 1e-12);
    assert_valid(&fb, &solver);
    // the front is the circle of radius t0 + 0.1, sides are radial
    let r = t0 + 0.1;
    for q in &fb.lower.points {
        assert!((q.norm() - r).abs() < 1e-9);
    }
    for s in [fb.side_a, fb.side_b] {
        assert!(s.a.unit().cross(s.b.unit()).abs() < 1e-9);
    }
    let th = fb.side_a.a.unit().cross(fb.side_b.a.unit()).asin().abs();
    let sector = th / 2.0 * ((r + fb.h).powi(2) - r * r);
    // chords lose at most n·(segment area) on each curve
    let n = cfg.transversals as f64;
    let sag = |rr: f64| n * rr * rr / 2.0 * ((th / n) - (th / n).sin());
    assert!((fb.area() - sector).abs() <= sag(r) + sag(r + fb.h) + 1e-12, "{} {sector}", fb.area());
    assert_eq!(fb.mass_inside, 0.0);
}

#[test]
fn empty_box_prunes_nothing() {
    let wall = seg(-3.0, -1.0, -3.0, 1.0);
    let scene = free_scene(&[wall]);
    let solver = TimeSolver::build(&scene);
    let cfg = cfg_near(2.0, 0.0, 0.01);
    let a = find_anchor(&solver, 0.1, &cfg, 2).unwrap();
    let fb = build_flowbox(&solver, &a, a.frame.t_bar + 0.1, 0.1, &cfg).unwrap();
    let pr = prune(&scene, &fb).unwrap();
    assert_eq!(pr.removed_length, 0.0);
    assert_eq!(pr.segments_cut, 0);
    assert_eq!(pr.scene.barrier.segments(), scene.barrier.segments());
}

#[test]
fn straddling_grain_is_clipped() {
    let scene = free_scene(&[]);
    let solver = TimeSolver::build(&scene);
    let cfg = cfg_near(2.0, 0.0, 0.01);
    let a = find_anchor(&solver, 0.1, &cfg, 2).unwrap();
    let fb = build_flowbox(&solver, &a, a.frame.t_bar + 0.1, 0.1, &cfg).unwrap();
    // a radial grain through the middle of the lower curve, half in and half out
    let mid = fb.lower.points[fb.lower.points.len() / 2];
    let u = mid.unit();
    let grain = Segment::new(mid - u * 0.01, mid + u * 0.01).unwrap();
    let far = seg(-3.0, -1.0, -3.0, -0.9);
    let with = free_scene(&[grain, far]);
    let pr = prune(&with, &fb).unwrap();
    assert_eq!(pr.segments_cut, 1);
    assert!((pr.removed_length - 0.01).abs() < 1e-9, "{}", pr.removed_length);
    assert!((pr.scene.barrier.total_length - 0.11).abs() < 1e-9);
    assert_eq!(pr.scene.barrier.components.len(), 2);
}

#[test]
fn sparse_dust_box_at_small_eps() {
    let dust = dust_segments(&BBox::from_points([p(1.0, -1.0), p(3.0, 1.0)]), 20, 0.002, 9).unwrap();
    let scene = free_scene(&dust);
    let solver = TimeSolver::build(&scene);
    let eps = 0.01;
    let cfg = cfg_near(2.0, 0.0, 0.5);
    let a = find_anchor(&solver, eps, &cfg, 9).unwrap();
    let t0 = choose_t0_for(&solver, &a.frame, eps, &cfg).unwrap();
    let fb = build_flowbox(&solver, &a, t0, eps, &cfg).unwrap();
    assert_valid(&fb, &solver);
}

#[test]
fn dust_demo_box_removes_grains_inside() {
    let scene = demo_scene(3, 1.0).unwrap();
    let solver = TimeSolver::build(&scene);
    let eps = 0.3;
    let cfg = FlowBoxConfig { region: Some(demo_anchor_region()), ..Default::default() };
    let a = find_anchor(&solver, eps, &cfg, 3).unwrap();
    let t0 = choose_t0_for(&solver, &a.frame, eps, &cfg).unwrap();
    let fb = build_flowbox(&solver, &a, t0, eps, &cfg).unwrap();
    assert_valid(&fb, &solver);
    let pr = prune(&scene, &fb).unwrap();
    // count check: grains wholly inside go, grains wholly outside stay
    let segs = scene.barrier.segments();
    let whole_in: f64 = segs.iter().filter(|s| fb.contains(s.a) && fb.contains(s.b)).map(Segment::length).sum();
    assert!(pr.removed_length >= whole_in - 1e-12);
    assert!((pr.removed_length - fb.mass_inside).abs() < 1e-12);
    assert!((scene.barrier.total_length - pr.scene.barrier.total_length - pr.removed_length).abs() < 1e-9);
    for s in pr.scene.barrier.segments() {
        assert!(!fb.contains(s.at(0.5)));
    }
}

#[test]
fn certify_with_nothing_removed_is_neutral() {
    let spec = crate::strategy::SpiralSpec::new(0.1, 2.5).unwrap().with_points(400);
    let segs = crate::strategy::spiral_segments(&spec).unwrap();
    let scene = Scene::new(vec![Disc::new(p(0., 0.), 0.1).unwrap()], &segs, 3.0, 1.0).unwrap();
    let solver = TimeSolver::build(&scene);
    let cfg = FlowBoxConfig { region: Some(demo_anchor_region()), ..Default::default() };
    let a = find_anchor(&solver, 0.3, &cfg, 1).unwrap();
    let t0 = choose_t0_for(&solver, &a.frame, 0.3, &cfg).unwrap();
    let fb = build_flowbox(&solver, &a, t0, 0.3, &cfg).unwrap();
    let pr = prune(&scene, &fb).unwrap();
    assert_eq!(pr.removed_length, 0.0);
    let rep = certify_improvement(&scene, &pr.scene, &fb, 0.05, 1).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert_eq!(rep.delta_j, 0.0);
    assert_eq!(rep.area_before, rep.area_after);
    assert!(rep.shield.is_none());
    let json = serde_json::to_string(&rep).unwrap();
    assert!(json.contains("\"passed\":true"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ramps_match_direct_sum(items in prop::collection::vec((0.0..5.0f64, 0.0..2.0f64, 0.0..1.0f64), 1..12), t in -1.0..8.0f64) {
        let items: Vec<(f64, f64, f64)> = items.into_iter().map(|(a, w, m)| (a, a + w, m)).collect();
        let c = MassCurve::from_ramps(&items);
        let direct: f64 = items.iter().map(|&(a, b, m)| {
            if t >= b { m } else if t <= a { 0.0 } else { m * (t - a) / (b - a) }
        }).sum();
        prop_assert!((c.at(t) - direct).abs() < 1e-9);
    }

    #[test]
    fn sunrise_choice_holds_and_is_first(jumps in prop::collection::vec((0.0..2.0f64, 0.0..0.3f64), 0..8), eps in 0.02..0.2f64) {
        let m = MassCurve::from_weights(jumps);
        let (lo, hi, end) = (0.2, 1.0, 2.0);
        let ok_from = |c: f64| {
            (0..=2000).map(|i| c + (end - c) * i as f64 / 2000.0)
                .chain(m.breakpoints().into_iter().filter(|&t| t > c && t <= end))
                .all(|t| m.at(t) - m.at(c) <= 6.0 * eps * (t - c) + 1e-12)
        };
        match choose_t0(&m, eps, lo, hi, end) {
            Ok(t0) => {
                prop_assert!(ok_from(t0));
                for c in std::iter::once(lo).chain(m.breakpoints()).filter(|&c| c >= lo && c < t0) {
                    prop_assert!(!ok_from(c));
                }
            }
            Err(_) => {
                for c in std::iter::once(lo).chain(m.breakpoints()).filter(|&c| c >= lo && c <= hi) {
                    prop_assert!(!ok_from(c));
                }
            }
        }
    }

    #[test]
    fn chosen_offset_satisfies_condition(jumps in prop::collection::vec((0.0..0.4f64, 0.0..0.2f64), 0..8), eps in 0.02..0.2f64) {
        let m = MassCurve::from_weights(jumps);
        if let Ok(h) = choose_h(&m, eps, 0.1, 0.3) {
            prop_assert!((0.1..=0.3).contains(&h));
            for i in 0..=3000 {
                let d = h * i as f64 / 3000.0;
                prop_assert!(m.at(h) - m.at(d) <= 12.0 * eps * (h - d) + 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    /// Random dust, sometimes dense: either a box that passes the independent
    /// checks or a reported failure.
    #[test]
    fn boxes_are_valid_or_refused(seed in 0u64..1000, count in 5usize..150, len in 0.01..0.4f64, eps in 0.05..0.4f64) {
        let dust = dust_segments(&BBox::from_points([p(1.0, -1.0), p(3.0, 1.0)]), count, len, seed).unwrap();
        let scene = free_scene(&dust);
        let solver = TimeSolver::build(&scene);
        let cfg = FlowBoxConfig { candidates: 40, side_samples: 20, ..cfg_near(2.0, 0.0, 0.5) };
        let built = find_anchor(&solver, eps, &cfg, seed)
            .and_then(|a| choose_t0_for(&solver, &a.frame, eps, &cfg).and_then(|t0| build_flowbox(&solver, &a, t0, eps, &cfg)));
        if let Ok(fb) = built {
            assert_valid(&fb, &solver);
        }
    }
}
