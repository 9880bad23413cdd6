use super::*;
use crate::burnedcost::burned_region;
use crate::eikonal_exact::TimeSolver;
use crate::firefront::{admissibility_with, phi_profile_with, AdmissibilityConfig, SamplingConfig};
use proptest::prelude::*;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

#[test]
fn closure_radius_for_the_reference_speed() {
    let s = SpiralSpec::new(0.1, 2.5).unwrap();
    assert!((s.lambda() - 0.75).abs() < 1e-15);
    let factor = (std::f64::consts::PI / 0.75).exp();
    assert!((factor - 65.943).abs() < 0.001, "{factor}");
    assert!((s.closure_radius() - 6.594).abs() < 1e-3, "{}", s.closure_radius());
    assert!((s.closure_radius() - 6.586).abs() / 6.586 < 0.005);
}

#[test]
fn slow_builders_cannot_close() {
    assert_eq!(SpiralSpec::new(0.1, 2.0), Err(StrategyError::SigmaTooSmall(2.0)));
    assert!(matches!(SpiralSpec::new(0.1, 1.5), Err(StrategyError::SigmaTooSmall(_))));
    assert!(matches!(SpiralSpec::new(0.0, 3.0), Err(StrategyError::BadRadius(_))));
    assert!(matches!(SpiralSpec::new(0.1, 3.0).unwrap().with_arc(3.5).polyline(), Err(StrategyError::BadArc(_))));
}

#[test]
fn fast_builders_hug_the_ignition_disc() {
    let s = SpiralSpec::new(0.1, 1000.0).unwrap();
    let want = 0.1 * (1.0 + std::f64::consts::PI / s.lambda());
    assert!((s.closure_radius() - want).abs() < 1e-5);
    assert!(s.closure_radius() < 0.1 * 1.01);
}

#[test]
fn polyline_is_closed_and_mirrored() {
    let s = SpiralSpec::new(0.1, 2.5).unwrap().with_points(50);
    let pts = s.polyline().unwrap();
    assert_eq!(pts.len(), 2 * 50 - 2);
    assert_eq!(pts[0], p(0.1, 0.0));
    assert_eq!(pts[49], p(-s.closure_radius(), 0.0));
    for k in 1..49 {
        assert_eq!(pts[k].x, pts[pts.len() - k].x);
        assert_eq!(pts[k].y, -pts[pts.len() - k].y);
    }
    let segs = spiral_segments(&s).unwrap();
    assert_eq!(segs.len(), pts.len());
    let b = split_components(&segs);
    assert_eq!(b.components.len(), 1);
    assert_eq!(b.bounded_faces(), 1);
}

#[test]
fn branch_satisfies_the_building_rate_equation() {
    // (σ/2)² = 1 + (r dθ/dr)², checked by central differences in θ
    for sigma in [2.2, 2.5, 4.0] {
        let s = SpiralSpec::new(0.1, sigma).unwrap();
        for k in 1..20 {
            let th = std::f64::consts::PI * k as f64 / 20.0;
            let e = 1e-5;
            let dr = (s.radius_at(th + e) - s.radius_at(th - e)) / (2.0 * e);
            let r = s.radius_at(th);
            let res = (sigma / 2.0).powi(2) - (1.0 + (r / dr).powi(2));
            assert!(res.abs() < 1e-6, "{sigma} {th} {res}");
        }
    }
}

#[test]
fn branch_length_matches_the_integral() {
    let s = SpiralSpec::new(0.1, 2.5).unwrap();
    let pts = s.polyline().unwrap();
    let n = s.points_per_branch;
    let poly: f64 = pts[..n].windows(2).map(|w| w[0].dist(w[1])).sum();
    let exact = s.branch_length(s.closure_radius());
    assert!(poly <= exact + 1e-9);
    assert!((poly - exact) / exact < 1e-5, "{poly} {exact}");
}

#[test]
fn arc_prefix_keeps_the_budget() {
    let s = SpiralSpec::new(0.1, 2.5).unwrap().with_arc(1.0);
    let ra = s.arc_radius();
    // the arc is finished exactly when the front reaches it
    assert!((1.0 * ra - 2.5 * (ra - 0.1)).abs() < 1e-12);
    let pts = s.polyline().unwrap();
    let b = split_components(&chain(&pts, true));
    assert_eq!(b.bounded_faces(), 1);
    let want = ra + 2.0 * s.branch_length(s.closure_radius());
    assert!((b.total_length - want).abs() / want < 1e-3, "{} {want}", b.total_length);
}

fn coarse_spiral(n: usize) -> (SpiralSpec, Scene) {
    let s = SpiralSpec::new(0.1, 2.5).unwrap().with_points(n);
    let sc = spiral_scene(&s, 1.0).unwrap();
    (s, sc)
}

#[test]
fn spiral_is_saturated_and_admissible() {
    let (s, sc) = coarse_spiral(300);
    let solver = TimeSolver::build(&sc);
    // interior points are reached radially, outside ones never
    assert_eq!(solver.min_time(p(2.0, 0.0)), f64::INFINITY);
    assert_eq!(solver.min_time(p(0.2, 0.01)), f64::INFINITY);
    for th in [2.5f64, 3.0, -2.7] {
        let q = p(th.cos(), th.sin()) * 2.0;
        assert!((solver.min_time(q) - 1.9).abs() < 1e-9);
    }
    let pr = phi_profile_with(&solver, SamplingConfig { per_unit_length: 64.0, min_per_segment: 2 });
    let cfg = AdmissibilityConfig { tolerance: Some(s.chord_slack()), ..Default::default() };
    let r = admissibility_with(&pr, 2.5, &cfg);
    assert!(r.admissible, "{} {}", r.worst_margin, s.chord_slack());
    let end = s.closure_radius() - 0.1;
    for k in 1..50 {
        let t = end * k as f64 / 50.0;
        let rel = (pr.phi_at(t) - 2.5 * t).abs() / (2.5 * t);
        assert!(rel < 0.02, "{t} {rel}");
    }
}

#[test]
fn spiral_blocks_with_known_area() {
    let (s, sc) = coarse_spiral(400);
    let rep = burned_region(&sc, 0.02);
    assert!(rep.bounded);
    let want = s.enclosed_area();
    assert!((want - 16.303).abs() < 0.001, "{want}");
    assert!((rep.area - want).abs() <= rep.area_error_band + 0.01 * want, "{rep:?} {want}");
}

#[test]
fn dust_examples() {
    let unit = BBox { min: p(0., 0.), max: p(1., 1.) };
    let one = dust_segments(&unit, 1, 0.3, 7).unwrap();
    assert_eq!(one.len(), 1);
    assert!((one[0].length() - 0.3).abs() < 1e-12);
    let many = dust_segments(&unit, 200, 0.5, 7).unwrap();
    assert_eq!(many.len(), 200);
    for s in &many {
        assert!((s.length() - 0.0025).abs() < 1e-12);
        assert!(unit.contains(s.a) && unit.contains(s.b));
    }
    let b = dust_barrier(&unit, 200, 0.5, 7).unwrap();
    assert_eq!(b.components.len(), 200);
    assert_eq!(dust_segments(&unit, 200, 0.5, 7).unwrap(), many);
    assert_ne!(dust_segments(&unit, 200, 0.5, 8).unwrap(), many);
    assert_eq!(dust_segments(&unit, 0, 0.5, 7), Err(StrategyError::BadDust));
    let tiny = BBox { min: p(0., 0.), max: p(0.01, 0.01) };
    assert!(matches!(dust_segments(&tiny, 3, 3.0, 1), Err(StrategyError::Placement { .. })));
}

#[test]
fn shield_examples() {
    let r0 = 0.5 * 0.3 / (2.0 * std::f64::consts::PI);
    let b = shield_disc(p(2., 0.), r0).unwrap();
    assert!(b.total_length <= 2.0 * std::f64::consts::PI * r0);
    assert!(b.total_length >= 0.999 * 2.0 * std::f64::consts::PI * r0);

    let sc = Scene::new(vec![Disc::new(p(0., 0.), 1.0).unwrap()], b.segments(), 2.5, 0.0).unwrap();
    assert_eq!(TimeSolver::build(&sc).min_time(p(2., 0.)), f64::INFINITY);

    // inside a spiral the shield saves its own area
    let (_, base) = coarse_spiral(400);
    let mut segs = base.barrier.segments().to_vec();
    segs.extend(shield_segments(p(-3., 0.), 0.3, 64).unwrap());
    let shielded = base.with_segments(&segs).unwrap();
    let h = 0.01;
    let (a0, a1) = (burned_region(&base, h), burned_region(&shielded, h));
    let saved = a0.area - a1.area;
    let poly = 32.0 * 0.09 * (2.0 * std::f64::consts::PI / 64.0).sin();
    assert!((saved - poly).abs() < 0.05 * poly, "{saved} {poly}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dust_grains_never_cross(seed in any::<u64>(), count in 1usize..60) {
        let region = BBox { min: p(-1., -1.), max: p(1., 1.) };
        let segs = dust_segments(&region, count, 0.05 * count as f64, seed).unwrap();
        for i in 0..segs.len() {
            for j in 0..i {
                prop_assert_eq!(segments_cross(&segs[i], &segs[j]), Crossing::Disjoint);
            }
        }
    }

    #[test]
    fn closure_radius_decreases_with_speed(a in 2.05f64..10.0, b in 2.05f64..10.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r = |s: f64| SpiralSpec::new(0.1, s).unwrap().closure_radius();
        prop_assert!(r(hi) <= r(lo));
    }
}
