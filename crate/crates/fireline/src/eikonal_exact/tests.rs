use super::*;
use crate::geometry::Barrier;
use rand::Rng;
use proptest::prelude::*;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment {
    Segment::new(p(ax, ay), p(bx, by)).unwrap()
}

fn unit_scene(segs: &[Segment]) -> Scene {
    Scene::new(vec![Disc::new(p(0., 0.), 1.0).unwrap()], segs, 2.5, 1.0).unwrap()
}

fn corner() -> TimeSolver {
    TimeSolver::build(&unit_scene(&[seg(2., -1., 2., 1.)]))
}

#[test]
fn empty_barrier_has_no_nodes() {
    let s = TimeSolver::build(&unit_scene(&[]));
    assert_eq!(s.node_count(), 0);
    assert_eq!(s.min_time(p(3., 0.)), 2.0);
    assert_eq!(s.min_time(p(0.5, 0.)), 0.0);
}

#[test]
fn corner_labels() {
    let s = corner();
    let t: Vec<(Point, f64)> = s.nodes().collect();
    let top = t.iter().find(|(q, _)| *q == p(2., 1.)).unwrap().1;
    assert!((top - (5f64.sqrt() - 1.0)).abs() < 1e-14);
    let x = p(3., 0.);
    let want = (5f64.sqrt() - 1.0) + 2f64.sqrt();
    assert!((s.min_time(x) - want).abs() < 1e-12);
}

#[test]
fn enclosed_point_is_unreachable() {
    let sq = [seg(9., 9., 11., 9.), seg(11., 9., 11., 11.), seg(11., 11., 9., 11.), seg(9., 11., 9., 9.)];
    let s = TimeSolver::build(&unit_scene(&sq));
    assert_eq!(s.min_time(p(10., 10.)), f64::INFINITY);
    assert!(s.rho(p(10., 10.)).is_err());
    assert!(s.optimal_trajectory(p(10., 10.)).is_err());
    // corners seen from outside are finite; the point (9,9) lies on the loop
    for (q, t) in s.nodes() {
        assert!(t.is_finite(), "{q} {t}");
    }
    // the far corner hides behind (9,9); the fire rides along a side wall
    let far = p(11., 11.);
    assert!((s.min_time(far) - (p(11., 9.).norm() - 1.0 + 2.0)).abs() < 1e-12);
    // just outside the far wall the fire has to walk around a corner
    let behind = p(11.5, 10.);
    let around = (p(11., 9.).norm() - 1.0) + p(11., 9.).dist(behind);
    assert!((s.min_time(behind) - around).abs() < 1e-12);
}

#[test]
fn trajectory_examples() {
    let s = TimeSolver::build(&unit_scene(&[]));
    let tr = s.optimal_trajectory(p(3., 0.)).unwrap();
    assert_eq!(tr.vertices, vec![p(1., 0.), p(3., 0.)]);
    assert_eq!(tr.total_time, 2.0);

    // the short way around is below the wall
    let s = TimeSolver::build(&unit_scene(&[seg(2., -0.5, 2., 1.)]));
    let tr = s.optimal_trajectory(p(3., -0.3)).unwrap();
    let bend = p(2., -0.5);
    assert_eq!(tr.vertices.len(), 3);
    assert_eq!(tr.vertices[1], bend);
    let p0 = bend * (1.0 / bend.norm());
    assert!(tr.vertices[0].dist(p0) < 1e-12);

    let s = corner();
    let tr = s.optimal_trajectory(p(3., 0.)).unwrap();
    assert_eq!(tr.vertices.len(), 3);
    let mid = tr.vertices[1];
    assert!(mid == p(2., 1.) || mid == p(2., -1.));
    assert!(tr.vertices[0].dist(mid * (1.0 / 5f64.sqrt())) < 1e-12);
    assert!((tr.total_time - s.min_time(p(3., 0.))).abs() < 1e-12);
}

#[test]
fn symmetric_paths_have_equal_final_legs() {
    let s = corner();
    let x = p(3.5, 0.);
    let tr = s.optimal_trajectory(x).unwrap();
    let leg = tr.vertices[1].dist(x);
    assert!((leg - p(2., 1.).dist(x)).abs() < 1e-12);
    assert!((s.rho(x).unwrap() - leg).abs() < 1e-12);
}

#[test]
fn rho_examples() {
    let s = TimeSolver::build(&unit_scene(&[]));
    for x in [p(3., 0.), p(-1.5, 2.), p(0.2, -4.)] {
        assert!((s.rho(x).unwrap() - (x.norm() - 1.0)).abs() < 1e-12);
    }
    let s = corner();
    assert!((s.rho(p(3., 0.)).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let u = (p(3., 0.) - p(2., 1.)).unit();
    let x = p(2., 1.) + u * 0.1;
    assert!((s.rho(x).unwrap() - 0.1).abs() < 1e-12);
}

#[test]
fn rho_runs_straight_through_grazed_endpoints() {
    // the leg from the top corner to x grazes the stub's endpoint at (3,0)
    let s = TimeSolver::build(&unit_scene(&[seg(2., -3., 2., 1.), seg(3., 0., 3., 1.)]));
    let x = p(4., -1.);
    let want = 2.0 * 2f64.sqrt();
    assert!((s.rho(x).unwrap() - want).abs() < 1e-12);
    let tr = s.optimal_trajectory(x).unwrap();
    assert!((tr.total_time - (5f64.sqrt() - 1.0 + want)).abs() < 1e-12);
    // past the stub's tip the leg still starts at the corner
    let y = p(3.5, -0.5);
    assert!((s.rho(y).unwrap() - p(2., 1.).dist(y)).abs() < 1e-12);
}

#[test]
fn endpoint_on_source_boundary_does_not_leak() {
    // a closed triangle pinned to the circle at (1,0)
    let tri = [seg(1., 0., 3., 2.), seg(3., 2., 3., -2.), seg(3., -2., 1., 0.)];
    let s = TimeSolver::build(&unit_scene(&tri));
    assert_eq!(s.min_time(p(2.5, 0.)), f64::INFINITY);
    assert!(s.min_time(p(3.5, 0.)).is_finite());
}

#[test]
fn polygon_source_converges() {
    let scene = unit_scene(&[]);
    let x = p(2.3, 1.1);
    let exact = x.norm() - 1.0;
    let cfg = |n| SolverConfig { source: SourceModel::Polygon(n), ..Default::default() };
    let a = TimeSolver::with_config(&scene, cfg(512)).unwrap();
    let b = TimeSolver::with_config(&scene, cfg(1024)).unwrap();
    let (ta, tb) = (a.min_time(x), b.min_time(x));
    assert!((ta - exact).abs() <= a.source_error_bound() + 1e-12);
    assert!((tb - exact).abs() <= b.source_error_bound() + 1e-12);
    assert!((richardson(ta, tb) - exact).abs() <= (tb - exact).abs() + 1e-12);
    assert!(TimeSolver::with_config(&scene, cfg(4)).is_err());
}

#[test]
fn rho_integral_empty_barrier_is_tight() {
    let s = TimeSolver::build(&unit_scene(&[]));
    let r = rho_integral_report(&s, 4000, 1).unwrap();
    assert!((r.lhs - r.rhs).abs() < 1e-9, "{r:?}");
    // integral of (|x| - 1) over the annulus 1 < |x| < 2 is 5 pi / 3
    assert!((r.lhs - 5.0 * std::f64::consts::PI / 3.0).abs() < 0.05, "{r:?}");
    assert!(r.t_hat_bound_holds);
}

#[test]
fn rho_integral_sparse_barriers() {
    let s = TimeSolver::build(&unit_scene(&[seg(1.4, -0.1, 1.4, 0.1)]));
    let r = rho_integral_report(&s, 4000, 2).unwrap();
    assert!(r.lhs >= r.rhs - 3.0 * r.stderr, "{r:?}");
    assert!(r.t_hat_bound_holds);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dust = Vec::new();
    while dust.len() < 50 {
        let c = p(rng.random_range(-1.8..1.8), rng.random_range(-1.8..1.8));
        if c.norm() < 1.1 || c.norm() > 1.9 {
            continue;
        }
        let a: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let d = p(a.cos(), a.sin()) * 0.003;
        let sg = Segment::new(c - d, c + d).unwrap();
        if dust.iter().all(|t| crate::geometry::segments_cross(&sg, t) == crate::geometry::Crossing::Disjoint) {
            dust.push(sg);
        }
    }
    let s = TimeSolver::build(&unit_scene(&dust));
    assert!((s.scene().barrier.total_length - 0.3).abs() < 1e-12);
    let r = rho_integral_report(&s, 4000, 3).unwrap();
    assert!(r.lhs >= r.rhs - 3.0 * r.stderr, "{r:?}");
}

#[test]
fn rho_integral_rejects_enclosures() {
    let sq = [seg(3., 3., 4., 3.), seg(4., 3., 4., 4.), seg(4., 4., 3., 4.), seg(3., 4., 3., 3.)];
    let s = TimeSolver::build(&unit_scene(&sq));
    assert!(matches!(rho_integral_report(&s, 100, 0), Err(ExactError::DisconnectedComplement { .. })));
}

#[test]
fn arc_refinement_stabilizes() {
    // arc of radius 2 from -60 to +60 degrees
    let arc = |n: usize| -> Vec<Segment> {
        let pts: Vec<Point> = (0..=n)
            .map(|k| {
                let a = -std::f64::consts::FRAC_PI_3 + 2.0 * std::f64::consts::FRAC_PI_3 * k as f64 / n as f64;
                p(2.0 * a.cos(), 2.0 * a.sin())
            })
            .collect();
        pts.windows(2).map(|w| Segment::new(w[0], w[1]).unwrap()).collect()
    };
    let probes = [p(3., 0.), p(2.6, 0.4), p(3.2, -0.7)];
    let sol = |n| TimeSolver::build(&unit_scene(&arc(n)));
    let (a, b, c) = (sol(8), sol(16), sol(32));
    let diff = |x: &TimeSolver, y: &TimeSolver| {
        probes.iter().map(|&q| (x.min_time(q) - y.min_time(q)).abs()).fold(0.0, f64::max)
    };
    let (d1, d2) = (diff(&a, &b), diff(&b, &c));
    assert!(d2 <= 0.6 * d1, "{d1} {d2}");
}

fn random_scene(segs: Vec<(f64, f64, f64, f64)>) -> Scene {
    let s: Vec<Segment> = segs
        .into_iter()
        .filter_map(|(x, y, a, l)| Segment::new(p(x, y), p(x + l * a.cos(), y + l * a.sin())).ok())
        .collect();
    unit_scene(&s)
}

fn arb_segs() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((-3.5f64..3.5, -3.5f64..3.5, 0.0f64..6.3, 0.05f64..2.0), 0..6)
}

fn arb_pt() -> impl Strategy<Value = Point> {
    (-4.5f64..4.5, -4.5f64..4.5).prop_map(|(x, y)| p(x, y))
}

/// Straight-line check of the no-barrier identity over several discs.
fn min_dist(discs: &[Disc], x: Point) -> f64 {
    discs.iter().map(|d| d.distance(x)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn no_barrier_identity(
        discs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0.1f64..1.5), 1..4),
        xs in prop::collection::vec(arb_pt(), 1..20),
    ) {
        let discs: Vec<Disc> = discs.into_iter().map(|(x, y, r)| Disc::new(p(x, y), r).unwrap()).collect();
        let s = TimeSolver::build(&Scene::new(discs.clone(), &[], 2.5, 0.0).unwrap());
        for x in xs {
            let want = min_dist(&discs, x);
            prop_assert!((s.min_time(x) - want).abs() <= 1e-12 * (1.0 + want));
        }
    }

    #[test]
    fn lipschitz_on_visible_pairs(segs in arb_segs(), pairs in prop::collection::vec((arb_pt(), arb_pt()), 1..12)) {
        let s = TimeSolver::build(&random_scene(segs));
        for (x, y) in pairs {
            let (tx, ty) = (s.min_time(x), s.min_time(y));
            if s.scene().barrier.visible(x, y) && tx.is_finite() {
                prop_assert!(ty.is_finite());
                prop_assert!((tx - ty).abs() <= x.dist(y) * (1.0 + 1e-9) + 1e-12, "{} {} {}", tx, ty, x.dist(y));
            }
        }
    }

    #[test]
    fn loop_around_bound(segs in arb_segs(), xs in prop::collection::vec(arb_pt(), 1..20)) {
        let scene = random_scene(segs);
        prop_assume!(scene.barrier.bounded_faces() == 0);
        let s = TimeSolver::build(&scene);
        for x in xs {
            let t = s.min_time(x);
            prop_assert!(t <= scene.dist_to_initial(x) + scene.barrier.total_length + 1e-9);
            prop_assert!(t >= scene.dist_to_initial(x) - 1e-12);
        }
    }

    #[test]
    fn growing_the_barrier_never_speeds_the_fire(segs in arb_segs(), extra in arb_segs(), xs in prop::collection::vec(arb_pt(), 1..15)) {
        let small = random_scene(segs.clone());
        let mut all = segs;
        all.extend(extra);
        let big = random_scene(all);
        let (a, b) = (TimeSolver::build(&small), TimeSolver::build(&big));
        for x in xs {
            let (ta, tb) = (a.min_time(x), b.min_time(x));
            prop_assert!(tb >= ta * (1.0 - 1e-12) - 1e-12, "{} {} at {}", ta, tb, x);
        }
    }

    #[test]
    fn trajectories_are_valid(segs in arb_segs(), xs in prop::collection::vec(arb_pt(), 1..10)) {
        let s = TimeSolver::build(&random_scene(segs));
        let bar: &Barrier = &s.scene().barrier;
        let ends: Vec<Point> = bar.endpoints();
        for x in xs {
            let t = s.min_time(x);
            let Ok(tr) = s.optimal_trajectory(x) else {
                prop_assert!(!t.is_finite());
                continue;
            };
            prop_assert!((tr.total_time - t).abs() <= 1e-12 * (1.0 + t));
            prop_assert_eq!(*tr.vertices.last().unwrap(), x);
            if t == 0.0 {
                continue;
            }
            let first = tr.vertices[0];
            prop_assert!(s.scene().dist_to_initial(first) < 1e-9);
            for w in tr.vertices.windows(2) {
                prop_assert!(bar.visible(w[0], w[1]));
            }
            for v in &tr.vertices[1..tr.vertices.len() - 1] {
                prop_assert!(ends.contains(v));
            }
            for (i, w) in tr.times.windows(2).enumerate() {
                prop_assert!(w[1] > w[0]);
                prop_assert!(((w[1] - w[0]) - tr.vertices[i].dist(tr.vertices[i + 1])).abs() < 1e-12);
            }
            let r = s.rho(x).unwrap();
            let last = tr.vertices[tr.vertices.len() - 2].dist(x);
            prop_assert!(r >= last - 1e-12);
        }
    }
}
