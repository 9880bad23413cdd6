//! Pass/fail table over the invariant checks of the library, run on one scene
//! or on a named suite of bundled scenes and seeded random instances.

use fireline::burnedcost::complement_connected;
use fireline::detour::{attainable_sweep, detour_hypotheses, sparse_detour, sunrise_margin, SweepMode};
use fireline::eikonal_exact::rho_integral_report;
use fireline::eikonal_grid::GridField;
use fireline::firefront::{phi_profile_with, unit_expansion_check, SamplingConfig};
use fireline::geometry::{segments_cross, Crossing, Disc, Point, Scene, Segment};
use fireline::strategy::{spiral_scene, SpiralSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::scene_file::Params;
use crate::solver_for;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub scene: String,
    pub check: &'static str,
    pub passed: bool,
    /// The checked quantity; the check is `value <= bound`.
    pub value: f64,
    pub bound: f64,
    pub note: String,
}

impl Row {
    fn le(scene: &str, check: &'static str, value: f64, bound: f64, note: String) -> Self {
        Row { scene: scene.into(), check, passed: value <= bound, value, bound, note }
    }

    fn skipped(scene: &str, check: &'static str, why: &str) -> Self {
        Row { scene: scene.into(), check, passed: true, value: 0.0, bound: 0.0, note: format!("not applicable: {why}") }
    }
}

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Checks that apply to any scene. `slack` is added to every bound.
pub fn scene_rows(name: &str, scene: &Scene, params: &Params, slack: f64, seed: u64) -> anyhow::Result<Vec<Row>> {
    let solver = solver_for(scene, params)?;
    let mut rows = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bb = scene.bbox().expand(1.0);
    let m1 = scene.barrier.total_length;
    let connected = complement_connected(scene);

    if connected {
        let worst = (0..200)
            .map(|_| {
                let x = p(rng.random_range(bb.min.x..bb.max.x), rng.random_range(bb.min.y..bb.max.y));
                solver.min_time(x) - scene.dist_to_initial(x)
            })
            .fold(0.0, f64::max);
        rows.push(Row::le(name, "loop-around", worst, m1 + slack, "max T - d over 200 probes".into()));
    } else {
        rows.push(Row::skipped(name, "loop-around", "barrier encloses a region"));
    }

    let sampling = SamplingConfig { per_unit_length: params.samples_per_unit, min_per_segment: params.min_samples };
    let profile = phi_profile_with(&solver, sampling);
    let tol = 2.0 * profile.resolution + 1e-9 + slack;
    let mut excess = f64::NEG_INFINITY;
    let mut open = 0;
    for (ci, c) in profile.components.iter().zip(&scene.barrier.components) {
        if ci.a.is_finite() && ci.b.is_finite() {
            excess = excess.max(ci.b - ci.a - c.length);
        } else {
            open += 1;
        }
    }
    if excess.is_finite() {
        let note = format!("max (b - a) - length over components, {open} never surrounded");
        rows.push(Row::le(name, "touch-interval", excess, tol, note));
    } else {
        rows.push(Row::skipped(name, "touch-interval", "no component is surrounded"));
    }

    let h = params.grid_h.max(bb.diagonal() / 200.0);
    let field = GridField::from_solver(&solver, bb, h);
    let t_max = field.times.iter().copied().filter(|t| t.is_finite()).fold(0.0, f64::max);
    let mut failed = 0;
    let mut checked = 0;
    for _ in 0..5 {
        let a = rng.random_range(0.0..0.7 * t_max.max(1e-9));
        let b = a + rng.random_range(0.0..0.3 * t_max.max(1e-9));
        let r = unit_expansion_check(&field, a, b, &profile, 2.0 * h + slack);
        checked += r.checked;
        failed += usize::from(!r.passed);
    }
    rows.push(Row::le(name, "unit-expansion", failed as f64, 0.0, format!("failing time pairs of 5, {checked} node checks, h {h}")));

    if connected {
        let r = rho_integral_report(&solver, params.rho_samples, seed)?;
        let note = format!("rhs - lhs vs 3 stderr, {} samples", r.samples);
        rows.push(Row::le(name, "final-leg-integral", r.rhs - r.lhs, 3.0 * r.stderr + slack, note));
        rows.push(Row::le(name, "final-leg-horizon", r.t_hat, 1.0 + m1 + 1e-6 + slack, "largest T within unit distance of the source".into()));
    } else {
        rows.push(Row::skipped(name, "final-leg-integral", "barrier encloses a region"));
    }
    Ok(rows)
}

fn sweep_instance(rng: &mut ChaCha8Rng, n: usize, t_lo: f64, width: f64, len: (f64, f64)) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    while out.len() < n {
        let t = rng.random_range(t_lo..0.9);
        let x = rng.random_range(-width..width);
        let th: f64 = rng.random_range(-1.3..1.3);
        let l = rng.random_range(len.0..len.1);
        let s = Segment { a: p(t, x), b: p(t + l * th.cos(), x + l * th.sin()) };
        if out.iter().all(|o| segments_cross(o, &s) == Crossing::Disjoint) {
            out.push(s);
        }
    }
    out
}

/// Seeded random instances for the sweep and detour checks. With `empty`
/// every instance has no barrier.
pub fn sweep_rows(empty: bool, slack: f64, seed: u64) -> anyhow::Result<Vec<Row>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = if empty { "no barrier" } else { "random" };
    let count = |rng: &mut ChaCha8Rng, hi: usize| if empty { 0 } else { rng.random_range(1..=hi) };
    let mut rows = Vec::new();

    let (mut min_f, mut rising, mut used) = (f64::INFINITY, true, 0);
    for _ in 0..200 {
        if used == 20 {
            break;
        }
        let n = count(&mut rng, 4);
        let s = sweep_instance(&mut rng, n, 0.05, 0.3, (0.01, 0.05));
        let rep = sunrise_margin(&attainable_sweep(&s, 0.3, 1.0, SweepMode::Symmetric)?);
        if rep.hypothesis_holds {
            used += 1;
            rising &= rep.positive_nondecreasing == Some(true);
            min_f = min_f.min(rep.min_f);
        }
    }
    let mut row = Row::le(name, "sunrise-margin", -min_f, slack, format!("{used} instances, all nondecreasing: {rising}"));
    row.passed &= rising;
    rows.push(row);

    let mut worst = f64::NEG_INFINITY;
    used = 0;
    for _ in 0..400 {
        if used == 20 {
            break;
        }
        let n = count(&mut rng, 3);
        let s = sweep_instance(&mut rng, n, 0.3, 0.3, (0.005, 0.03));
        let h: f64 = s.iter().map(Segment::length).sum();
        if h > 0.1 {
            continue;
        }
        let r = attainable_sweep(&s, 0.3, 1.0, SweepMode::Wide)?;
        // ψ(t) ≤ εt/2 checked at the breakpoints of ψ
        let ok = s.iter().flat_map(|q| [q.a.x, q.b.x]).all(|t| {
            let psi: f64 = s
                .iter()
                .map(|q| {
                    let (a, b) = (q.a.x.min(q.b.x), q.a.x.max(q.b.x));
                    q.length() * ((t.min(b) - a) / (b - a)).clamp(0.0, 1.0)
                })
                .sum();
            psi <= 0.15 * t
        });
        if !ok {
            continue;
        }
        used += 1;
        worst = worst.max(2.0 * h - r.measure_within(1.0, 0.0, 3.0 * h));
    }
    rows.push(Row::le(name, "wide-overlap", worst, slack, format!("2h - overlap, {used} instances")));

    worst = f64::NEG_INFINITY;
    used = 0;
    let (pp, q, eps) = (p(-1.0, 0.0), p(1.0, 0.0), 0.1);
    for _ in 0..200 {
        if used == 10 {
            break;
        }
        let n = if empty { 0 } else { 20 };
        let mut segs: Vec<Segment> = Vec::new();
        while segs.len() < n {
            let c = p(rng.random_range(-0.7..0.7), rng.random_range(-0.06..0.06));
            let a: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let d = p(a.cos(), a.sin()) * 0.00125;
            let s = Segment::new(c - d, c + d)?;
            if segs.iter().all(|t| segments_cross(&s, t) == Crossing::Disjoint) {
                segs.push(s);
            }
        }
        if !detour_hypotheses(&segs, 1.0, eps).hold() {
            continue;
        }
        let scene = Scene::new(vec![Disc::new(pp, 0.02)?], &segs, 2.0, 0.0)?;
        let path = sparse_detour(pp, q, &scene.barrier, eps)?;
        used += 1;
        worst = worst.max(path.length - (2.0 + 9.0 * eps * scene.barrier.total_length));
    }
    rows.push(Row::le(name, "detour-length", worst, slack, format!("length - (2 kappa + 9 eps m1), {used} instances")));
    Ok(rows)
}

pub fn bundled_scenes(seed: u64) -> anyhow::Result<Vec<(String, Scene)>> {
    let unit = || vec![Disc::new(p(0.0, 0.0), 1.0).unwrap()];
    let corner = Scene::new(unit(), &[Segment::new(p(2.0, -1.0), p(2.0, 1.0))?], 2.5, 0.0)?;
    let radial = Scene::new(unit(), &[Segment::new(p(2.0, 0.0), p(3.0, 0.0))?], 2.5, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dust: Vec<Segment> = Vec::new();
    while dust.len() < 15 {
        let c = p(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        if c.norm() < 1.05 || c.norm() > 1.95 {
            continue;
        }
        let a: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let d = p(a.cos(), a.sin()) * 0.01;
        let s = Segment::new(c - d, c + d)?;
        if dust.iter().all(|t| segments_cross(&s, t) == Crossing::Disjoint) {
            dust.push(s);
        }
    }
    let dust = Scene::new(unit(), &dust, 2.5, 0.0)?;
    let spiral = spiral_scene(&SpiralSpec::new(0.1, 2.5)?.with_points(400), 1.0)?;
    Ok(vec![
        ("corner".into(), corner),
        ("radial".into(), radial),
        ("sparse dust".into(), dust),
        ("spiral".into(), spiral),
    ])
}

pub fn table(rows: &[Row]) -> String {
    let mut s = format!("{:<6} {:<12} {:<20} {:>12} {:>12}  note\n", "result", "scene", "check", "value", "bound");
    for r in rows {
        s.push_str(&format!(
            "{:<6} {:<12} {:<20} {:>12.4e} {:>12.4e}  {}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.scene,
            r.check,
            r.value,
            r.bound,
            r.note
        ));
    }
    s
}
