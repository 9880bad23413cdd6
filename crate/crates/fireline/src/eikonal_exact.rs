//! Exact minimum-time function for polygonal barriers.
//!
//! Optimal fire paths are polylines that start on the boundary of the initial
//! set and bend only at barrier vertices. The solver runs Dijkstra over
//! (vertex, reflex sector) pairs; a path may only bend at a vertex inside the
//! sector on the open side of the barrier, which keeps the two sides of a wall
//! apart even though they share the same vertex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{orient, polygon_hausdorff_bound, segments_cross, Crossing, polygonalize_disc, Disc, Point, Scene, Segment, Sides};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("point {0} is not reachable by the fire")]
    Unreachable(Point),
    #[error("barrier splits the plane into {faces} bounded faces; the complement must be connected")]
    DisconnectedComplement { faces: usize },
    #[error("source polygon needs at least 8 vertices, got {0}")]
    SourceResolution(usize),
    #[error("sample count must be positive")]
    NoSamples,
}

/// How the initial discs are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum SourceModel {
    /// Exact circles.
    #[default]
    Analytic,
    /// Inscribed regular polygons with this many vertices.
    Polygon(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverConfig {
    pub source: SourceModel,
    /// Relative tolerance for treating two path lengths as equal.
    pub cotol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { source: SourceModel::Analytic, cotol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
enum Source {
    Circle(Disc),
    Polygon { disc: Disc, verts: Vec<Point> },
}

impl Source {
    fn disc(&self) -> &Disc {
        match self {
            Source::Circle(d) | Source::Polygon { disc: d, .. } => d,
        }
    }

    fn contains(&self, p: Point) -> bool {
        match self {
            Source::Circle(d) => d.contains(p),
            Source::Polygon { verts, .. } => {
                let n = verts.len();
                (0..n).all(|i| orient(verts[i], verts[(i + 1) % n], p) >= 0)
            }
        }
    }

    fn nearest(&self, p: Point) -> (Point, f64) {
        match self {
            Source::Circle(d) => {
                let v = p - d.center;
                let n = v.norm();
                if n <= d.radius {
                    (p, 0.0)
                } else {
                    (d.center + v * (d.radius / n), n - d.radius)
                }
            }
            Source::Polygon { verts, .. } => {
                if self.contains(p) {
                    return (p, 0.0);
                }
                let n = verts.len();
                let mut best = (verts[0], f64::INFINITY);
                for i in 0..n {
                    let s = Segment { a: verts[i], b: verts[(i + 1) % n] };
                    let c = s.closest_point(p);
                    let d = c.dist(p);
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                best
            }
        }
    }

    /// Points where the segment meets the source boundary.
    fn boundary_hits(&self, s: &Segment) -> Vec<Point> {
        match self {
            Source::Circle(d) => {
                let dir = s.direction();
                let f = s.a - d.center;
                let a = dir.dot(dir);
                let b = 2.0 * f.dot(dir);
                let c = f.dot(f) - d.radius * d.radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return vec![];
                }
                let sq = disc.sqrt();
                [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
                    .into_iter()
                    .filter(|u| (0.0..=1.0).contains(u))
                    .map(|u| s.at(u))
                    .collect()
            }
            Source::Polygon { verts, .. } => {
                let n = verts.len();
                let mut out = Vec::new();
                for i in 0..n {
                    let e = Segment { a: verts[i], b: verts[(i + 1) % n] };
                    if crate::geometry::segments_cross(s, &e) != crate::geometry::Crossing::Disjoint {
                        if let Some(x) = crate::geometry::line_intersection(s, &e) {
                            out.push(e.closest_point(x));
                        } else {
                            out.push(e.closest_point(s.a));
                            out.push(e.closest_point(s.b));
                        }
                    }
                }
                out
            }
        }
    }

    fn tangent_at(&self, y: Point) -> Point {
        (y - self.disc().center).perp().unit()
    }

    /// `y` moved a hair toward the disc center, so that a leg starting there
    /// cannot slip through a barrier vertex sitting on the boundary.
    fn pull_in(&self, y: Point) -> Point {
        let d = self.disc();
        y.lerp(d.center, 1e-12)
    }
}

const HIT: usize = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Wedge {
    All,
    /// Closed sector swept counterclockwise from the ray toward `from` to the
    /// ray toward `to`; its opening exceeds a half turn.
    Reflex { from: Point, to: Point },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub pos: Point,
    wedge: Wedge,
}

impl Node {
    /// Sides of the line from the node toward `x` that lie in its sector when
    /// that line runs along one of the sector's bounding rays.
    fn leaving_sides(&self, x: Point) -> Sides {
        match self.wedge {
            Wedge::All => Sides::BOTH,
            Wedge::Reflex { from, to } => {
                let v = self.pos;
                let along = |r: Point| orient(v, r, x) == 0 && (r - v).dot(x - v) > 0.0;
                if along(from) {
                    Sides::LEFT
                } else if along(to) {
                    Sides::RIGHT
                } else {
                    Sides::BOTH
                }
            }
        }
    }

    /// Same for a line arriving at the node from `x`, relative to the direction of travel.
    fn arriving_sides(&self, x: Point) -> Sides {
        let s = self.leaving_sides(x);
        Sides { left: s.right, right: s.left }
    }

    /// Whether direction `x - pos` lies in the node's sector.
    fn admits(&self, x: Point) -> bool {
        match self.wedge {
            Wedge::All => true,
            Wedge::Reflex { from, to } => {
                let v = self.pos;
                !(orient(v, to, x) > 0 && orient(v, x, from) > 0)
            }
        }
    }
}

/// Predecessor of a point on an optimal path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Pred {
    Source(Point),
    Node(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub vertices: Vec<Point>,
    pub times: Vec<f64>,
    pub total_time: f64,
}

#[derive(Clone, Debug)]
pub struct TimeSolver {
    scene: Scene,
    config: SolverConfig,
    sources: Vec<Source>,
    hits: Vec<(usize, Point)>,
    nodes: Vec<Node>,
    times: Vec<f64>,
    preds: Vec<Vec<(f64, Pred)>>,
    /// Radius of the wall neighbourhood tested first in each query.
    near: f64,
}

fn reflex_wedges(v: Point, rays: &[Point]) -> Vec<Wedge> {
    match rays.len() {
        0 => vec![],
        1 => vec![Wedge::All],
        _ => {
            let mut r = rays.to_vec();
            r.sort_by(|a, b| {
                let (da, db) = (*a - v, *b - v);
                da.y.atan2(da.x).total_cmp(&db.y.atan2(db.x))
            });
            let k = r.len();
            (0..k)
                .filter_map(|i| {
                    let (a, b) = (r[i], r[(i + 1) % k]);
                    // a clockwise turn from one ray to the next is a gap wider than a half turn
                    (orient(v, a, b) < 0).then_some(Wedge::Reflex { from: a, to: b })
                })
                .collect()
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

impl TimeSolver {
    pub fn build(scene: &Scene) -> Self {
        Self::with_config(scene, SolverConfig::default()).expect("default configuration is valid")
    }

    pub fn with_config(scene: &Scene, config: SolverConfig) -> Result<Self, ExactError> {
        let sources: Vec<Source> = scene
            .initial
            .iter()
            .map(|d| match config.source {
                SourceModel::Analytic => Ok(Source::Circle(*d)),
                SourceModel::Polygon(n) => {
                    if n < 8 {
                        return Err(ExactError::SourceResolution(n));
                    }
                    let verts = polygonalize_disc(d, n).expect("n >= 8").points;
                    Ok(Source::Polygon { disc: *d, verts })
                }
            })
            .collect::<Result<_, _>>()?;

        let barrier = &scene.barrier;
        let mut hits = Vec::new();
        for (k, src) in sources.iter().enumerate() {
            for s in barrier.segments() {
                for y in src.boundary_hits(s) {
                    let t = src.tangent_at(y) * (src.disc().radius * 1e-9);
                    hits.push((k, y + t));
                    hits.push((k, y - t));
                }
            }
        }

        let mut nodes = Vec::new();
        for v in barrier.endpoints() {
            for w in reflex_wedges(v, &barrier.rays_at(v)) {
                nodes.push(Node { pos: v, wedge: w });
            }
        }

        let mut solver = TimeSolver {
            scene: scene.clone(),
            config,
            sources,
            hits,
            times: vec![f64::INFINITY; nodes.len()],
            preds: vec![Vec::new(); nodes.len()],
            near: 1e-4 * scene.diameter().max(1.0),
            nodes,
        };
        solver.run_dijkstra();
        Ok(solver)
    }

    /// All direct source legs into `x`, as (length, start point, source).
    /// Points next to a barrier crossing the boundary are tagged with
    /// `HIT` added to the source index; they are already off the barrier.
    fn source_candidates(&self, x: Point) -> Vec<(f64, Point, usize)> {
        let mut out = Vec::new();
        for (k, s) in self.sources.iter().enumerate() {
            let (y, d) = s.nearest(x);
            out.push((d, y, k));
            if let Source::Polygon { verts, .. } = s {
                out.extend(verts.iter().map(|&v| (v.dist(x), v, k)));
            }
        }
        out.extend(self.hits.iter().map(|&(k, y)| (y.dist(x), y, k + HIT)));
        out
    }

    fn source_leg_ok(&self, y: Point, k: usize, x: Point) -> bool {
        if k >= HIT {
            return self.scene.barrier.visible(y, x);
        }
        self.scene.barrier.visible(self.sources[k].pull_in(y), x)
    }

    fn source_leg_into(&self, y: Point, k: usize, node: Node) -> bool {
        let y = if k >= HIT { y } else { self.sources[k].pull_in(y) };
        self.scene.barrier.visible_sided(y, node.pos, Sides::BOTH, node.arriving_sides(y))
    }

    fn tol(&self, v: f64) -> f64 {
        v * (1.0 + self.config.cotol) + 1e-15
    }

    fn run_dijkstra(&mut self) {
        let n = self.nodes.len();
        let mut heap = BinaryHeap::new();
        let init: Vec<(f64, Vec<(f64, Pred)>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let node = self.nodes[i];
                if self.sources.iter().any(|s| s.contains(node.pos)) {
                    return (0.0, vec![(0.0, Pred::Source(node.pos))]);
                }
                let mut c = self.source_candidates(node.pos);
                c.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut best = f64::INFINITY;
                let mut preds = Vec::new();
                for (d, y, k) in c {
                    if d > self.tol(best) {
                        break;
                    }
                    if node.admits(y) && self.source_leg_into(y, k, node) {
                        best = best.min(d);
                        preds.push((d, Pred::Source(y)));
                    }
                }
                (best, preds)
            })
            .collect();
        for (i, (t, p)) in init.into_iter().enumerate() {
            self.times[i] = t;
            self.preds[i] = p;
            if t.is_finite() {
                heap.push(HeapItem(t, i));
            }
        }
        let mut done = vec![false; n];
        while let Some(HeapItem(t, v)) = heap.pop() {
            if done[v] || t > self.times[v] {
                continue;
            }
            done[v] = true;
            let nv = self.nodes[v];
            let updates: Vec<(usize, f64)> = (0..n)
                .into_par_iter()
                .filter_map(|w| {
                    if done[w] {
                        return None;
                    }
                    let nw = self.nodes[w];
                    let cand = t + nv.pos.dist(nw.pos);
                    if cand > self.tol(self.times[w]) || nw.pos == nv.pos {
                        return None;
                    }
                    (nv.admits(nw.pos)
                        && nw.admits(nv.pos)
                        && self.scene.barrier.visible_sided(nv.pos, nw.pos, nv.leaving_sides(nw.pos), nw.arriving_sides(nv.pos)))
                        .then_some((w, cand))
                })
                .collect();
            for (w, cand) in updates {
                if cand < self.times[w] {
                    self.times[w] = cand;
                    let lim = self.tol(cand);
                    self.preds[w].retain(|p| p.0 <= lim);
                    heap.push(HeapItem(cand, w));
                }
                self.preds[w].push((cand, Pred::Node(v)));
            }
        }
        for p in &mut self.preds {
            p.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        for i in 0..n {
            let lim = self.tol(self.times[i]);
            self.preds[i].retain(|p| p.0 <= lim);
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn config(&self) -> SolverConfig {
        self.config
    }

    pub fn nodes(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.nodes.iter().zip(&self.times).map(|(n, &t)| (n.pos, t))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Upper bound on how far the source representation is from the true
    /// initial set, in units of time.
    pub fn source_error_bound(&self) -> f64 {
        match self.config.source {
            SourceModel::Analytic => 0.0,
            SourceModel::Polygon(n) => self
                .scene
                .initial
                .iter()
                .map(|d| polygon_hausdorff_bound(d.radius, n))
                .fold(0.0, f64::max),
        }
    }

    fn in_source(&self, x: Point) -> bool {
        self.sources.iter().any(|s| s.contains(x))
    }

    /// Optimal predecessors of `x`: the minimum time and every candidate whose
    /// value ties it within the co-optimality tolerance. With `all` unset the
    /// search stops at the first optimal candidate.
    fn optimal_preds(&self, x: Point, all: bool) -> (f64, Vec<(f64, Pred)>) {
        if self.in_source(x) {
            return (0.0, vec![(0.0, Pred::Source(x))]);
        }
        let mut srcs = self.source_candidates(x);
        srcs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if !all {
            // the nearest source point bounds every path from below
            let (d, y, k) = srcs[0];
            if self.source_leg_ok(y, k, x) {
                return (d, vec![(d, Pred::Source(y))]);
            }
        }
        let mut cands: Vec<(f64, Pred, usize)> = srcs.into_iter().map(|(d, y, k)| (d, Pred::Source(y), k)).collect();
        for (i, node) in self.nodes.iter().enumerate() {
            let t = self.times[i];
            if t.is_finite() && node.pos != x && node.admits(x) {
                cands.push((t + node.pos.dist(x), Pred::Node(i), 0));
            }
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        // walls right next to x reject most hopeless legs cheaply
        let near = self.scene.barrier.segments_near(x, self.near);
        let mut best = f64::INFINITY;
        let mut out = Vec::new();
        for (val, pred, k) in cands {
            if val > self.tol(best) {
                break;
            }
            let ok = match pred {
                Pred::Source(y) => self.source_leg_ok(y, k, x),
                Pred::Node(i) => {
                    let n = self.nodes[i];
                    let leg = Segment { a: n.pos, b: x };
                    !near.iter().any(|s| segments_cross(&leg, s) == Crossing::InteriorCross)
                        && self.scene.barrier.visible_sided(n.pos, x, n.leaving_sides(x), Sides::BOTH)
                }
            };
            if ok {
                best = best.min(val);
                out.push((val, pred));
                if !all {
                    break;
                }
            }
        }
        (best, out)
    }

    /// Minimum time for the fire to reach `x`; infinite when `x` is cut off.
    /// Points on the barrier get the value of the closure of the reachable
    /// sets, the smaller of the two sides.
    pub fn min_time(&self, x: Point) -> f64 {
        self.optimal_preds(x, false).0
    }

    fn pred_pos(&self, p: Pred) -> Point {
        match p {
            Pred::Source(y) => y,
            Pred::Node(i) => self.nodes[i].pos,
        }
    }

    /// Length of the straight run ending at `x` whose last bend is `p`,
    /// continuing back through collinear optimal predecessors.
    fn straight_run(&self, p: Pred, x: Point) -> (f64, Option<Pred>) {
        let y = self.pred_pos(p);
        let leg = y.dist(x);
        let Pred::Node(i) = p else {
            return (leg, None);
        };
        let dir = (x - y).unit();
        let mut best = (leg, None);
        for &(_, q) in &self.preds[i] {
            let z = self.pred_pos(q);
            let back = (y - z).unit();
            if back.cross(dir).abs() < 1e-9 && back.dot(dir) > 0.0 {
                let (ext, _) = self.straight_run(q, y);
                if leg + ext > best.0 {
                    best = (leg + ext, Some(q));
                }
            }
        }
        best
    }

    /// Length of the final straight leg of optimal paths to `x`, maximized over
    /// all co-optimal paths.
    pub fn rho(&self, x: Point) -> Result<f64, ExactError> {
        let (t, preds) = self.optimal_preds(x, true);
        if !t.is_finite() {
            return Err(ExactError::Unreachable(x));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(preds.iter().map(|&(_, p)| self.straight_run(p, x).0).fold(0.0, f64::max))
    }

    fn pick(&self, preds: &[(f64, Pred)], x: Point) -> Pred {
        let mut best: Option<(f64, Point, Pred)> = None;
        for &(_, p) in preds {
            let run = self.straight_run(p, x).0;
            let pos = self.pred_pos(p);
            let better = match best {
                None => true,
                Some((r, q, _)) => {
                    run > r * (1.0 + self.config.cotol)
                        || (run >= r * (1.0 - self.config.cotol) && (pos.x, pos.y) < (q.x, q.y))
                }
            };
            if better {
                best = Some((run, pos, p));
            }
        }
        best.expect("nonempty").2
    }

    /// An optimal path to `x`, preferring the longest final straight leg.
    pub fn optimal_trajectory(&self, x: Point) -> Result<Trajectory, ExactError> {
        let (t, preds) = self.optimal_preds(x, true);
        if !t.is_finite() {
            return Err(ExactError::Unreachable(x));
        }
        let mut rev = vec![x];
        let mut cur = self.pick(&preds, x);
        let mut here = x;
        loop {
            let pos = self.pred_pos(cur);
            if pos != here {
                rev.push(pos);
            }
            match cur {
                Pred::Source(_) => break,
                Pred::Node(i) => {
                    let (_, straight) = self.straight_run(cur, here);
                    here = pos;
                    cur = match straight {
                        Some(q) => q,
                        None => self.pick(&self.preds[i], pos),
                    };
                }
            }
        }
        rev.reverse();
        let mut times = Vec::with_capacity(rev.len());
        let mut acc = 0.0;
        for (i, v) in rev.iter().enumerate() {
            if i > 0 {
                acc += rev[i - 1].dist(*v);
            }
            times.push(acc);
        }
        Ok(Trajectory { total_time: acc, vertices: rev, times })
    }

    /// Unit vector along the final leg of the preferred optimal path, pointing
    /// in the direction of travel: the gradient of the time function.
    pub fn gradient(&self, x: Point) -> Option<Point> {
        let (t, preds) = self.optimal_preds(x, true);
        if !t.is_finite() || t == 0.0 {
            return None;
        }
        let p = self.pred_pos(self.pick(&preds, x));
        Some((x - p).unit())
    }
}

/// Combines values computed with `n` and `2n` source vertices, cancelling the
/// leading `1/n^2` error term.
pub fn richardson(t_n: f64, t_2n: f64) -> f64 {
    t_2n + (t_2n - t_n) / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoIntegralReport {
    pub lhs: f64,
    pub rhs: f64,
    pub t_hat: f64,
    /// Standard error of `lhs - rhs` across independent randomized shifts.
    pub stderr: f64,
    pub samples: usize,
    pub barrier_length: f64,
    pub t_hat_bound_holds: bool,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let inv = 1.0 / base as f64;
    while i > 0 {
        f *= inv;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Integrals of `rho` and of the distance to the initial set over the unit
/// neighborhood of the initial set, by randomly shifted Halton points.
pub fn rho_integral_report(solver: &TimeSolver, samples: usize, seed: u64) -> Result<RhoIntegralReport, ExactError> {
    if samples == 0 {
        return Err(ExactError::NoSamples);
    }
    let faces = solver.scene.barrier.bounded_faces();
    if faces > 0 {
        return Err(ExactError::DisconnectedComplement { faces });
    }
    const SHIFTS: usize = 8;
    let per = samples.div_ceil(SHIFTS);
    let scene = &solver.scene;
    let bb = scene
        .initial
        .iter()
        .fold(crate::geometry::BBox::empty(), |b, d| {
            b.union(&crate::geometry::BBox::from_points([d.center]).expand(d.radius + 1.0))
        });
    let (w, h) = (bb.max.x - bb.min.x, bb.max.y - bb.min.y);
    let area = w * h;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<(f64, f64)> = (0..SHIFTS).map(|_| (rng.random(), rng.random())).collect();

    // per shift: (integral of rho, integral of d, max T)
    let per_shift: Vec<(f64, f64, f64)> = shifts
        .iter()
        .map(|&(sx, sy)| {
            let vals: Vec<(f64, f64, f64)> = (0..per as u64)
                .into_par_iter()
                .map(|i| {
                    let u = (radical_inverse(i + 1, 2) + sx).fract();
                    let v = (radical_inverse(i + 1, 3) + sy).fract();
                    let x = Point::new(bb.min.x + u * w, bb.min.y + v * h);
                    let d = scene.dist_to_initial(x);
                    if d > 1.0 {
                        return (0.0, 0.0, 0.0);
                    }
                    let t = solver.min_time(x);
                    let r = if t == 0.0 { 0.0 } else { solver.rho(x).unwrap_or(0.0) };
                    (r, d, t)
                })
                .collect();
            let (mut sr, mut sd, mut mt) = (0.0, 0.0, 0.0f64);
            for (r, d, t) in vals {
                sr += r;
                sd += d;
                mt = mt.max(t);
            }
            (sr * area / per as f64, sd * area / per as f64, mt)
        })
        .collect();

    let m1 = scene.barrier.total_length;
    let t_hat = per_shift.iter().map(|s| s.2).fold(0.0, f64::max);
    let penalty = (t_hat * t_hat + t_hat) / 2.0 * m1;
    let lhs = per_shift.iter().map(|s| s.0).sum::<f64>() / SHIFTS as f64;
    let dint = per_shift.iter().map(|s| s.1).sum::<f64>() / SHIFTS as f64;
    let diffs: Vec<f64> = per_shift.iter().map(|s| s.0 - s.1).collect();
    let mean = diffs.iter().sum::<f64>() / SHIFTS as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (SHIFTS - 1) as f64;
    Ok(RhoIntegralReport {
        lhs,
        rhs: dint - penalty,
        t_hat,
        stderr: (var / SHIFTS as f64).sqrt(),
        samples: per * SHIFTS,
        barrier_length: m1,
        t_hat_bound_holds: t_hat <= 1.0 + m1 + 1e-6,
    })
}

#[cfg(test)]
mod tests;
