//! Lattice Dijkstra for the minimum-time function.
//!
//! Nodes sit at cell centers of a global lattice of spacing `h`; each node is
//! joined to its order-`k` neighbors (8, 16 or 32 of them). An edge is
//! removed when the barrier blocks it, using the same crossing rule as the
//! exact solver, so walls stay perfectly thin. On a plain lattice, straight
//! runs are confined to the stencil directions, which inflates path lengths by
//! at most the metrication factor of the stencil. By default every node also
//! remembers its line-of-sight parent and relaxes through it, in the manner of
//! any-angle planners, which removes most of that bias in open space.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eikonal_exact::TimeSolver;
use crate::geometry::{BBox, Barrier, Point, Polyline, Scene};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("stencil order must be 1, 2 or 3, got {0}")]
    BadOrder(usize),
    #[error("grid of {nx} x {ny} nodes exceeds the cap of {cap} nodes")]
    TooLarge { nx: usize, ny: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub order: usize,
    /// The domain is the scene box grown by this factor times
    /// (scene diameter + barrier length).
    pub margin_factor: f64,
    pub max_nodes: usize,
    /// Explicit domain; overrides the margin rule.
    #[serde(skip)]
    pub domain: Option<BBox>,
    /// Relax through each node's line-of-sight parent as well as through the
    /// node itself, so free-space runs are not bound to stencil directions.
    pub any_angle: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { order: 2, margin_factor: 1.5, max_nodes: 16_000_000, domain: None, any_angle: true }
    }
}

/// Primitive lattice steps in the first octant, up to order `k`.
fn octant_steps(k: usize) -> Vec<(i32, i32)> {
    let mut v = vec![(1, 0), (1, 1)];
    if k >= 2 {
        v.push((2, 1));
    }
    if k >= 3 {
        v.push((3, 1));
        v.push((3, 2));
    }
    v
}

/// All stencil offsets of order `k`.
pub fn stencil(k: usize) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for (a, b) in octant_steps(k) {
        for (x, y) in [(a, b), (b, a)] {
            for (sx, sy) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let o = (x * sx, y * sy);
                if !out.contains(&o) {
                    out.push(o);
                }
            }
        }
    }
    out
}

/// Worst ratio of the best stencil path length to the straight-line length.
/// A direction between two neighboring stencil directions at angle `g` apart
/// is covered with overshoot `1/cos(g/2)` at most.
pub fn metrication_factor(k: usize) -> f64 {
    let mut ang: Vec<f64> = stencil(k).iter().map(|&(x, y)| (y as f64).atan2(x as f64)).collect();
    ang.sort_by(f64::total_cmp);
    let n = ang.len();
    (0..n)
        .map(|i| {
            let g = if i + 1 < n { ang[i + 1] - ang[i] } else { ang[0] + 2.0 * std::f64::consts::PI - ang[i] };
            1.0 / (g / 2.0).cos()
        })
        .fold(1.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridField {
    /// Corner of the lattice; node `(i, j)` sits at `origin + ((i+1/2) h, (j+1/2) h)`.
    pub origin: Point,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub times: Vec<f64>,
    pub order: usize,
    pub metrication: f64,
}

impl GridField {
    pub fn node(&self, i: usize, j: usize) -> Point {
        Point::new(self.origin.x + (i as f64 + 0.5) * self.h, self.origin.y + (j as f64 + 0.5) * self.h)
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.times[j * self.nx + i]
    }

    pub fn bbox(&self) -> BBox {
        BBox {
            min: self.origin,
            max: Point::new(self.origin.x + self.nx as f64 * self.h, self.origin.y + self.ny as f64 * self.h),
        }
    }

    /// Nearest node indices, clamped to the grid.
    pub fn locate(&self, p: Point) -> (usize, usize) {
        let fi = ((p.x - self.origin.x) / self.h - 0.5).round();
        let fj = ((p.y - self.origin.y) / self.h - 0.5).round();
        (fi.clamp(0.0, (self.nx - 1) as f64) as usize, fj.clamp(0.0, (self.ny - 1) as f64) as usize)
    }

    /// Lattice values sampled from any time function.
    pub fn from_fn<F>(origin: Point, h: f64, nx: usize, ny: usize, f: F) -> Self
    where
        F: Fn(Point) -> f64 + Sync,
    {
        let mut g = GridField { origin, h, nx, ny, times: vec![], order: 0, metrication: 1.0 };
        g.times = (0..nx * ny).into_par_iter().map(|k| f(g.node(k % nx, k / nx))).collect();
        g
    }

    /// The exact time function sampled on a lattice covering `domain`.
    pub fn from_solver(solver: &TimeSolver, domain: BBox, h: f64) -> Self {
        let (origin, nx, ny) = lattice_for(&domain, h);
        Self::from_fn(origin, h, nx, ny, |p| solver.min_time(p))
    }

    /// Time at an arbitrary point: the best visible nearby node plus the
    /// straight distance to it.
    pub fn probe(&self, x: Point, scene: &Scene) -> f64 {
        if scene.in_initial(x) {
            return 0.0;
        }
        let (ci, cj) = self.locate(x);
        let r = self.order.max(1) as i64 + 1;
        let mut best = f64::INFINITY;
        for dj in -r..=r {
            for di in -r..=r {
                let (i, j) = (ci as i64 + di, cj as i64 + dj);
                if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                    continue;
                }
                let (i, j) = (i as usize, j as usize);
                let t = self.at(i, j);
                let q = self.node(i, j);
                let v = t + q.dist(x);
                if v < best && scene.barrier.visible(q, x) {
                    best = v;
                }
            }
        }
        best
    }

    /// Contours of `{T = t}` by marching squares, chained into polylines.
    pub fn level_set(&self, t: f64) -> Vec<Polyline> {
        level_set(self, t)
    }

    /// Row-major CSV with a header line carrying the lattice geometry.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# origin_x={:.17e} origin_y={:.17e} h={:.17e} nx={} ny={}", self.origin.x, self.origin.y, self.h, self.nx, self.ny);
        for j in 0..self.ny {
            let row: Vec<String> = (0..self.nx)
                .map(|i| {
                    let v = self.at(i, j);
                    if v.is_finite() { format!("{v:.17e}") } else { "inf".into() }
                })
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Lattice corner and node counts for nodes covering `domain` on the global
/// lattice of spacing `h`.
pub fn lattice_for(domain: &BBox, h: f64) -> (Point, usize, usize) {
    let i0 = (domain.min.x / h).floor();
    let j0 = (domain.min.y / h).floor();
    let i1 = (domain.max.x / h).ceil();
    let j1 = (domain.max.y / h).ceil();
    let origin = Point::new(i0 * h, j0 * h);
    (origin, ((i1 - i0) as usize).max(1), ((j1 - j0) as usize).max(1))
}

#[derive(PartialEq)]
struct Item(f64, u32);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

/// Marks nodes closer than `reach` to some barrier segment. Edges from
/// unmarked nodes cannot meet the barrier.
fn near_barrier(barrier: &Barrier, origin: Point, h: f64, nx: usize, ny: usize, reach: f64) -> Vec<bool> {
    let mut near = vec![false; nx * ny];
    for s in barrier.segments() {
        let bb = s.bbox().expand(reach);
        let i0 = (((bb.min.x - origin.x) / h - 0.5).floor().max(0.0)) as usize;
        let j0 = (((bb.min.y - origin.y) / h - 0.5).floor().max(0.0)) as usize;
        let i1 = (((bb.max.x - origin.x) / h - 0.5).ceil().max(0.0) as usize).min(nx.saturating_sub(1));
        let j1 = (((bb.max.y - origin.y) / h - 0.5).ceil().max(0.0) as usize).min(ny.saturating_sub(1));
        if i0 >= nx || j0 >= ny {
            continue;
        }
        for j in j0..=j1 {
            for i in i0..=i1 {
                let p = Point::new(origin.x + (i as f64 + 0.5) * h, origin.y + (j as f64 + 0.5) * h);
                if s.dist_to_point(p) <= reach {
                    near[j * nx + i] = true;
                }
            }
        }
    }
    near
}

pub fn solve_grid(scene: &Scene, h: f64, order: usize) -> Result<GridField, GridError> {
    solve_grid_with(scene, h, &GridConfig { order, ..Default::default() })
}

pub fn default_domain(scene: &Scene, margin_factor: f64) -> BBox {
    let m = margin_factor * (scene.diameter() + scene.barrier.total_length);
    scene.bbox().expand(m)
}

pub fn solve_grid_with(scene: &Scene, h: f64, cfg: &GridConfig) -> Result<GridField, GridError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GridError::BadSpacing(h));
    }
    if !(1..=3).contains(&cfg.order) {
        return Err(GridError::BadOrder(cfg.order));
    }
    let domain = cfg.domain.unwrap_or_else(|| default_domain(scene, cfg.margin_factor));
    let (origin, nx, ny) = lattice_for(&domain, h);
    if nx.saturating_mul(ny) > cfg.max_nodes {
        return Err(GridError::TooLarge { nx, ny, cap: cfg.max_nodes });
    }
    let k = cfg.order;
    let offs = stencil(k);
    let reach = ((k * k + 1) as f64).sqrt() * h * (1.0 + 1e-9);
    let near = near_barrier(&scene.barrier, origin, h, nx, ny, reach);
    let mut g = GridField { origin, h, nx, ny, times: vec![f64::INFINITY; nx * ny], order: k, metrication: metrication_factor(k) };

    // exact values on and near the initial set
    let band = 2.0 * k as f64 * h;
    let init: Vec<(usize, f64, Point)> = (0..nx * ny)
        .into_par_iter()
        .filter_map(|idx| {
            let p = g.node(idx % nx, idx / nx);
            let d = scene.dist_to_initial(p);
            if d == 0.0 {
                return Some((idx, 0.0, p));
            }
            if d > band {
                return None;
            }
            let (y, c) = scene
                .initial
                .iter()
                .map(|disc| {
                    let v = p - disc.center;
                    (disc.center + v * (disc.radius / v.norm()), disc.center)
                })
                .min_by(|a, b| a.0.dist(p).total_cmp(&b.0.dist(p)))
                .expect("nonempty");
            let y = y.lerp(c, 1e-12);
            scene.barrier.visible(y, p).then_some((idx, d, y))
        })
        .collect();
    // line-of-sight parent of every labelled node and the time there
    let mut anchor: Vec<(Point, f64)> = vec![(Point::default(), 0.0); if cfg.any_angle { nx * ny } else { 0 }];
    let mut heap = BinaryHeap::with_capacity(init.len());
    for (idx, t, y) in init {
        g.times[idx] = t;
        if cfg.any_angle {
            anchor[idx] = (y, 0.0);
        }
        heap.push(Item(t, idx as u32));
    }
    let mut done = vec![false; nx * ny];
    let lens: Vec<f64> = offs.iter().map(|&(a, b)| h * ((a * a + b * b) as f64).sqrt()).collect();
    let bar = &scene.barrier;
    while let Some(Item(t, u)) = heap.pop() {
        let u = u as usize;
        if done[u] || t > g.times[u] {
            continue;
        }
        done[u] = true;
        let (ui, uj) = ((u % nx) as i64, (u / nx) as i64);
        let pu = g.node(ui as usize, uj as usize);
        for (o, &len) in offs.iter().zip(&lens) {
            let (vi, vj) = (ui + o.0 as i64, uj + o.1 as i64);
            if vi < 0 || vj < 0 || vi >= nx as i64 || vj >= ny as i64 {
                continue;
            }
            let v = vj as usize * nx + vi as usize;
            if done[v] {
                continue;
            }
            let pv = g.node(vi as usize, vj as usize);
            if cfg.any_angle {
                let (a, ta) = anchor[u];
                let through = ta + a.dist(pv);
                if through < g.times[v] && (bar.is_empty() || bar.visible(a, pv)) {
                    g.times[v] = through;
                    anchor[v] = (a, ta);
                    heap.push(Item(through, v as u32));
                    continue;
                }
            }
            let cand = t + len;
            if cand >= g.times[v] {
                continue;
            }
            if near[u] && !bar.visible(pu, pv) {
                continue;
            }
            g.times[v] = cand;
            if cfg.any_angle {
                anchor[v] = (pu, t);
            }
            heap.push(Item(cand, v as u32));
        }
    }
    Ok(g)
}

/// Contour extraction shared by every lattice field.
pub fn level_set(field: &GridField, t: f64) -> Vec<Polyline> {
    let (nx, ny) = (field.nx, field.ny);
    if nx < 2 || ny < 2 {
        return vec![];
    }
    let val = |i: usize, j: usize| {
        let v = field.at(i, j);
        if v.is_finite() { v - t } else { f64::MAX }
    };
    // edge ids: horizontal edge from (i,j) is 2*(j*nx+i), vertical is that plus 1
    let hid = |i: usize, j: usize| 2 * (j * nx + i);
    let vid = |i: usize, j: usize| 2 * (j * nx + i) + 1;
    let cross = |a: Point, b: Point, va: f64, vb: f64| {
        let s = if va == vb { 0.5 } else { (va / (va - vb)).clamp(0.0, 1.0) };
        a.lerp(b, s)
    };
    let mut pts: HashMap<usize, Point> = HashMap::new();
    let mut segs: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            let inside = v.map(|x| x <= 0.0);
            let case = inside.iter().enumerate().fold(0usize, |c, (k, &b)| c | ((b as usize) << k));
            if case == 0 || case == 15 {
                continue;
            }
            let p = [field.node(i, j), field.node(i + 1, j), field.node(i + 1, j + 1), field.node(i, j + 1)];
            // edges: 0 bottom, 1 right, 2 top, 3 left
            let eid = [hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)];
            let mut point = |e: usize| {
                let (a, b) = [(0, 1), (1, 2), (3, 2), (0, 3)][e];
                let id = eid[e];
                pts.entry(id).or_insert_with(|| cross(p[a], p[b], v[a], v[b]));
                id
            };
            let pairs: &[(usize, usize)] = match case {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 | 10 => {
                    let center = v.iter().map(|x| x.min(1e300)).sum::<f64>() / 4.0;
                    let joined = (center <= 0.0) == (case == 5);
                    if joined { &[(3, 2), (0, 1)] } else { &[(3, 0), (1, 2)] }
                }
                _ => &[],
            };
            for &(a, b) in pairs {
                let (ia, ib) = (point(a), point(b));
                segs.push((ia, ib));
            }
        }
    }
    chain(&segs, &pts)
}

fn chain(segs: &[(usize, usize)], pts: &HashMap<usize, Point>) -> Vec<Polyline> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segs.iter().enumerate() {
        adj.entry(a).or_default().push(k);
        adj.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segs.len()];
    let mut out = Vec::new();
    let walk = |start: usize, used: &mut Vec<bool>| -> Vec<usize> {
        let mut ids = vec![start];
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segs[k];
            cur = if a == cur { b } else { a };
            ids.push(cur);
        }
        ids
    };
    // open chains first, starting at ends of degree one
    let mut ends: Vec<usize> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(&k, _)| k).collect();
    ends.sort_unstable();
    for e in ends {
        if adj[&e].iter().all(|&k| used[k]) {
            continue;
        }
        let ids = walk(e, &mut used);
        out.push(Polyline { points: ids.iter().map(|i| pts[i]).collect(), closed: false });
    }
    for k in 0..segs.len() {
        if used[k] {
            continue;
        }
        let ids = walk(segs[k].0, &mut used);
        let closed = ids.len() > 2 && ids.first() == ids.last();
        let mut points: Vec<Point> = ids.iter().map(|i| pts[i]).collect();
        if closed {
            points.pop();
        }
        out.push(Polyline { points, closed });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub h: Vec<f64>,
    /// `errors[k][p]` is the error at probe `p` for spacing `h[k]`.
    pub errors: Vec<Vec<f64>>,
    pub max_error: Vec<f64>,
    /// Least-squares slope of log(max error) against log(h).
    pub order: f64,
}

/// Lattice error against the exact solver, probe by probe, over a sequence of
/// spacings.
pub fn convergence_report(scene: &Scene, hs: &[f64], probes: &[Point], cfg: &GridConfig) -> Result<ConvergenceReport, GridError> {
    let exact = TimeSolver::build(scene);
    let want: Vec<f64> = probes.iter().map(|&p| exact.min_time(p)).collect();
    let mut errors = Vec::new();
    for &h in hs {
        let g = solve_grid_with(scene, h, cfg)?;
        errors.push(
            probes
                .iter()
                .zip(&want)
                .map(|(&p, &w)| {
                    let v = g.probe(p, scene);
                    if v == w { 0.0 } else { (v - w).abs() }
                })
                .collect::<Vec<f64>>(),
        );
    }
    let max_error: Vec<f64> = errors.iter().map(|e| e.iter().copied().fold(0.0, f64::max)).collect();
    Ok(ConvergenceReport { h: hs.to_vec(), order: fitted_order(hs, &max_error), errors, max_error })
}

/// Slope of the least-squares line through (log h, log err).
pub fn fitted_order(hs: &[f64], errs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs.iter().zip(errs).filter(|(_, &e)| e > 0.0).map(|(&h, &e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
