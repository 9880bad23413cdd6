//! Sparse-barrier detours.
//!
//! Sweeps work in a (t, x) plane. A barrier segment is given as a `Segment`
//! whose points carry `t` in `.x` and `x` in `.y`; every segment must span a
//! positive range of t. The attainable set A(t) is the set of values at time t
//! of paths x(·) with x(0) = 0, slope in a fixed range, whose graph avoids the
//! barrier. It is a finite union of open intervals whose endpoints either move
//! at an extreme slope (free) or slide along a segment (on the barrier).

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{segments_cross, Barrier, Crossing, Point, Segment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetourError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("segment {0} spans no time; pre-rotate it")]
    VerticalSegment(usize),
    #[error("end points coincide")]
    Degenerate,
    #[error("hypotheses fail (small mass {gsm}, strip density {gp1}, cone density {gp11})")]
    Hypothesis { gsm: bool, gp1: bool, gp11: bool },
    #[error("barrier mass near an end point exceeds eps * r at r = {r}")]
    Density { r: f64 },
    #[error("triangle too flat for slope {0}")]
    TriangleTooFlat(f64),
    #[error("no common attainable value from both ends")]
    EmptyOverlap,
    #[error("value {0} is not attainable")]
    NotAttainable(f64),
    #[error("reconstructed leg {0} crosses the barrier")]
    Crossing(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SweepMode {
    /// Slopes in [-ε, ε].
    Symmetric,
    /// Slopes in [ε, 3ε].
    Drift,
    /// Slopes in [-3ε, 3ε].
    Wide,
    /// Slopes in [0, 3ε]: nondecreasing graphs, used to build detours.
    Monotone,
}

impl SweepMode {
    pub fn slopes(self, eps: f64) -> (f64, f64) {
        match self {
            SweepMode::Symmetric => (-eps, eps),
            SweepMode::Drift => (eps, 3.0 * eps),
            SweepMode::Wide => (-3.0 * eps, 3.0 * eps),
            SweepMode::Monotone => (0.0, 3.0 * eps),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Motion {
    Free,
    /// Sliding along barrier segment `i`.
    On(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct End {
    pub x: f64,
    pub motion: Motion,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub a: End,
    pub b: End,
}

/// Attainable set right after the events at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepState {
    pub t: f64,
    pub intervals: Vec<Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
struct Line {
    t0: f64,
    t1: f64,
    x0: f64,
    m: f64,
}

impl Line {
    fn at(&self, t: f64) -> f64 {
        self.x0 + self.m * (t - self.t0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub mode: SweepMode,
    pub eps: f64,
    pub lo: f64,
    pub hi: f64,
    pub horizon: f64,
    pub states: Vec<SweepState>,
    lines: Vec<Line>,
    tol: f64,
}

impl SweepResult {
    fn velocity(&self, e: &End, upper: bool) -> f64 {
        match e.motion {
            Motion::Free => {
                if upper {
                    self.hi
                } else {
                    self.lo
                }
            }
            Motion::On(i) => self.lines[i].m,
        }
    }

    fn state_index(&self, t: f64) -> usize {
        self.states.partition_point(|s| s.t <= t).saturating_sub(1)
    }

    /// Intervals of A(t) as (lower, upper) pairs.
    pub fn intervals_at(&self, t: f64) -> Vec<(f64, f64)> {
        let s = &self.states[self.state_index(t)];
        let dt = t - s.t;
        s.intervals
            .iter()
            .map(|iv| (iv.a.x + self.velocity(&iv.a, false) * dt, iv.b.x + self.velocity(&iv.b, true) * dt))
            .collect()
    }

    pub fn measure_at(&self, t: f64) -> f64 {
        self.intervals_at(t).iter().map(|(a, b)| (b - a).max(0.0)).sum()
    }

    /// m₁(A(t) ∩ [lo, hi]).
    pub fn measure_within(&self, t: f64, lo: f64, hi: f64) -> f64 {
        self.intervals_at(t).iter().map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0)).sum()
    }

    /// Event times with the measure right after each.
    pub fn measure_curve(&self) -> Vec<(f64, f64)> {
        self.states.iter().map(|s| (s.t, s.intervals.iter().map(|iv| iv.b.x - iv.a.x).sum())).collect()
    }

    /// m₁ of the barrier inside the strip [0, t] after shearing by slope `c`
    /// (x ↦ x - c t), which maps the mode's slope range to a symmetric one.
    pub fn sheared_psi(&self, t: f64, c: f64) -> f64 {
        self.lines
            .iter()
            .map(|l| {
                let hi = l.t1.min(t);
                if hi <= l.t0 {
                    0.0
                } else {
                    (hi - l.t0) * (1.0 + (l.m - c) * (l.m - c)).sqrt()
                }
            })
            .sum()
    }

    /// Breakpoints of ψ: segment start and end times.
    fn psi_breaks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.lines.iter().flat_map(|l| [l.t0, l.t1]).filter(|&t| t <= self.horizon).collect();
        v.push(self.horizon);
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// A graph from (0, 0) to (t, y), as vertices (t, x). Walks back through
    /// the event times, at each step taking the flattest admissible slope.
    pub fn backtrack(&self, t: f64, y: f64) -> Result<Vec<(f64, f64)>, DetourError> {
        let mut out = vec![(t, y)];
        let (mut ct, mut cx) = (t, y);
        let mut i = self.state_index(t);
        if self.states[i].t == ct && i > 0 {
            i -= 1;
        }
        loop {
            let s = &self.states[i];
            let dt = ct - s.t;
            // interval containing cx at time ct, evolved from state i
            let mut best: Option<(f64, f64, f64)> = None;
            for iv in &s.intervals {
                let (va, vb) = (self.velocity(&iv.a, false), self.velocity(&iv.b, true));
                let (a1, b1) = (iv.a.x + va * dt, iv.b.x + vb * dt);
                let gap = if cx < a1 { a1 - cx } else if cx > b1 { cx - b1 } else { 0.0 };
                if gap <= 1e3 * self.tol && best.is_none_or(|b| gap < b.2) {
                    best = Some((iv.a.x, iv.b.x, gap));
                }
            }
            let Some((a0, b0, _)) = best else {
                return Err(DetourError::NotAttainable(cx));
            };
            if dt > 0.0 {
                let lo = a0.max(cx - self.hi * dt);
                let hi = b0.min(cx - self.lo * dt);
                if lo > hi + 1e3 * self.tol {
                    return Err(DetourError::NotAttainable(cx));
                }
                // keep clear of endpoints sliding on the barrier
                let margin = (1e-9 * (1.0 + cx.abs())).min((hi - lo).max(0.0) / 4.0);
                let (lo, hi) = (lo + margin, (hi - margin).max(lo + margin));
                let flat = if self.lo <= 0.0 && 0.0 <= self.hi { cx } else if self.lo > 0.0 { cx - self.lo * dt } else { cx - self.hi * dt };
                cx = flat.clamp(lo, hi);
                ct = s.t;
                out.push((ct, cx));
            }
            if i == 0 {
                break;
            }
            i -= 1;
        }
        if ct > 0.0 || cx.abs() > 1e3 * self.tol {
            return Err(DetourError::NotAttainable(y));
        }
        let last = out.len() - 1;
        out[last] = (0.0, 0.0);
        out.reverse();
        out.dedup_by(|b, a| b.0 == a.0);
        Ok(out)
    }
}

fn lines_from(segments: &[Segment], horizon: f64) -> Result<Vec<Line>, DetourError> {
    let mut out = Vec::new();
    for (i, s) in segments.iter().enumerate() {
        let (p, q) = if s.a.x <= s.b.x { (s.a, s.b) } else { (s.b, s.a) };
        if q.x - p.x <= 1e-15 * (1.0 + p.x.abs()) {
            return Err(DetourError::VerticalSegment(i));
        }
        let m = (q.y - p.y) / (q.x - p.x);
        let (t0, t1) = (p.x.max(0.0), q.x.min(horizon));
        if t1 <= t0 {
            continue;
        }
        out.push(Line { t0, t1, x0: p.y + m * (t0 - p.x), m });
    }
    Ok(out)
}

/// Event-driven sweep of the attainable set from (0, 0) up to `horizon`.
pub fn attainable_sweep(segments: &[Segment], eps: f64, horizon: f64, mode: SweepMode) -> Result<SweepResult, DetourError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(DetourError::BadEpsilon(eps));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(DetourError::BadHorizon(horizon));
    }
    let lines = lines_from(segments, horizon)?;
    let (lo, hi) = mode.slopes(eps);
    let scale = lines.iter().fold(1.0f64.max(horizon), |m, l| m.max(l.x0.abs()).max(l.at(l.t1).abs()));
    let tol = 1e-11 * scale;
    let mut res = SweepResult { mode, eps, lo, hi, horizon, states: Vec::new(), lines, tol };
    let mut starts: Vec<usize> = (0..res.lines.len()).collect();
    starts.sort_by(|&i, &j| res.lines[i].t0.total_cmp(&res.lines[j].t0));
    let mut next_start = 0;

    let mut t = 0.0;
    let mut ivs = vec![Interval { a: End { x: 0.0, motion: Motion::Free }, b: End { x: 0.0, motion: Motion::Free } }];
    loop {
        process_events(&res, t, &mut ivs, &starts, &mut next_start);
        res.states.push(SweepState { t, intervals: ivs.clone() });
        if t >= horizon || ivs.is_empty() {
            break;
        }
        let tn = next_event(&res, t, &ivs, &starts, next_start).min(horizon);
        let dt = tn - t;
        for iv in &mut ivs {
            iv.a.x += res.velocity(&iv.a, false) * dt;
            iv.b.x += res.velocity(&iv.b, true) * dt;
        }
        t = tn;
    }
    if res.states.last().is_some_and(|s| s.t < horizon) {
        res.states.push(SweepState { t: horizon, intervals: Vec::new() });
    }
    Ok(res)
}

fn active(l: &Line, t: f64, tol: f64) -> bool {
    l.t0 <= t + tol && l.t1 > t + tol
}

fn next_event(r: &SweepResult, t: f64, ivs: &[Interval], starts: &[usize], next_start: usize) -> f64 {
    let tol = r.tol;
    let mut best = f64::INFINITY;
    if let Some(&i) = starts.get(next_start) {
        best = best.min(r.lines[i].t0);
    }
    for (k, iv) in ivs.iter().enumerate() {
        let (va, vb) = (r.velocity(&iv.a, false), r.velocity(&iv.b, true));
        for e in [&iv.a, &iv.b] {
            if let Motion::On(i) = e.motion {
                best = best.min(r.lines[i].t1);
            }
        }
        if va > vb {
            best = best.min(t + (iv.b.x - iv.a.x).max(0.0) / (va - vb));
        }
        if let Some(nx) = ivs.get(k + 1) {
            let vn = r.velocity(&nx.a, false);
            if vb > vn {
                best = best.min(t + (nx.a.x - iv.b.x).max(0.0) / (vb - vn));
            }
        }
        for l in r.lines.iter().filter(|l| active(l, t, tol)) {
            let d = l.at(t) - iv.b.x;
            if d > tol && l.m < vb {
                let tau = t + d / (vb - l.m);
                if tau <= l.t1 {
                    best = best.min(tau);
                }
            }
            let d = iv.a.x - l.at(t);
            if d > tol && l.m > va {
                let tau = t + d / (l.m - va);
                if tau <= l.t1 {
                    best = best.min(tau);
                }
            }
        }
    }
    best.max(t)
}

fn process_events(r: &SweepResult, t: f64, ivs: &mut Vec<Interval>, starts: &[usize], next_start: &mut usize) {
    let tol = r.tol;
    let touch = 1e2 * tol;
    // segments ending now release their endpoints
    for iv in ivs.iter_mut() {
        for e in [&mut iv.a, &mut iv.b] {
            if let Motion::On(i) = e.motion {
                if r.lines[i].t1 <= t + tol {
                    e.motion = Motion::Free;
                }
            }
        }
    }
    // segments starting inside an interval split it
    while let Some(&i) = starts.get(*next_start) {
        let l = &r.lines[i];
        if l.t0 > t + tol {
            break;
        }
        *next_start += 1;
        if l.t1 <= t + tol {
            continue;
        }
        let xs = l.at(t);
        let mut k = 0;
        while k < ivs.len() {
            let iv = ivs[k];
            let degenerate = iv.b.x - iv.a.x <= touch && xs >= iv.a.x - touch && xs <= iv.b.x + touch;
            if degenerate || (xs > iv.a.x + touch && xs < iv.b.x - touch) {
                let lower = Interval {
                    a: iv.a,
                    b: End { x: xs, motion: if l.m < r.hi { Motion::On(i) } else { Motion::Free } },
                };
                let upper = Interval {
                    a: End { x: xs, motion: if l.m > r.lo { Motion::On(i) } else { Motion::Free } },
                    b: iv.b,
                };
                ivs[k] = lower;
                ivs.insert(k + 1, upper);
                break;
            }
            k += 1;
        }
    }
    // endpoints in contact with a segment slide along the most constraining one
    for iv in ivs.iter_mut() {
        let (ax, bx) = (iv.a.x, iv.b.x);
        let mut best_b: Option<(f64, usize)> = match iv.b.motion {
            Motion::On(i) => Some((r.lines[i].m, i)),
            Motion::Free => None,
        };
        let mut best_a: Option<(f64, usize)> = match iv.a.motion {
            Motion::On(i) => Some((r.lines[i].m, i)),
            Motion::Free => None,
        };
        for (i, l) in r.lines.iter().enumerate() {
            if !active(l, t, tol) {
                continue;
            }
            let x = l.at(t);
            if (x - bx).abs() <= touch && l.m < r.hi && best_b.is_none_or(|(m, _)| l.m < m) {
                best_b = Some((l.m, i));
            }
            if (x - ax).abs() <= touch && l.m > r.lo && best_a.is_none_or(|(m, _)| l.m > m) {
                best_a = Some((l.m, i));
            }
        }
        if let Some((_, i)) = best_b {
            iv.b = End { x: r.lines[i].at(t), motion: Motion::On(i) };
        }
        if let Some((_, i)) = best_a {
            iv.a = End { x: r.lines[i].at(t), motion: Motion::On(i) };
        }
    }
    // collapsed intervals vanish
    ivs.retain(|iv| {
        let w = iv.b.x - iv.a.x;
        !(w <= touch && r.velocity(&iv.b, true) <= r.velocity(&iv.a, false) || w < -touch)
    });
    ivs.sort_by(|p, q| p.a.x.total_cmp(&q.a.x));
    // free endpoints meeting with nothing between them merge
    let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
    for iv in ivs.drain(..) {
        if let Some(last) = out.last_mut() {
            if iv.a.x - last.b.x <= touch && last.b.motion == Motion::Free && iv.a.motion == Motion::Free {
                if iv.b.x > last.b.x {
                    last.b = iv.b;
                }
                continue;
            }
        }
        out.push(iv);
    }
    *ivs = out;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SunriseReport {
    /// (event time, f) with f = meas A(t) - sqrt(2) (e t - ψ(t)), where e is
    /// the half-width of the slope range and ψ is measured after shearing the
    /// range to be symmetric.
    pub curve: Vec<(f64, f64)>,
    pub hypothesis_holds: bool,
    /// Present only when the hypothesis holds.
    pub positive_nondecreasing: Option<bool>,
    /// Drift mode: the instance satisfies the sheared hypothesis but not the
    /// stated one, or the other way round.
    pub in_gap: bool,
    pub min_f: f64,
}

fn linear_bound_holds(r: &SweepResult, psi: impl Fn(f64) -> f64, rate: f64, strict: bool) -> bool {
    r.psi_breaks().into_iter().filter(|&t| t > 0.0).all(|t| {
        let (p, b) = (psi(t), rate * t);
        if strict {
            p < b
        } else {
            p <= b * (1.0 + 1e-12) + r.tol
        }
    }) && {
        // near t = 0 only segments passing through the origin count
        let t = r.psi_breaks().into_iter().find(|&t| t > 0.0).unwrap_or(r.horizon);
        let t = t * 1e-6;
        psi(t) <= rate * t * (1.0 + 1e-9)
    }
}

pub fn sunrise_margin(r: &SweepResult) -> SunriseReport {
    let c = (r.lo + r.hi) / 2.0;
    let e = (r.hi - r.lo) / 2.0;
    let s2 = std::f64::consts::SQRT_2;
    let sheared_ok = linear_bound_holds(r, |t| r.sheared_psi(t, c), s2 * e, false);
    let (hyp, in_gap) = match r.mode {
        SweepMode::Drift => {
            let stated = linear_bound_holds(r, |t| r.sheared_psi(t, 0.0), s2 * r.eps / (1.0 + 2.0 * r.eps), false);
            (stated, stated != sheared_ok)
        }
        _ => (sheared_ok, false),
    };
    let mut times: Vec<f64> = r.states.iter().map(|s| s.t).collect();
    times.extend(r.psi_breaks());
    times.sort_by(f64::total_cmp);
    times.dedup();
    let curve: Vec<(f64, f64)> =
        times.iter().map(|&t| (t, r.measure_at(t) - s2 * (e * t - r.sheared_psi(t, c)))).collect();
    let min_f = curve.iter().filter(|p| p.0 > 0.0).map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ok = curve.iter().filter(|p| p.0 > 0.0).all(|p| p.1 > -1e-9)
        && curve.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
    SunriseReport { curve, hypothesis_holds: hyp, positive_nondecreasing: hyp.then_some(ok), in_gap, min_f }
}

/// Reference measure of A(t) from a slope-discretized path tree: positions on
/// a lattice of spacing dx, `steps` time steps, and `moves + 1` slopes evenly
/// spread over the mode's range. Edges touching the barrier are dropped.
pub fn path_tree_measure(segments: &[Segment], eps: f64, horizon: f64, mode: SweepMode, steps: usize, moves: usize) -> f64 {
    let (lo, hi) = mode.slopes(eps);
    let dt = horizon / steps as f64;
    let dx = (hi - lo) * dt / moves as f64;
    let jlo = (lo * dt / dx).round() as i64;
    let jhi = jlo + moves as i64;
    let imin = (jlo * steps as i64).min(0);
    let n = ((jhi * steps as i64).max(0) - imin + 1) as usize;
    let pt = |k: usize, i: usize| Point::new(k as f64 * dt, (imin + i as i64) as f64 * dx);
    let mut cur = vec![false; n];
    cur[(-imin) as usize] = true;
    for k in 0..steps {
        let (ta, tb) = (k as f64 * dt, (k + 1) as f64 * dt);
        let near: Vec<&Segment> =
            segments.iter().filter(|s| s.a.x.min(s.b.x) <= tb && s.a.x.max(s.b.x) >= ta).collect();
        let mut next = vec![false; n];
        for i in (0..n).filter(|&i| cur[i]) {
            let p = pt(k, i);
            for j in jlo..=jhi {
                let ni = i as i64 + j;
                if ni < 0 || ni >= n as i64 || next[ni as usize] {
                    continue;
                }
                let q = pt(k + 1, ni as usize);
                let e = Segment { a: p, b: q };
                if near.iter().all(|s| segments_cross(&e, s) == Crossing::Disjoint) {
                    next[ni as usize] = true;
                }
            }
        }
        cur = next;
    }
    // each run of reachable nodes stands for an interval one spacing shorter
    let mut total = 0.0;
    let mut run = 0usize;
    for &c in cur.iter().chain([false].iter()) {
        if c {
            run += 1;
        } else if run > 0 {
            total += (run - 1) as f64 * dx;
            run = 0;
        }
    }
    total
}

/// A detour: the graph of a Lipschitz function in the frame where P and Q
/// sit at (-κ, 0) and (κ, 0), and the same path in scene coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetourPath {
    pub graph: Vec<(f64, f64)>,
    pub points: Vec<Point>,
    pub slope_bound: f64,
    pub length: f64,
    /// Height at the midpoint where the two halves meet.
    pub meet: f64,
    /// Barrier length that could interact with the path.
    pub barrier_mass: f64,
}

impl DetourPath {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x\n");
        for (t, x) in &self.graph {
            s.push_str(&format!("{t:.16e},{x:.16e}\n"));
        }
        s
    }

    pub fn max_slope(&self) -> f64 {
        self.graph.windows(2).map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs()).fold(0.0, f64::max)
    }
}

/// Frame with P at (-κ, 0) and Q at (κ, 0).
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub mid: Point,
    pub u: Point,
    pub n: Point,
    pub kappa: f64,
}

impl Frame {
    pub fn new(p: Point, q: Point) -> Result<Self, DetourError> {
        let d = q - p;
        if d.norm() == 0.0 {
            return Err(DetourError::Degenerate);
        }
        let u = d.unit();
        Ok(Frame { mid: p.lerp(q, 0.5), u, n: u.perp(), kappa: d.norm() / 2.0 })
    }

    pub fn to_frame(&self, z: Point) -> Point {
        let w = z - self.mid;
        Point::new(w.dot(self.u), w.dot(self.n))
    }

    pub fn to_scene(&self, t: f64, x: f64) -> Point {
        self.mid + self.u * t + self.n * x
    }
}

/// Part of `s` inside the convex polygon `poly` (counterclockwise).
pub fn clip_to_convex(s: &Segment, poly: &[Point]) -> Option<Segment> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = s.b - s.a;
    for i in 0..poly.len() {
        let (e0, e1) = (poly[i], poly[(i + 1) % poly.len()]);
        let edge = e1 - e0;
        // inside is to the left of each edge: edge × (p - e0) ≥ 0
        let num = edge.cross(s.a - e0);
        let den = edge.cross(d);
        if den == 0.0 {
            if num < 0.0 {
                return None;
            }
        } else {
            let r = -num / den;
            if den > 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
        if t0 >= t1 {
            return None;
        }
    }
    Segment::new(s.at(t0), s.at(t1)).ok()
}

/// Tiny rotation applied to segments that span no time in the sweep frame.
pub const PRE_ROTATION: f64 = 1e-9;

fn pre_rotate(s: Segment) -> Segment {
    if (s.b.x - s.a.x).abs() > 1e-12 * (1.0 + s.a.x.abs()) {
        return s;
    }
    let c = s.a.lerp(s.b, 0.5);
    let half = (s.b - s.a) * 0.5;
    let r = half.rotate(PRE_ROTATION.max(2e-12 * (1.0 + c.x.abs()) / half.norm().max(1e-300)));
    Segment { a: c - r, b: c + r }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetourHypotheses {
    pub mass: f64,
    pub gsm: bool,
    pub gp1: bool,
    pub gp11: bool,
}

impl DetourHypotheses {
    pub fn hold(&self) -> bool {
        self.gsm && (self.gp1 || self.gp11)
    }
}

/// Barrier length in the strip of width r next to an end (segments in frame coordinates).
fn strip_mass(segs: &[Segment], from_left: bool, kappa: f64, r: f64) -> f64 {
    segs.iter()
        .map(|s| {
            let (lo, hi) = if from_left { (-kappa, -kappa + r) } else { (kappa - r, kappa) };
            let (t0, t1) = (s.a.x.min(s.b.x), s.a.x.max(s.b.x));
            let span = t1 - t0;
            if span <= 0.0 {
                return if s.a.x >= lo && s.a.x <= hi { s.length() } else { 0.0 };
            }
            let ov = (t1.min(hi) - t0.max(lo)).max(0.0);
            s.length() * ov / span
        })
        .sum()
}

/// Barrier length inside the cone |x| ≤ 4ε (s + κ), s ≤ t (or its mirror from Q).
fn cone_mass(segs: &[Segment], from_left: bool, kappa: f64, eps: f64, t: f64) -> f64 {
    let k4 = 4.0 * eps;
    let poly = if from_left {
        vec![Point::new(-kappa, 0.0), Point::new(t, -k4 * (t + kappa)), Point::new(t, k4 * (t + kappa))]
    } else {
        vec![Point::new(kappa, 0.0), Point::new(t, k4 * (kappa - t)), Point::new(t, -k4 * (kappa - t))]
    };
    segs.iter().filter_map(|s| clip_to_convex(s, &poly)).map(|s| s.length()).sum()
}

/// Checks the small-mass and end-density conditions on frame segments.
pub fn detour_hypotheses(segs: &[Segment], kappa: f64, eps: f64) -> DetourHypotheses {
    let mass: f64 = segs.iter().map(|s| s.length()).sum();
    let gsm = mass < 2.0 * kappa * eps / 3.0;
    // strip mass is piecewise linear in r; its breaks are the segment end times
    let mut rs: Vec<f64> = Vec::new();
    for s in segs {
        for p in [s.a, s.b] {
            rs.push(p.x + kappa);
            rs.push(kappa - p.x);
        }
    }
    rs.retain(|&r| r > 0.0 && r <= 2.0 * kappa);
    rs.push(2.0 * kappa);
    let first = rs.iter().copied().fold(2.0 * kappa, f64::min);
    rs.push(first * 1e-6);
    let gp1 = rs.iter().all(|&r| {
        strip_mass(segs, true, kappa, r) < eps / 3.0 * r && strip_mass(segs, false, kappa, r) < eps / 3.0 * r
    }) || segs.is_empty();
    let gp11 = segs.is_empty()
        || rs.iter().all(|&r| {
            let (tl, tr) = (-kappa + r, kappa - r);
            cone_mass(segs, true, kappa, eps, tl) < eps / 3.0 * r && cone_mass(segs, false, kappa, eps, tr) < eps / 3.0 * r
        });
    DetourHypotheses { mass, gsm, gp1, gp11 }
}

/// Frame segments that can meet a graph with slope at most 4ε from either
/// end: the barrier clipped to the diamond |x| ≤ 4ε min(t + κ, κ - t).
fn diamond_clip(barrier: &Barrier, f: &Frame, eps: f64) -> Vec<Segment> {
    let k = f.kappa;
    let w = 4.0 * eps * k;
    let poly = [Point::new(-k, 0.0), Point::new(0.0, -w), Point::new(k, 0.0), Point::new(0.0, w)];
    barrier
        .segments()
        .iter()
        .filter_map(|s| Segment::new(f.to_frame(s.a), f.to_frame(s.b)).ok())
        .filter_map(|s| clip_to_convex(&s, &poly))
        .collect()
}

/// A path from P to Q around a sparse barrier, of length at most
/// |P - Q| + 9ε m₁ of the barrier near the segment PQ.
pub fn sparse_detour(p: Point, q: Point, barrier: &Barrier, eps: f64) -> Result<DetourPath, DetourError> {
    sparse_detour_with(p, q, barrier, eps, true)
}

/// With `check_hypotheses` off the construction is attempted anyway. The
/// length bound still holds for any path returned, since both halves are
/// nondecreasing with slope at most 3ε and meet below 3 m₁; only existence
/// depends on the hypotheses.
pub fn sparse_detour_with(p: Point, q: Point, barrier: &Barrier, eps: f64, check_hypotheses: bool) -> Result<DetourPath, DetourError> {
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(DetourError::BadEpsilon(eps));
    }
    let f = Frame::new(p, q)?;
    let segs = diamond_clip(barrier, &f, eps);
    let hyp = detour_hypotheses(&segs, f.kappa, eps);
    if check_hypotheses && !hyp.hold() {
        return Err(DetourError::Hypothesis { gsm: hyp.gsm, gp1: hyp.gp1, gp11: hyp.gp11 });
    }
    let mut last = DetourError::EmptyOverlap;
    for side in [1.0, -1.0] {
        match two_sided(&f, &segs, hyp.mass, eps, side, barrier) {
            Ok(d) => return Ok(d),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn two_sided(f: &Frame, segs: &[Segment], h: f64, eps: f64, side: f64, barrier: &Barrier) -> Result<DetourPath, DetourError> {
    let k = f.kappa;
    if h == 0.0 && barrier.visible(f.to_scene(-k, 0.0), f.to_scene(k, 0.0)) {
        return finish(f, vec![(-k, 0.0), (k, 0.0)], eps, 0.0, h, barrier);
    }
    let map = |from_left: bool| -> Vec<Segment> {
        segs.iter()
            .map(|s| {
                let g = |z: Point| Point::new(if from_left { z.x + k } else { k - z.x }, side * z.y);
                pre_rotate(Segment { a: g(s.a), b: g(s.b) })
            })
            .collect()
    };
    let left = attainable_sweep(&map(true), eps, k, SweepMode::Monotone)?;
    let right = attainable_sweep(&map(false), eps, k, SweepMode::Monotone)?;
    let cap = 3.0 * h;
    let (la, ra) = (left.intervals_at(k), right.intervals_at(k));
    let mut best: Option<(f64, f64)> = None;
    for &(a0, b0) in &la {
        for &(a1, b1) in &ra {
            let (lo, hi) = (a0.max(a1).max(0.0), b0.min(b1).min(cap));
            if hi > lo && best.is_none_or(|(bl, bh)| hi - lo > bh - bl) {
                best = Some((lo, hi));
            }
        }
    }
    let (lo, hi) = best.ok_or(DetourError::EmptyOverlap)?;
    let y = 0.5 * (lo + hi);
    let gl = left.backtrack(k, y)?;
    let gr = right.backtrack(k, y)?;
    let mut graph: Vec<(f64, f64)> = gl.iter().map(|&(t, x)| (t - k, side * x)).collect();
    graph.extend(gr.iter().rev().skip(1).map(|&(t, x)| (k - t, side * x)));
    finish(f, graph, eps, side * y, h, barrier)
}

fn finish(f: &Frame, graph: Vec<(f64, f64)>, eps: f64, meet: f64, h: f64, barrier: &Barrier) -> Result<DetourPath, DetourError> {
    let points: Vec<Point> = graph.iter().map(|&(t, x)| f.to_scene(t, x)).collect();
    for (i, w) in points.windows(2).enumerate() {
        if !barrier.visible(w[0], w[1]) {
            return Err(DetourError::Crossing(i));
        }
    }
    let length = points.windows(2).map(|w| w[0].dist(w[1])).sum();
    Ok(DetourPath { graph, points, slope_bound: 3.0 * eps, length, meet, barrier_mass: h })
}

/// Largest r ↦ m₁(barrier ∩ B(c, r)) / r over breakpoints and a log grid.
pub fn max_ball_density(segs: &[Segment], c: Point) -> (f64, f64) {
    let mut rs: Vec<f64> = Vec::new();
    for s in segs {
        rs.push(c.dist(s.a));
        rs.push(c.dist(s.b));
        rs.push(s.dist_to_point(c));
    }
    rs.retain(|&r| r > 0.0);
    if rs.is_empty() {
        return (0.0, 0.0);
    }
    let (rmin, rmax) = rs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let n = 256;
    for i in 0..=n {
        rs.push(rmin * (rmax / rmin).powf(i as f64 / n as f64));
    }
    rs.iter()
        .map(|&r| {
            let m: f64 = segs.iter().map(|s| crate::geometry::segment_length_in_disc(s, c, r)).sum();
            (m / r, r)
        })
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
}

/// Path from P to Q inside the triangle PQZ around the barrier, of length at
/// most |P - Q| + eps0 m₁(barrier ∩ triangle), using slopes up to 3 eps.
pub fn flowbox_crossing(p: Point, q: Point, z: Point, barrier: &Barrier, eps: f64, eps0: f64) -> Result<DetourPath, DetourError> {
    if !(eps > 0.0 && 9.0 * eps <= eps0) {
        return Err(DetourError::BadEpsilon(eps));
    }
    let f = Frame::new(p, q)?;
    let zf = f.to_frame(z);
    let side = if zf.y >= 0.0 { 1.0 } else { -1.0 };
    let k = f.kappa;
    let height = zf.y.abs();
    if zf.x <= -k || zf.x >= k || height / (zf.x + k) < 3.0 * eps || height / (k - zf.x) < 3.0 * eps {
        return Err(DetourError::TriangleTooFlat(3.0 * eps));
    }
    let tri = if side > 0.0 {
        [Point::new(-k, 0.0), Point::new(k, 0.0), zf]
    } else {
        [Point::new(k, 0.0), Point::new(-k, 0.0), zf]
    };
    let segs: Vec<Segment> = barrier
        .segments()
        .iter()
        .filter_map(|s| Segment::new(f.to_frame(s.a), f.to_frame(s.b)).ok())
        .filter_map(|s| clip_to_convex(&s, &tri))
        .collect();
    for c in [Point::new(-k, 0.0), Point::new(k, 0.0)] {
        let (d, r) = max_ball_density(&segs, c);
        if d > eps {
            return Err(DetourError::Density { r });
        }
    }
    let hyp = detour_hypotheses(&segs, k, eps);
    if !hyp.hold() {
        return Err(DetourError::Hypothesis { gsm: hyp.gsm, gp1: hyp.gp1, gp11: hyp.gp11 });
    }
    two_sided(&f, &segs, hyp.mass, eps, side, barrier)
}
