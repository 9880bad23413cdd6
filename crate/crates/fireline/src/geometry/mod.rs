//! Planar primitives, barriers and scenes.
//!
//! Every combinatorial predicate here reduces to [`orient`], which is exact.
//! Visibility follows the closure semantics of the fire problem: a path may
//! graze a barrier endpoint or run along one side of a wall, but it may not
//! pass from one side of the barrier to the other.

mod index;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use index::SegmentIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("non-finite coordinate in {0}")]
    NonFinite(&'static str),
    #[error("zero-length segment at ({x}, {y})")]
    DegenerateSegment { x: f64, y: f64 },
    #[error("disc radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("polygonalization needs at least {min} vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },
    #[error("construction speed sigma must exceed 1, got {0}")]
    BadSigma(f64),
    #[error("cost weight c0 must be nonnegative, got {0}")]
    BadCost(f64),
    #[error("scene needs at least one initial disc")]
    NoInitialSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Unit vector in the same direction; the zero vector stays zero.
    pub fn unit(self) -> Point {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            self
        }
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, o: Point, s: f64) -> Point {
        Point::new(self.x + (o.x - self.x) * s, self.y + (o.y - self.y) * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    fn key(self) -> (u64, u64) {
        // +0.0 and -0.0 must collide
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }

    fn lex_lt(self, o: Point) -> bool {
        self.x < o.x || (self.x == o.x && self.y < o.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self, GeometryError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::NonFinite("segment"));
        }
        if a == b {
            return Err(GeometryError::DegenerateSegment { x: a.x, y: a.y });
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn at(&self, s: f64) -> Point {
        self.a.lerp(self.b, s)
    }

    pub fn direction(&self) -> Point {
        self.b - self.a
    }

    /// Closest point of the segment to `p`.
    pub fn closest_point(&self, p: Point) -> Point {
        let d = self.direction();
        let l2 = d.dot(d);
        let s = ((p - self.a).dot(d) / l2).clamp(0.0, 1.0);
        self.at(s)
    }

    pub fn dist_to_point(&self, p: Point) -> f64 {
        self.closest_point(p).dist(p)
    }

    pub fn bbox(&self) -> BBox {
        BBox::from_points([self.a, self.b])
    }

    fn contains_collinear(&self, p: Point) -> bool {
        let (lo, hi) = if self.a.lex_lt(self.b) { (self.a, self.b) } else { (self.b, self.a) };
        !p.lex_lt(lo) && !hi.lex_lt(p)
    }
}

/// Length of the part of `seg` inside the closed disc.
pub fn segment_length_in_disc(seg: &Segment, center: Point, r: f64) -> f64 {
    let d = seg.direction();
    let f = seg.a - center;
    let a = d.dot(d);
    let b = 2.0 * f.dot(d);
    let c = f.dot(f) - r * r;
    let disc = b * b - 4.0 * a * c;
    if disc <= 0.0 {
        return 0.0;
    }
    let sq = disc.sqrt();
    let s0 = ((-b - sq) / (2.0 * a)).max(0.0);
    let s1 = ((-b + sq) / (2.0 * a)).min(1.0);
    if s1 <= s0 {
        0.0
    } else {
        (s1 - s0) * a.sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Point,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(GeometryError::NonFinite("disc"));
        }
        if radius <= 0.0 {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Disc { center, radius })
    }

    pub fn contains(&self, p: Point) -> bool {
        p.dist(self.center) <= self.radius
    }

    pub fn distance(&self, p: Point) -> f64 {
        (p.dist(self.center) - self.radius).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn empty() -> Self {
        BBox {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(pts: I) -> Self {
        let mut b = BBox::empty();
        for p in pts {
            b.include(p);
        }
        b
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&self, o: &BBox) -> BBox {
        let mut b = *self;
        if !o.is_empty() {
            b.include(o.min);
            b.include(o.max);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    pub fn expand(&self, m: f64) -> BBox {
        BBox {
            min: Point::new(self.min.x - m, self.min.y - m),
            max: Point::new(self.max.x + m, self.max.y + m),
        }
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.min.dist(self.max)
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Sign of the signed area of the triangle `pqr`: +1 counterclockwise,
/// -1 clockwise, 0 collinear. Exact for all finite inputs.
pub fn orient(p: Point, q: Point, r: Point) -> i8 {
    let c = |p: Point| robust::Coord { x: p.x, y: p.y };
    let d = robust::orient2d(c(p), c(q), c(r));
    if d > 0.0 {
        1
    } else if d < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Crossing {
    Disjoint,
    EndpointTouch,
    InteriorCross,
    Overlap,
}

/// Exact classification of how two closed segments meet.
pub fn segments_cross(s: &Segment, t: &Segment) -> Crossing {
    let o1 = orient(s.a, s.b, t.a);
    let o2 = orient(s.a, s.b, t.b);
    if o1 == 0 && o2 == 0 {
        let (s0, s1) = if s.a.lex_lt(s.b) { (s.a, s.b) } else { (s.b, s.a) };
        let (t0, t1) = if t.a.lex_lt(t.b) { (t.a, t.b) } else { (t.b, t.a) };
        let lo = if s0.lex_lt(t0) { t0 } else { s0 };
        let hi = if s1.lex_lt(t1) { s1 } else { t1 };
        return if lo.lex_lt(hi) {
            Crossing::Overlap
        } else if lo == hi {
            Crossing::EndpointTouch
        } else {
            Crossing::Disjoint
        };
    }
    let o3 = orient(t.a, t.b, s.a);
    let o4 = orient(t.a, t.b, s.b);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return Crossing::InteriorCross;
    }
    let touches = (o1 == 0 && s.contains_collinear(t.a))
        || (o2 == 0 && s.contains_collinear(t.b))
        || (o3 == 0 && t.contains_collinear(s.a))
        || (o4 == 0 && t.contains_collinear(s.b));
    if touches {
        Crossing::EndpointTouch
    } else {
        Crossing::Disjoint
    }
}

/// Intersection point of the supporting lines, if they are not parallel.
pub fn line_intersection(s: &Segment, t: &Segment) -> Option<Point> {
    let d1 = s.direction();
    let d2 = t.direction();
    let den = d1.cross(d2);
    if den == 0.0 {
        return None;
    }
    let u = (t.a - s.a).cross(d2) / den;
    Some(s.at(u))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    pub fn segments(&self) -> Vec<Segment> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(n);
        let m = if self.closed { n } else { n.saturating_sub(1) };
        for i in 0..m {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            if a != b {
                out.push(Segment { a, b });
            }
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.segments().iter().map(Segment::length).sum()
    }

    pub fn dist_to_point(&self, p: Point) -> f64 {
        if self.points.len() == 1 {
            return self.points[0].dist(p);
        }
        self.segments()
            .iter()
            .map(|s| s.dist_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Regular `n`-gon inscribed in the disc boundary, first vertex at angle 0.
/// Its Hausdorff distance to the circle is `r (1 - cos(pi/n))`.
pub fn polygonalize_disc(d: &Disc, n: usize) -> Result<Polyline, GeometryError> {
    if n < 3 {
        return Err(GeometryError::TooFewVertices { min: 3, got: n });
    }
    let points = (0..n)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            d.center + Point::new(th.cos(), th.sin()) * d.radius
        })
        .collect();
    Ok(Polyline { points, closed: true })
}

pub fn polygon_hausdorff_bound(radius: f64, n: usize) -> f64 {
    radius * (1.0 - (std::f64::consts::PI / n as f64).cos())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierComponent {
    pub segments: Vec<Segment>,
    pub length: f64,
}

/// A finite barrier: a segment soup grouped into connected components.
#[derive(Clone, Debug)]
pub struct Barrier {
    pub components: Vec<BarrierComponent>,
    pub total_length: f64,
    segs: Vec<Segment>,
    pieces: Vec<(Segment, usize)>,
    index: SegmentIndex,
}

impl Default for Barrier {
    fn default() -> Self {
        split_components(&[])
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Groups segments into connected components (touching, crossing or
/// overlapping segments are connected) and measures each component with
/// collinear overlaps counted once.
pub fn split_components(segments: &[Segment]) -> Barrier {
    let segs: Vec<Segment> = segments.to_vec();
    let index = SegmentIndex::build(&segs);
    let n = segs.len();
    let mut conn = UnionFind::new(n);
    let mut coll = UnionFind::new(n);
    let mut buf = Vec::new();
    for (i, s) in segs.iter().enumerate() {
        index.query_segment(s, &mut buf);
        for &j in &buf {
            let j = j as usize;
            if j <= i {
                continue;
            }
            match segments_cross(s, &segs[j]) {
                Crossing::Disjoint => {}
                Crossing::Overlap => {
                    conn.union(i, j);
                    coll.union(i, j);
                }
                _ => conn.union(i, j),
            }
        }
    }

    // merge collinear overlap groups into disjoint pieces
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        groups.entry(coll.find(i)).or_default().push(i);
    }
    let mut group_keys: Vec<usize> = groups.keys().copied().collect();
    group_keys.sort_unstable();
    let mut raw_pieces: Vec<(Segment, usize)> = Vec::new();
    for g in group_keys {
        let members = &groups[&g];
        let base = segs[members[0]];
        let dir = base.direction();
        let mut ivs: Vec<(f64, Point, f64, Point)> = members
            .iter()
            .map(|&k| {
                let s = segs[k];
                let (pa, pb) = ((s.a - base.a).dot(dir), (s.b - base.a).dot(dir));
                if pa <= pb {
                    (pa, s.a, pb, s.b)
                } else {
                    (pb, s.b, pa, s.a)
                }
            })
            .collect();
        ivs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut cur = ivs[0];
        for iv in ivs.into_iter().skip(1) {
            if iv.0 <= cur.2 {
                if iv.2 > cur.2 {
                    cur.2 = iv.2;
                    cur.3 = iv.3;
                }
            } else {
                raw_pieces.push((Segment { a: cur.1, b: cur.3 }, members[0]));
                cur = iv;
            }
        }
        raw_pieces.push((Segment { a: cur.1, b: cur.3 }, members[0]));
    }

    let mut comp_of_root: HashMap<usize, usize> = HashMap::new();
    let mut components: Vec<BarrierComponent> = Vec::new();
    for (i, s) in segs.iter().enumerate() {
        let r = conn.find(i);
        let c = *comp_of_root.entry(r).or_insert_with(|| {
            components.push(BarrierComponent { segments: Vec::new(), length: 0.0 });
            components.len() - 1
        });
        components[c].segments.push(*s);
    }
    let mut pieces = Vec::with_capacity(raw_pieces.len());
    for (p, member) in raw_pieces {
        let c = comp_of_root[&conn.find(member)];
        components[c].length += p.length();
        pieces.push((p, c));
    }
    let total_length = components.iter().map(|c| c.length).sum::<f64>() + 0.0;
    Barrier { components, total_length, segs, pieces, index }
}

impl Barrier {
    pub fn from_segments(segments: &[Segment]) -> Self {
        split_components(segments)
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    /// The input segments, in input order.
    pub fn segments(&self) -> &[Segment] {
        &self.segs
    }

    /// Pairwise non-overlapping pieces covering the barrier, with the index of
    /// the component each belongs to.
    pub fn pieces(&self) -> &[(Segment, usize)] {
        &self.pieces
    }

    pub fn bbox(&self) -> BBox {
        BBox::from_points(self.segs.iter().flat_map(|s| [s.a, s.b]))
    }

    /// Distinct segment endpoints, in first-seen order.
    pub fn endpoints(&self) -> Vec<Point> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for s in &self.segs {
            for p in [s.a, s.b] {
                if seen.insert(p.key(), ()).is_none() {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Segments whose bounding boxes may meet the closed segment `pq`.
    pub(crate) fn candidates(&self, p: Point, q: Point, out: &mut Vec<u32>) {
        self.index.query_segment(&Segment { a: p, b: q }, out);
    }

    /// Segments with a point within `r` of `p`.
    pub fn segments_near(&self, p: Point, r: f64) -> Vec<Segment> {
        let mut buf = Vec::new();
        self.index.query_box(&BBox::from_points([p]).expand(r), &mut buf);
        buf.iter().map(|&i| self.segs[i as usize]).filter(|s| s.dist_to_point(p) <= r).collect()
    }

    /// Far ends of all barrier rays emanating from `v`: the other endpoint
    /// of each segment ending at `v`, and both endpoints of each segment
    /// passing through `v` in its interior. Duplicated directions are merged.
    pub fn rays_at(&self, v: Point) -> Vec<Point> {
        let mut buf = Vec::new();
        self.index.query_segment(&Segment { a: v, b: v }, &mut buf);
        let mut rays: Vec<Point> = Vec::new();
        let mut push = |r: Point| {
            if !rays
                .iter()
                .any(|&o| orient(v, o, r) == 0 && (o - v).dot(r - v) > 0.0)
            {
                rays.push(r);
            }
        };
        for &i in &buf {
            let s = self.segs[i as usize];
            if s.a == v {
                push(s.b);
            } else if s.b == v {
                push(s.a);
            } else if orient(s.a, s.b, v) == 0 && s.contains_collinear(v) {
                push(s.a);
                push(s.b);
            }
        }
        rays
    }

    /// Whether a path can travel along the open segment from `p` to `q`
    /// without crossing the barrier.
    pub fn visible(&self, p: Point, q: Point) -> bool {
        self.visible_sided(p, q, Sides::BOTH, Sides::BOTH)
    }

    /// Like `visible`, but a run along a wall that starts at `p` (ends at
    /// `q`) may only be ridden on the sides allowed by `start` (`end`).
    /// Sides are relative to the direction from `p` to `q`.
    pub fn visible_sided(&self, p: Point, q: Point, start: Sides, end: Sides) -> bool {
        if p == q {
            return true;
        }
        let mut buf = Vec::new();
        self.candidates(p, q, &mut buf);
        if buf.is_empty() {
            return true;
        }
        let pq = Segment { a: p, b: q };
        let axis_x = (q.x - p.x).abs() >= (q.y - p.y).abs();
        let param = |z: Point| if axis_x { (z.x - p.x) / (q.x - p.x) } else { (z.y - p.y) / (q.y - p.y) };
        // (param, side) of barrier rays leaving points of the open segment
        let mut rays: Vec<(f64, i8)> = Vec::new();
        let mut overlaps: Vec<(f64, f64)> = Vec::new();
        for &i in &buf {
            let s = &self.segs[i as usize];
            match segments_cross(&pq, s) {
                Crossing::Disjoint => {}
                Crossing::InteriorCross => return false,
                Crossing::Overlap => {
                    let (u, w) = (param(s.a), param(s.b));
                    let (u, w) = if u <= w { (u, w) } else { (w, u) };
                    overlaps.push((u.max(0.0), w.min(1.0)));
                }
                Crossing::EndpointTouch => {
                    for (e, other) in [(s.a, s.b), (s.b, s.a)] {
                        if e == p || e == q || orient(p, q, e) != 0 || !pq.contains_collinear(e) {
                            continue;
                        }
                        let side = orient(p, q, other);
                        if side != 0 {
                            rays.push((param(e), side));
                        }
                    }
                }
            }
        }
        if rays.is_empty() && (overlaps.is_empty() || (start == Sides::BOTH && end == Sides::BOTH)) {
            return true;
        }
        overlaps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for o in overlaps {
            match merged.last_mut() {
                Some(m) if o.0 <= m.1 => m.1 = m.1.max(o.1),
                _ => merged.push(o),
            }
        }
        // a run along walls is ridden on one side throughout
        for m in &merged {
            let mut ok = Sides::BOTH;
            if m.0 <= 0.0 {
                ok = ok.and(start);
            }
            if m.1 >= 1.0 {
                ok = ok.and(end);
            }
            for &(t, side) in &rays {
                if t >= m.0 && t <= m.1 {
                    ok = ok.and(if side > 0 { Sides::RIGHT } else { Sides::LEFT });
                }
            }
            if !ok.any() {
                return false;
            }
        }
        rays.sort_by(|a, b| a.0.total_cmp(&b.0));
        // rays at one point off the runs must share a side
        let group_of = |t: f64| -> (u8, f64) {
            for (k, m) in merged.iter().enumerate() {
                if t >= m.0 && t <= m.1 {
                    return (1, k as f64);
                }
            }
            (0, t)
        };
        let mut i = 0;
        while i < rays.len() {
            let g = group_of(rays[i].0);
            let (mut left, mut right) = (false, false);
            let mut j = i;
            while j < rays.len() && group_of(rays[j].0) == g {
                if rays[j].1 > 0 {
                    left = true;
                } else {
                    right = true;
                }
                j += 1;
            }
            if left && right {
                return false;
            }
            i = j;
        }
        true
    }

    /// Number of bounded faces of the arrangement (cycle rank of the planar
    /// graph formed by the barrier). Zero iff the complement is connected.
    pub fn bounded_faces(&self) -> usize {
        let pieces: Vec<Segment> = self.pieces.iter().map(|p| p.0).collect();
        if pieces.is_empty() {
            return 0;
        }
        let idx = SegmentIndex::build(&pieces);
        let mut vid: HashMap<(u64, u64), usize> = HashMap::new();
        let mut next = 0usize;
        let mut id_of = |p: Point, vid: &mut HashMap<(u64, u64), usize>| -> usize {
            *vid.entry(p.key()).or_insert_with(|| {
                next += 1;
                next - 1
            })
        };
        // per piece: (parameter, vertex id) of every vertex on it
        let mut on: Vec<Vec<(f64, usize)>> = pieces
            .iter()
            .map(|s| vec![(0.0, id_of(s.a, &mut vid)), (1.0, id_of(s.b, &mut vid))])
            .collect();
        let mut buf = Vec::new();
        for (i, s) in pieces.iter().enumerate() {
            idx.query_segment(s, &mut buf);
            for &j in &buf {
                let j = j as usize;
                if j == i {
                    continue;
                }
                let t = &pieces[j];
                let proj = |p: Point| (p - s.a).dot(s.direction()) / s.direction().dot(s.direction());
                match segments_cross(s, t) {
                    Crossing::InteriorCross => {
                        let (lo, hi) = (&pieces[i.min(j)], &pieces[i.max(j)]);
                        let x = line_intersection(lo, hi).unwrap_or(s.a);
                        let id = id_of(x, &mut vid);
                        on[i].push((proj(x), id));
                    }
                    Crossing::EndpointTouch => {
                        for e in [t.a, t.b] {
                            if e != s.a && e != s.b && orient(s.a, s.b, e) == 0 && s.contains_collinear(e) {
                                let id = id_of(e, &mut vid);
                                on[i].push((proj(e), id));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut verts = std::collections::HashSet::new();
        let mut edges = std::collections::HashSet::new();
        for list in &mut on {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            list.dedup_by(|a, b| a.1 == b.1);
            for w in list.windows(2) {
                verts.insert(w[0].1);
                verts.insert(w[1].1);
                if w[0].1 != w[1].1 {
                    edges.insert((w[0].1.min(w[1].1), w[0].1.max(w[1].1)));
                }
            }
            if list.len() == 1 {
                verts.insert(list[0].1);
            }
        }
        let e = edges.len();
        let v = verts.len();
        let c = self.components.len();
        (e + c).saturating_sub(v)
    }

    /// Total barrier length inside the closed disc.
    pub fn length_in_disc(&self, center: Point, r: f64) -> f64 {
        self.pieces
            .iter()
            .filter(|(s, _)| s.dist_to_point(center) <= r)
            .map(|(s, _)| segment_length_in_disc(s, center, r))
            .sum()
    }
}

/// Which sides of a directed line a path may lie on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sides {
    pub left: bool,
    pub right: bool,
}

impl Sides {
    pub const BOTH: Sides = Sides { left: true, right: true };
    pub const LEFT: Sides = Sides { left: true, right: false };
    pub const RIGHT: Sides = Sides { left: false, right: true };

    pub fn and(self, o: Sides) -> Sides {
        Sides { left: self.left && o.left, right: self.right && o.right }
    }

    pub fn any(self) -> bool {
        self.left || self.right
    }
}

pub fn visible(p: Point, q: Point, barrier: &Barrier) -> bool {
    barrier.visible(p, q)
}

/// The static description of a dynamic blocking problem.
#[derive(Clone, Debug)]
pub struct Scene {
    pub initial: Vec<Disc>,
    pub barrier: Barrier,
    pub sigma: f64,
    pub c0: f64,
}

impl Scene {
    pub fn new(initial: Vec<Disc>, segments: &[Segment], sigma: f64, c0: f64) -> Result<Self, GeometryError> {
        if initial.is_empty() {
            return Err(GeometryError::NoInitialSet);
        }
        for d in &initial {
            Disc::new(d.center, d.radius)?;
        }
        for s in segments {
            Segment::new(s.a, s.b)?;
        }
        if !(sigma > 1.0) || !sigma.is_finite() {
            return Err(GeometryError::BadSigma(sigma));
        }
        if !(c0 >= 0.0) || !c0.is_finite() {
            return Err(GeometryError::BadCost(c0));
        }
        Ok(Scene { initial, barrier: split_components(segments), sigma, c0 })
    }

    pub fn with_segments(&self, segments: &[Segment]) -> Result<Self, GeometryError> {
        Scene::new(self.initial.clone(), segments, self.sigma, self.c0)
    }

    pub fn bbox(&self) -> BBox {
        let discs = self.initial.iter().fold(BBox::empty(), |b, d| {
            b.union(&BBox::from_points([d.center]).expand(d.radius))
        });
        discs.union(&self.barrier.bbox())
    }

    pub fn diameter(&self) -> f64 {
        self.bbox().diagonal()
    }

    /// Euclidean distance to the initial set.
    pub fn dist_to_initial(&self, p: Point) -> f64 {
        self.initial.iter().map(|d| d.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn in_initial(&self, p: Point) -> bool {
        self.initial.iter().any(|d| d.contains(p))
    }
}
