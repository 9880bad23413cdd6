//! Reference barriers: the two-spiral confinement curve, random dust and a
//! small shielding polygon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{polygonalize_disc, segments_cross, split_components, BBox, Barrier, Crossing, Disc, Point, Scene, Segment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("spiral needs sigma > 2 to close, got {0}")]
    SigmaTooSmall(f64),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("arc prefix width {0} must lie in [0, min(sigma, 2 pi))")]
    BadArc(f64),
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("count and total length must be positive")]
    BadDust,
    #[error("placed only {placed} of {wanted} dust grains")]
    Placement { placed: usize, wanted: usize },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Two mirrored logarithmic spirals r = r_a exp((θ - α/2)/λ) around a fire
/// started in the disc of radius `r0` at the origin. With an arc prefix of
/// width α the spirals start from the ends of an arc of radius r_a = σ r0/(σ - α).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpiralSpec {
    pub r0: f64,
    pub sigma: f64,
    pub points_per_branch: usize,
    pub arc_width: f64,
}

impl SpiralSpec {
    pub fn new(r0: f64, sigma: f64) -> Result<Self, StrategyError> {
        let s = SpiralSpec { r0, sigma, points_per_branch: 2000, arc_width: 0.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn with_points(mut self, n: usize) -> Self {
        self.points_per_branch = n;
        self
    }

    pub fn with_arc(mut self, width: f64) -> Self {
        self.arc_width = width;
        self
    }

    fn validate(&self) -> Result<(), StrategyError> {
        if !(self.sigma > 2.0) || !self.sigma.is_finite() {
            return Err(StrategyError::SigmaTooSmall(self.sigma));
        }
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(StrategyError::BadRadius(self.r0));
        }
        if !(self.arc_width >= 0.0 && self.arc_width < self.sigma.min(2.0 * std::f64::consts::PI)) {
            return Err(StrategyError::BadArc(self.arc_width));
        }
        if self.points_per_branch < 2 {
            return Err(StrategyError::TooFewPoints { min: 2, got: self.points_per_branch });
        }
        Ok(())
    }

    /// λ = sqrt(σ²/4 - 1): the spiral's tangent makes a constant angle with the radius.
    pub fn lambda(&self) -> f64 {
        (self.sigma * self.sigma / 4.0 - 1.0).sqrt()
    }

    pub fn arc_radius(&self) -> f64 {
        self.sigma * self.r0 / (self.sigma - self.arc_width)
    }

    pub fn closure_radius(&self) -> f64 {
        self.arc_radius() * ((std::f64::consts::PI - self.arc_width / 2.0) / self.lambda()).exp()
    }

    /// Radius of the upper branch at polar angle θ.
    pub fn radius_at(&self, theta: f64) -> f64 {
        self.arc_radius() * ((theta - self.arc_width / 2.0) / self.lambda()).exp()
    }

    /// Exact arclength of one branch between radii r_a and r.
    pub fn branch_length(&self, r: f64) -> f64 {
        self.sigma / 2.0 * (r - self.arc_radius())
    }

    /// Bound on how far the polygonal curve's touched length can run ahead of
    /// σt: a chord is touched slightly earlier than the arc it replaces, by
    /// at most its share of one radial step on each branch.
    pub fn chord_slack(&self) -> f64 {
        let n = self.points_per_branch.max(2);
        let dth = (std::f64::consts::PI - self.arc_width / 2.0) / (n - 1) as f64;
        let r = self.closure_radius();
        self.sigma * r * (1.0 - (-dth / self.lambda()).exp())
    }

    /// Area enclosed by the closed curve.
    pub fn enclosed_area(&self) -> f64 {
        let (ra, lam) = (self.arc_radius(), self.lambda());
        let a = self.arc_width;
        let r = self.closure_radius();
        // sector under the arc plus 2 * (1/2) ∫ r² dθ over each branch
        a / 2.0 * ra * ra + lam / 2.0 * (r * r - ra * ra)
    }

    /// The closed curve as one polyline: arc (if any), the upper branch out to
    /// (-R, 0), then the lower branch back.
    pub fn polyline(&self) -> Result<Vec<Point>, StrategyError> {
        self.validate()?;
        let n = self.points_per_branch;
        let half = self.arc_width / 2.0;
        let ra = self.arc_radius();
        let pi = std::f64::consts::PI;
        let mut upper: Vec<Point> = (0..n)
            .map(|k| {
                let th = half + (pi - half) * k as f64 / (n - 1) as f64;
                let r = self.radius_at(th);
                Point::new(r * th.cos(), r * th.sin())
            })
            .collect();
        upper[n - 1] = Point::new(-self.closure_radius(), 0.0);
        if half == 0.0 {
            upper[0] = Point::new(ra, 0.0);
        }
        let mut pts = Vec::new();
        if half > 0.0 {
            let m = ((self.arc_width * ra * n as f64 / self.branch_length(self.closure_radius())).ceil() as usize).max(4);
            for k in 0..m {
                let th = -half + self.arc_width * k as f64 / m as f64;
                pts.push(Point::new(ra * th.cos(), ra * th.sin()));
            }
        }
        pts.extend(upper.iter().copied());
        pts.extend(upper.iter().rev().skip(1).map(|p| Point::new(p.x, -p.y)));
        // the mirror of the first branch point is where the curve started
        pts.pop();
        Ok(pts)
    }
}

fn chain(pts: &[Point], closed: bool) -> Vec<Segment> {
    let mut out: Vec<Segment> = pts.windows(2).filter_map(|w| Segment::new(w[0], w[1]).ok()).collect();
    if closed && pts.len() > 2 {
        if let Ok(s) = Segment::new(pts[pts.len() - 1], pts[0]) {
            out.push(s);
        }
    }
    out
}

pub fn spiral_segments(spec: &SpiralSpec) -> Result<Vec<Segment>, StrategyError> {
    let pts = spec.polyline()?;
    Ok(chain(&pts, true))
}

pub fn spiral_barrier(spec: &SpiralSpec) -> Result<Barrier, StrategyError> {
    Ok(split_components(&spiral_segments(spec)?))
}

/// Fire started in the disc of radius r0 at the origin, blocked by the spiral.
pub fn spiral_scene(spec: &SpiralSpec, c0: f64) -> Result<Scene, StrategyError> {
    let segs = spiral_segments(spec)?;
    Ok(Scene::new(vec![Disc::new(Point::new(0.0, 0.0), spec.r0)?], &segs, spec.sigma, c0)?)
}

/// `count` non-crossing segments of equal length, uniformly placed (fully
/// inside `region`) with uniform orientation, reproducible from `seed`.
pub fn dust_barrier(region: &BBox, count: usize, total_length: f64, seed: u64) -> Result<Barrier, StrategyError> {
    Ok(split_components(&dust_segments(region, count, total_length, seed)?))
}

pub fn dust_segments(region: &BBox, count: usize, total_length: f64, seed: u64) -> Result<Vec<Segment>, StrategyError> {
    if count == 0 || !(total_length > 0.0) || !total_length.is_finite() || region.is_empty() {
        return Err(StrategyError::BadDust);
    }
    let len = total_length / count as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Segment> = Vec::with_capacity(count);
    let max_tries = 1000 * count;
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > max_tries {
            return Err(StrategyError::Placement { placed: out.len(), wanted: count });
        }
        let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let d = Point::new(th.cos(), th.sin()) * (len / 2.0);
        let (hx, hy) = (d.x.abs(), d.y.abs());
        if region.max.x - region.min.x < 2.0 * hx || region.max.y - region.min.y < 2.0 * hy {
            continue;
        }
        let c = Point::new(
            rng.random_range(region.min.x + hx..=region.max.x - hx),
            rng.random_range(region.min.y + hy..=region.max.y - hy),
        );
        let Ok(s) = Segment::new(c - d, c + d) else { continue };
        if out.iter().all(|o| segments_cross(o, &s) == Crossing::Disjoint) {
            out.push(s);
        }
    }
    Ok(out)
}

/// Closed regular polygon inscribed in the circle of radius `r0`.
pub fn shield_disc(center: Point, r0: f64) -> Result<Barrier, StrategyError> {
    Ok(split_components(&shield_segments(center, r0, 64)?))
}

pub fn shield_segments(center: Point, r0: f64, n: usize) -> Result<Vec<Segment>, StrategyError> {
    let d = Disc::new(center, r0).map_err(|_| StrategyError::BadRadius(r0))?;
    Ok(polygonalize_disc(&d, n)?.segments())
}

#[cfg(test)]
mod tests;
