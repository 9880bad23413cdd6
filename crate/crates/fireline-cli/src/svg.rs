//! Minimal SVG figures: initial discs, barrier, fronts and an optional flow box.

use std::fmt::Write;

use fireline::geometry::{BBox, Point, Scene};

pub struct Figure {
    bbox: BBox,
    body: String,
}

impl Figure {
    pub fn new(bbox: BBox) -> Self {
        Figure { bbox: bbox.expand(0.05 * bbox.diagonal().max(1.0)), body: String::new() }
    }

    fn xy(&self, p: Point) -> (f64, f64) {
        (p.x - self.bbox.min.x, self.bbox.max.y - p.y)
    }

    fn path(&self, pts: &[Point], closed: bool) -> String {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let (x, y) = self.xy(p);
            let _ = write!(d, "{}{x:.5},{y:.5} ", if i == 0 { 'M' } else { 'L' });
        }
        if closed {
            d.push('Z');
        }
        d
    }

    pub fn scene(&mut self, scene: &Scene) {
        for d in &scene.initial {
            let (x, y) = self.xy(d.center);
            let _ = writeln!(self.body, r##"<circle cx="{x:.5}" cy="{y:.5}" r="{:.5}" fill="#f4a259"/>"##, d.radius);
        }
        let w = 0.004 * self.bbox.diagonal();
        for s in scene.barrier.segments() {
            let (ax, ay) = self.xy(s.a);
            let (bx, by) = self.xy(s.b);
            let _ = writeln!(
                self.body,
                r##"<line x1="{ax:.5}" y1="{ay:.5}" x2="{bx:.5}" y2="{by:.5}" stroke="#111" stroke-width="{w:.5}" stroke-linecap="round"/>"##
            );
        }
    }

    /// A front level set.
    pub fn front(&mut self, pts: &[Point], closed: bool) {
        let w = 0.0015 * self.bbox.diagonal();
        let d = self.path(pts, closed);
        let _ = writeln!(self.body, r##"<path d="{d}" fill="none" stroke="#c0392b" stroke-width="{w:.5}"/>"##);
    }

    /// A shaded region such as a flow box.
    pub fn region(&mut self, pts: &[Point]) {
        let w = 0.0015 * self.bbox.diagonal();
        let d = self.path(pts, true);
        let _ = writeln!(
            self.body,
            r##"<path d="{d}" fill="#3498db" fill-opacity="0.35" stroke="#1f618d" stroke-width="{w:.5}"/>"##
        );
    }

    pub fn render(&self) -> String {
        let (w, h) = (self.bbox.max.x - self.bbox.min.x, self.bbox.max.y - self.bbox.min.y);
        let px = 800.0 / w.max(h);
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {w:.5} {h:.5}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            w * px,
            h * px,
            self.body
        )
    }
}
