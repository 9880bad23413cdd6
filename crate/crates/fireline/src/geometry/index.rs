use super::{BBox, Point, Segment};

/// Uniform grid bucketing of segments. Queries are conservative: every
/// segment whose cells meet the query's cells is returned, possibly more.
#[derive(Clone, Debug)]
pub(crate) struct SegmentIndex {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<u32>,
    items: Vec<u32>,
}

impl SegmentIndex {
    pub(crate) fn build(segs: &[Segment]) -> Self {
        let bb = BBox::from_points(segs.iter().flat_map(|s| [s.a, s.b]));
        if segs.is_empty() {
            return SegmentIndex { origin: Point::default(), cell: 1.0, nx: 1, ny: 1, start: vec![0, 0], items: vec![] };
        }
        let w = (bb.max.x - bb.min.x).max(1e-12);
        let h = (bb.max.y - bb.min.y).max(1e-12);
        let mean_len = segs.iter().map(Segment::length).sum::<f64>() / segs.len() as f64;
        let target = (segs.len() as f64).max(1.0);
        let mut cell = (w * h / target).sqrt().max(mean_len * 0.5);
        cell = cell.max(w.max(h) / 2048.0);
        let nx = ((w / cell).floor() as usize + 1).min(2049);
        let ny = ((h / cell).floor() as usize + 1).min(2049);
        let mut idx = SegmentIndex { origin: bb.min, cell, nx, ny, start: vec![], items: vec![] };

        let mut counts = vec![0u32; nx * ny + 1];
        let mut cells = Vec::new();
        for s in segs {
            cells.clear();
            idx.cells_of(s, &mut cells);
            for &c in &cells {
                counts[c] += 1;
            }
        }
        let mut start = vec![0u32; nx * ny + 1];
        for c in 0..nx * ny {
            start[c + 1] = start[c] + counts[c];
        }
        let mut fill = start.clone();
        let mut items = vec![0u32; start[nx * ny] as usize];
        for (i, s) in segs.iter().enumerate() {
            cells.clear();
            idx.cells_of(s, &mut cells);
            for &c in &cells {
                items[fill[c] as usize] = i as u32;
                fill[c] += 1;
            }
        }
        idx.start = start;
        idx.items = items;
        idx
    }

    fn col(&self, x: f64) -> usize {
        (((x - self.origin.x) / self.cell).floor().max(0.0) as usize).min(self.nx - 1)
    }

    fn row(&self, y: f64) -> usize {
        (((y - self.origin.y) / self.cell).floor().max(0.0) as usize).min(self.ny - 1)
    }

    /// Cells touched by the segment, found column by column with a small
    /// safety margin so that rounding never drops a cell.
    fn cells_of(&self, s: &Segment, out: &mut Vec<usize>) {
        let eps = self.cell * 1e-9;
        let (p, q) = if s.a.x <= s.b.x { (s.a, s.b) } else { (s.b, s.a) };
        let c0 = self.col(p.x - eps);
        let c1 = self.col(q.x + eps);
        let dx = q.x - p.x;
        for c in c0..=c1 {
            let xl = self.origin.x + c as f64 * self.cell;
            let xr = xl + self.cell;
            let (ya, yb) = if dx.abs() < 1e-300 || c0 == c1 {
                (p.y, q.y)
            } else {
                let ta = ((xl - p.x) / dx).clamp(0.0, 1.0);
                let tb = ((xr - p.x) / dx).clamp(0.0, 1.0);
                (p.y + (q.y - p.y) * ta, p.y + (q.y - p.y) * tb)
            };
            let r0 = self.row(ya.min(yb) - eps);
            let r1 = self.row(ya.max(yb) + eps);
            for r in r0..=r1 {
                out.push(r * self.nx + c);
            }
        }
    }

    fn outside(&self, bb: &BBox) -> bool {
        let m = self.cell * 1e-9;
        bb.max.x < self.origin.x - m
            || bb.max.y < self.origin.y - m
            || bb.min.x > self.origin.x + self.nx as f64 * self.cell + m
            || bb.min.y > self.origin.y + self.ny as f64 * self.cell + m
    }

    pub(crate) fn query_segment(&self, s: &Segment, out: &mut Vec<u32>) {
        out.clear();
        if self.items.is_empty() || self.outside(&s.bbox()) {
            return;
        }
        let mut cells = Vec::new();
        self.cells_of(s, &mut cells);
        for c in cells {
            out.extend_from_slice(&self.items[self.start[c] as usize..self.start[c + 1] as usize]);
        }
        out.sort_unstable();
        out.dedup();
    }

    pub(crate) fn query_box(&self, bb: &BBox, out: &mut Vec<u32>) {
        out.clear();
        if self.items.is_empty() || self.outside(bb) {
            return;
        }
        let (c0, c1) = (self.col(bb.min.x), self.col(bb.max.x));
        let (r0, r1) = (self.row(bb.min.y), self.row(bb.max.y));
        for r in r0..=r1 {
            for c in c0..=c1 {
                let k = r * self.nx + c;
                out.extend_from_slice(&self.items[self.start[k] as usize..self.start[k + 1] as usize]);
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}
