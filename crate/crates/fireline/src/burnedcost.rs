//! Total burned region, its area, and the cost of a barrier.
//!
//! The region eventually burned is the union of the components of the
//! barrier's complement that meet the initial set, so no times are needed: a
//! flood fill over lattice edges that the barrier does not block finds it.

use std::collections::VecDeque;

use serde::Serialize;

use crate::eikonal_grid::lattice_for;
use crate::geometry::{BBox, Barrier, Point, Scene};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BurnReport {
    pub bounded: bool,
    /// Burned area; infinite when the fire escapes.
    pub area: f64,
    /// Area of the lattice cells on the edge of the filled set.
    pub area_error_band: f64,
    pub cost: f64,
    pub h: f64,
    /// Number of distinct complement components the fire burns.
    pub component_count: usize,
    pub filled_cells: usize,
}

/// Result of one flood fill on a lattice over a box.
#[derive(Clone, Debug, PartialEq)]
pub struct Flood {
    pub filled: usize,
    /// Filled nodes with at least one unfilled neighbor.
    pub edge_cells: usize,
    pub hit_boundary: bool,
    pub components: usize,
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }
}

/// Flood fill over 4-neighbor lattice edges inside `domain`, from every node
/// lying in `seed_discs` plus the node nearest each disc center. Stops early
/// once the boundary ring is reached if `stop_at_boundary` is set.
pub fn flood_fill(barrier: &Barrier, seeds: &[(Point, f64)], domain: &BBox, h: f64, stop_at_boundary: bool) -> Flood {
    let (origin, nx, ny) = lattice_for(domain, h);
    let node = |i: usize, j: usize| Point::new(origin.x + (i as f64 + 0.5) * h, origin.y + (j as f64 + 0.5) * h);
    let mut seen = Bits::new(nx * ny);
    let mut starts: Vec<usize> = Vec::new();
    for &(c, r) in seeds {
        let clamp = |v: f64, n: usize| v.clamp(0.0, (n - 1) as f64) as usize;
        let ci = clamp(((c.x - origin.x) / h - 0.5).round(), nx);
        let cj = clamp(((c.y - origin.y) / h - 0.5).round(), ny);
        starts.push(cj * nx + ci);
        let (i0, i1) = (clamp(((c.x - r - origin.x) / h - 0.5).floor(), nx), clamp(((c.x + r - origin.x) / h - 0.5).ceil(), nx));
        let (j0, j1) = (clamp(((c.y - r - origin.y) / h - 0.5).floor(), ny), clamp(((c.y + r - origin.y) / h - 0.5).ceil(), ny));
        for j in j0..=j1 {
            for i in i0..=i1 {
                if node(i, j).dist(c) <= r {
                    starts.push(j * nx + i);
                }
            }
        }
    }
    let mut out = Flood { filled: 0, edge_cells: 0, hit_boundary: false, components: 0 };
    let mut queue = VecDeque::new();
    for s in starts {
        if seen.get(s) {
            continue;
        }
        out.components += 1;
        seen.set(s);
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            out.filled += 1;
            let (i, j) = (u % nx, u / nx);
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                out.hit_boundary = true;
                if stop_at_boundary {
                    return out;
                }
            }
            let pu = node(i, j);
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (vi, vj) = (i as i64 + di, j as i64 + dj);
                if vi < 0 || vj < 0 || vi >= nx as i64 || vj >= ny as i64 {
                    continue;
                }
                let v = vj as usize * nx + vi as usize;
                if !barrier.visible(pu, node(vi as usize, vj as usize)) {
                    continue;
                }
                if !seen.get(v) {
                    seen.set(v);
                    queue.push_back(v);
                }
            }
        }
    }
    out.edge_cells = count_edge_cells(&seen, nx, ny);
    out
}

fn count_edge_cells(seen: &Bits, nx: usize, ny: usize) -> usize {
    let mut n = 0;
    for j in 0..ny {
        for i in 0..nx {
            let u = j * nx + i;
            if !seen.get(u) {
                continue;
            }
            let edge = i == 0
                || j == 0
                || i == nx - 1
                || j == ny - 1
                || !seen.get(u - 1)
                || !seen.get(u + 1)
                || !seen.get(u - nx)
                || !seen.get(u + nx);
            if edge {
                n += 1;
            }
        }
    }
    n
}

/// Whether the barrier leaves the plane in one piece.
pub fn complement_connected(scene: &Scene) -> bool {
    scene.barrier.bounded_faces() == 0
}

/// Box that contains every bounded complement component: anything bounded is
/// enclosed by the barrier, so the scene box padded by a few cells suffices.
fn burn_domain(scene: &Scene, h: f64, pad_cells: f64) -> BBox {
    scene.bbox().expand(pad_cells * h)
}

pub fn burned_region(scene: &Scene, h: f64) -> BurnReport {
    let unbounded = |comps: usize| BurnReport {
        bounded: false,
        area: f64::INFINITY,
        area_error_band: 0.0,
        cost: f64::INFINITY,
        h,
        component_count: comps,
        filled_cells: 0,
    };
    if complement_connected(scene) {
        return unbounded(1);
    }
    let seeds: Vec<(Point, f64)> = scene.initial.iter().map(|d| (d.center, d.radius)).collect();
    let first = flood_fill(&scene.barrier, &seeds, &burn_domain(scene, h, 3.0), h, true);
    if first.hit_boundary {
        let confirm = flood_fill(&scene.barrier, &seeds, &burn_domain(scene, h, 6.0), h, true);
        if confirm.hit_boundary {
            return unbounded(confirm.components);
        }
    }
    let f = flood_fill(&scene.barrier, &seeds, &burn_domain(scene, h, 3.0), h, false);
    let area = f.filled as f64 * h * h;
    BurnReport {
        bounded: true,
        area,
        area_error_band: f.edge_cells as f64 * h * h,
        cost: area + scene.c0 * scene.barrier.total_length,
        h,
        component_count: f.components,
        filled_cells: f.filled,
    }
}

pub fn total_cost(scene: &Scene, h: f64) -> f64 {
    burned_region(scene, h).cost
}

/// First-order extrapolation of two lattice areas at spacings `h` and `h/2`.
pub fn richardson_area(a_h: f64, a_half: f64) -> f64 {
    2.0 * a_half - a_h
}

/// Area of the region reachable from `seed` inside `domain` without crossing
/// the barrier, or `None` when it reaches the edge of `domain`.
pub fn enclosed_area(barrier: &Barrier, seed: Point, domain: &BBox, h: f64) -> Option<f64> {
    let f = flood_fill(barrier, &[(seed, 0.0)], domain, h, true);
    (!f.hit_boundary).then(|| f.filled as f64 * h * h)
}
