//! How the front meets the barrier over time: the touched length φ(t), the
//! per-component touch windows, admissibility of a construction schedule and
//! the free unit-speed expansion between touches.

use rayon::prelude::*;
use serde::Serialize;

use crate::eikonal_exact::TimeSolver;
use crate::eikonal_grid::GridField;
use crate::geometry::Barrier;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingConfig {
    pub per_unit_length: f64,
    pub min_per_segment: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { per_unit_length: 64.0, min_per_segment: 16 }
    }
}

/// First and last time the front meets one component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComponentInterval {
    pub length: f64,
    /// Smallest T on the component (infinite if never reached).
    pub a: f64,
    /// Largest T just off the component on either side; infinite when some
    /// side of it is never reached.
    pub b: f64,
}

/// Touched length φ(t) = m₁(Γ ∩ closure of R(t)) as a piecewise linear
/// function with breakpoints `sample_times`. `phi[k]` is the value at
/// `sample_times[k]` including any jump there, `slope[k]` the slope up to the
/// next breakpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TouchProfile {
    pub sample_times: Vec<f64>,
    pub phi: Vec<f64>,
    pub slope: Vec<f64>,
    pub components: Vec<ComponentInterval>,
    pub total_length: f64,
    /// Largest arclength gap between samples.
    pub resolution: f64,
    pub diameter: f64,
}

impl TouchProfile {
    pub fn phi_at(&self, t: f64) -> f64 {
        if self.sample_times.is_empty() {
            return 0.0;
        }
        let k = self.sample_times.partition_point(|&s| s <= t);
        if k == 0 {
            return 0.0;
        }
        let k = k - 1;
        (self.phi[k] + self.slope[k] * (t - self.sample_times[k])).min(self.total_length)
    }

    /// Time after which nothing more is touched.
    pub fn last_time(&self) -> f64 {
        self.sample_times.last().copied().unwrap_or(0.0)
    }
}

/// Samples T along every merged barrier piece and assembles φ.
pub fn phi_profile(solver: &TimeSolver, samples_per_segment: usize) -> TouchProfile {
    phi_profile_with(solver, SamplingConfig { min_per_segment: samples_per_segment.max(1), ..Default::default() })
}

pub fn phi_profile_with(solver: &TimeSolver, cfg: SamplingConfig) -> TouchProfile {
    let scene = solver.scene();
    let barrier = &scene.barrier;
    let diameter = scene.diameter();
    let delta = 1e-7 * diameter.max(1.0);

    struct Piece {
        comp: usize,
        len: f64,
        on: Vec<f64>,
        off: Vec<f64>,
    }
    let pieces: Vec<Piece> = barrier
        .pieces()
        .par_iter()
        .map(|&(seg, comp)| {
            let len = seg.length();
            let n = ((cfg.per_unit_length * len).ceil() as usize).max(cfg.min_per_segment).max(1);
            let nrm = seg.direction().perp().unit() * delta;
            let mut on = Vec::with_capacity(n + 1);
            let mut off = Vec::with_capacity(n + 1);
            for k in 0..=n {
                // a rounded sample may sit a hair across the wall, so the
                // closure value is taken as the smaller of the two sides
                let q = seg.at(k as f64 / n as f64);
                let (l, r) = (solver.min_time(q + nrm), solver.min_time(q - nrm));
                on.push(solver.min_time(q).min(l).min(r));
                off.push(l.max(r));
            }
            Piece { comp, len, on, off }
        })
        .collect();

    let mut components: Vec<ComponentInterval> = barrier
        .components
        .iter()
        .map(|c| ComponentInterval { length: c.length, a: f64::INFINITY, b: f64::NEG_INFINITY })
        .collect();
    let mut resolution: f64 = 0.0;
    // (time, slope change, jump, open ramps change)
    let mut events: Vec<(f64, f64, f64, i64)> = vec![(0.0, 0.0, 0.0, 0)];
    for p in &pieces {
        let n = p.on.len() - 1;
        let ds = p.len / n as f64;
        resolution = resolution.max(ds);
        let ci = &mut components[p.comp];
        for (&t, &u) in p.on.iter().zip(&p.off) {
            ci.a = ci.a.min(t);
            ci.b = ci.b.max(u);
        }
        for w in p.on.windows(2) {
            let (lo, hi) = if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            if !lo.is_finite() {
                continue;
            }
            if !hi.is_finite() {
                // only one end is ever reached; give it half the sub-interval
                events.push((lo, 0.0, ds / 2.0, 0));
            } else if hi > lo {
                let s = ds / (hi - lo);
                events.push((lo, s, 0.0, 1));
                events.push((hi, -s, 0.0, -1));
            } else {
                events.push((lo, 0.0, ds, 0));
            }
        }
    }
    for c in &mut components {
        if c.b < c.a {
            c.b = c.a;
        }
    }
    events.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut sample_times = Vec::new();
    let mut phi = Vec::new();
    let mut slope = Vec::new();
    let (mut cur_t, mut cur_phi, mut cur_slope, mut open) = (0.0, 0.0, 0.0, 0i64);
    let mut i = 0;
    while i < events.len() {
        let t = events[i].0;
        cur_phi += cur_slope * (t - cur_t);
        cur_t = t;
        while i < events.len() && events[i].0 == t {
            cur_slope += events[i].1;
            cur_phi += events[i].2;
            open += events[i].3;
            i += 1;
        }
        if open == 0 {
            cur_slope = 0.0;
        }
        sample_times.push(t);
        phi.push(cur_phi.min(barrier.total_length));
        slope.push(cur_slope.max(0.0));
    }
    TouchProfile { sample_times, phi, slope, components, total_length: barrier.total_length, resolution, diameter }
}

/// Per component: is b − a ≤ m₁(Γᵢ) + tol? Components with a side that is
/// never reached, or never reached at all, report false.
pub fn check_touch_interval_bound(profile: &TouchProfile, barrier: &Barrier) -> Vec<bool> {
    check_touch_interval_bound_tol(profile, barrier, 2.0 * profile.resolution + 1e-9)
}

pub fn check_touch_interval_bound_tol(profile: &TouchProfile, barrier: &Barrier, tol: f64) -> Vec<bool> {
    profile
        .components
        .iter()
        .zip(&barrier.components)
        .map(|(ci, c)| ci.a.is_finite() && ci.b.is_finite() && ci.b - ci.a <= c.length + tol)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// min over t of σt − φ(t).
    pub worst_margin: f64,
    pub worst_time: f64,
    pub violation_times: Vec<f64>,
    pub saturation_times: Vec<f64>,
    pub tolerance: f64,
    pub resolution: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmissibilityConfig {
    /// Absolute tolerance; `None` means 1e-6 σ times the scene diameter.
    pub tolerance: Option<f64>,
    /// Breakpoints with σt − φ(t) within this fraction of σt count as saturated.
    pub saturation_rel: f64,
    /// Only times at or after this are examined.
    pub from_time: f64,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        AdmissibilityConfig { tolerance: None, saturation_rel: 0.02, from_time: 0.0 }
    }
}

pub fn admissibility(profile: &TouchProfile, sigma: f64) -> AdmissibilityReport {
    admissibility_with(profile, sigma, &AdmissibilityConfig::default())
}

/// σt − φ(t) is linear between breakpoints and only jumps down at them, so
/// its infimum is attained at a breakpoint (value after the jump).
pub fn admissibility_with(profile: &TouchProfile, sigma: f64, cfg: &AdmissibilityConfig) -> AdmissibilityReport {
    let tol = cfg.tolerance.unwrap_or(1e-6 * sigma * profile.diameter.max(1.0));
    let mut times: Vec<f64> = profile.sample_times.iter().copied().filter(|&t| t >= cfg.from_time).collect();
    if cfg.from_time > 0.0 || times.is_empty() {
        times.insert(0, cfg.from_time);
    }
    let mut worst = f64::INFINITY;
    let mut worst_time = cfg.from_time;
    let mut violation_times = Vec::new();
    let mut saturation_times = Vec::new();
    for &t in &times {
        let m = sigma * t - profile.phi_at(t);
        if m < worst {
            worst = m;
            worst_time = t;
        }
        if m < -tol {
            violation_times.push(t);
        } else if m <= tol.max(cfg.saturation_rel * sigma * t) && profile.phi_at(t) > 0.0 {
            saturation_times.push(t);
        }
    }
    AdmissibilityReport {
        admissible: worst >= -tol,
        worst_margin: worst,
        worst_time,
        violation_times,
        saturation_times,
        tolerance: tol,
        resolution: profile.resolution,
    }
}

/// m₁([τ, τ′] minus the union of the touch windows).
pub fn free_time(profile: &TouchProfile, tau: f64, tau_prime: f64) -> f64 {
    let mut iv: Vec<(f64, f64)> = profile
        .components
        .iter()
        .filter(|c| c.a.is_finite())
        .map(|c| (c.a.max(tau), c.b.min(tau_prime)))
        .filter(|(lo, hi)| hi > lo)
        .collect();
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut covered = 0.0;
    let mut end = tau;
    for (lo, hi) in iv {
        let lo = lo.max(end);
        if hi > lo {
            covered += hi - lo;
            end = hi;
        }
    }
    (tau_prime - tau - covered).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub passed: bool,
    pub r: f64,
    /// Nodes within distance r of the set {T ≤ τ}.
    pub checked: usize,
    /// Largest T − τ′ among them.
    pub worst_excess: f64,
}

/// Checks B(R(τ), r) ⊆ closure R(τ′) on the nodes of `field`: every node
/// within lattice distance r of a node with T ≤ τ must have T ≤ τ′ + slack.
pub fn unit_expansion_check(field: &GridField, tau: f64, tau_prime: f64, profile: &TouchProfile, slack: f64) -> ExpansionReport {
    let r = free_time(profile, tau, tau_prime);
    let (nx, ny) = (field.nx, field.ny);
    let seed: Vec<bool> = field.times.iter().map(|&t| t <= tau).collect();
    let d2 = squared_distance_transform(&seed, nx, ny);
    let lim = r / field.h;
    let lim2 = lim * lim * (1.0 + 1e-12);
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    for (k, &d) in d2.iter().enumerate() {
        if d <= lim2 {
            checked += 1;
            worst = worst.max(field.times[k] - tau_prime);
        }
    }
    ExpansionReport { passed: worst <= slack, r, checked, worst_excess: worst }
}

/// Exact squared Euclidean distance (in cells) to the nearest `true` cell,
/// one 1D lower-envelope pass per axis.
pub fn squared_distance_transform(mask: &[bool], nx: usize, ny: usize) -> Vec<f64> {
    let mut f: Vec<f64> = mask.iter().map(|&m| if m { 0.0 } else { f64::INFINITY }).collect();
    let mut buf = vec![0.0; nx.max(ny)];
    let mut out = vec![0.0; nx.max(ny)];
    for i in 0..nx {
        for j in 0..ny {
            buf[j] = f[j * nx + i];
        }
        dt1(&buf[..ny], &mut out[..ny]);
        for j in 0..ny {
            f[j * nx + i] = out[j];
        }
    }
    for j in 0..ny {
        buf[..nx].copy_from_slice(&f[j * nx..(j + 1) * nx]);
        dt1(&buf[..nx], &mut out[..nx]);
        f[j * nx..(j + 1) * nx].copy_from_slice(&out[..nx]);
    }
    f
}

fn dt1(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        d.iter_mut().for_each(|x| *x = f64::INFINITY);
        return;
    }
    let mut v: Vec<usize> = Vec::with_capacity(sites.len());
    let mut z: Vec<f64> = Vec::with_capacity(sites.len() + 1);
    let inter = |p: usize, q: usize| ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
    for &q in &sites {
        loop {
            match v.last() {
                Some(&p) if inter(p, q) <= z[z.len() - 1] => {
                    v.pop();
                    z.pop();
                }
                _ => break,
            }
        }
        let s = match v.last() {
            Some(&p) => inter(p, q),
            None => f64::NEG_INFINITY,
        };
        v.push(q);
        z.push(s);
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (q, dq) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dx = q as f64 - p as f64;
        *dq = dx * dx + f[p];
    }
}
