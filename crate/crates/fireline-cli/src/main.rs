//! `fireline`: scene files in, JSON reports and SVG figures out.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input.

mod lemmas;
mod scene_file;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use fireline::burnedcost::burned_region;
use fireline::detour::sparse_detour_with;
use fireline::eikonal_exact::{SolverConfig, SourceModel, TimeSolver};
use fireline::eikonal_grid::{solve_grid_with, GridConfig, GridField};
use fireline::firefront::{admissibility_with, phi_profile_with, AdmissibilityConfig, SamplingConfig};
use fireline::flowbox::{demo_anchor_region, demo_scene, improve, FlowBoxConfig};
use fireline::geometry::{polygonalize_disc, Disc, Point, Scene, Segment};
use fireline::strategy::{spiral_scene, SpiralSpec};
use serde_json::{json, Value};

use scene_file::{Params, SceneFile};

#[derive(Parser)]
#[command(name = "fireline", version, about = "Fire fronts, barrier checks and pruning for the dynamic blocking problem")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimum fire arrival times at probe points, or a sampled field.
    Solve {
        scene: PathBuf,
        /// Probe point `x,y`; repeatable.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        probe: Vec<Point>,
        /// Use the grid solver instead of the exact one.
        #[arg(long)]
        grid: bool,
        /// Write the sampled time field as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write fronts at evenly spaced times as SVG.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Number of fronts in the SVG.
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[arg(long)]
        json: bool,
    },
    /// Whether the barrier can be built in time (touched length at most σt).
    Verify {
        scene: PathBuf,
    },
    /// Burned area and total cost.
    Cost {
        scene: PathBuf,
    },
    /// A detour from P to Q around a sparse barrier.
    Detour {
        scene: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: Point,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        to: Point,
        /// Density threshold; the scene's `eps` when absent.
        #[arg(long)]
        eps: Option<f64>,
        /// Skip the density hypotheses and attempt the construction anyway.
        #[arg(long)]
        unchecked: bool,
        /// Write the path graph as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Remove the barrier inside one flow box and certify the result.
    Prune {
        scene: PathBuf,
        /// Density threshold; the scene's `eps` when absent.
        #[arg(long)]
        eps: Option<f64>,
        /// Write the pruned scene file here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a figure with the flow box shaded.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Invariant checks on a scene file or a suite: default, sweep or empty.
    Lemmas {
        #[arg(default_value = "default")]
        target: String,
        /// Added to every bound; negative values tighten the checks.
        #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
        slack: f64,
        #[arg(long)]
        json: bool,
    },
    /// Print a bundled scene file: corner, empty, radial, circle, fast-circle,
    /// spiral or dust.
    Scene {
        name: String,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|_| format!("bad x in {s:?}"))?;
    let y: f64 = y.trim().parse().map_err(|_| format!("bad y in {s:?}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("non-finite point {s:?}"));
    }
    Ok(Point::new(x, y))
}

enum Outcome {
    Ok,
    CheckFailed,
}

/// Non-finite numbers become the strings "inf", "-inf" or "nan".
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format!("{x}"))
    }
}

/// Writes a line to stdout, ignoring a closed pipe.
fn out(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json(v: &Value) {
    out(&serde_json::to_string_pretty(v).expect("json"));
}

pub(crate) fn solver_for(scene: &Scene, params: &Params) -> anyhow::Result<TimeSolver> {
    if params.source_n == 0 {
        return Ok(TimeSolver::build(scene));
    }
    let cfg = SolverConfig { source: SourceModel::Polygon(params.source_n), ..Default::default() };
    Ok(TimeSolver::with_config(scene, cfg)?)
}

fn load(path: &Path) -> anyhow::Result<(SceneFile, Scene)> {
    let file = SceneFile::read(path).with_context(|| path.display().to_string())?;
    let scene = file.to_scene()?;
    Ok((file, scene))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(path: &Path, probes: &[Point], grid: bool, csv: Option<&Path>, svg_out: Option<&Path>, levels: usize, as_json: bool) -> anyhow::Result<Outcome> {
    let (file, scene) = load(path)?;
    let p = &file.params;
    let gcfg = GridConfig { order: p.grid_order, ..Default::default() };
    let field = if grid {
        Some(solve_grid_with(&scene, p.grid_h, &gcfg)?)
    } else {
        None
    };
    let solver = if grid { None } else { Some(solver_for(&scene, p)?) };
    let time = |x: Point| match (&field, &solver) {
        (Some(f), _) => f.probe(x, &scene),
        (_, Some(s)) => s.min_time(x),
        _ => unreachable!(),
    };
    let values: Vec<(Point, f64)> = probes.iter().map(|&x| (x, time(x))).collect();
    if as_json {
        let v: Vec<Value> = values.iter().map(|(x, t)| json!({"x": x.x, "y": x.y, "t": num(*t)})).collect();
        print_json(&json!({"solver": if grid { "grid" } else { "exact" }, "probes": v}));
    } else {
        for (_, t) in &values {
            out(&t.to_string());
        }
    }
    if csv.is_some() || svg_out.is_some() {
        let sampled;
        let f = match &field {
            Some(f) => f,
            None => {
                let dom = scene.bbox().expand(1.0);
                sampled = GridField::from_solver(solver.as_ref().unwrap(), dom, p.grid_h.max(dom.diagonal() / 400.0));
                &sampled
            }
        };
        if let Some(c) = csv {
            write(c, &f.to_csv())?;
        }
        if let Some(s) = svg_out {
            let t_max = f.times.iter().copied().filter(|t| t.is_finite()).fold(0.0, f64::max);
            let mut fig = svg::Figure::new(f.bbox());
            fig.scene(&scene);
            for k in 1..=levels {
                let t = t_max * k as f64 / (levels + 1) as f64;
                for pl in f.level_set(t) {
                    fig.front(&pl.points, pl.closed);
                }
            }
            write(s, &fig.render())?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_verify(path: &Path) -> anyhow::Result<Outcome> {
    let (file, scene) = load(path)?;
    let p = &file.params;
    let solver = solver_for(&scene, p)?;
    let profile = phi_profile_with(&solver, SamplingConfig { per_unit_length: p.samples_per_unit, min_per_segment: p.min_samples });
    let tol = (p.admissibility_tol > 0.0).then_some(p.admissibility_tol);
    let r = admissibility_with(&profile, scene.sigma, &AdmissibilityConfig { tolerance: tol, ..Default::default() });
    let components: Vec<Value> = profile
        .components
        .iter()
        .map(|c| json!({"length": c.length, "a": num(c.a), "b": num(c.b)}))
        .collect();
    print_json(&json!({
        "admissible": r.admissible,
        "sigma": scene.sigma,
        "worst_margin": num(r.worst_margin),
        "worst_time": num(r.worst_time),
        "violation_times": r.violation_times,
        "saturation_times": r.saturation_times.len(),
        "tolerance": r.tolerance,
        "resolution": r.resolution,
        "total_length": profile.total_length,
        "components": components,
    }));
    Ok(if r.admissible { Outcome::Ok } else { Outcome::CheckFailed })
}

fn cmd_cost(path: &Path) -> anyhow::Result<Outcome> {
    let (file, scene) = load(path)?;
    let r = burned_region(&scene, file.params.grid_h);
    print_json(&json!({
        "bounded": r.bounded,
        "area": num(r.area),
        "area_error_band": num(r.area_error_band),
        "barrier_length": scene.barrier.total_length,
        "c0": scene.c0,
        "cost": num(r.cost),
        "h": r.h,
        "component_count": r.component_count,
        "filled_cells": r.filled_cells,
    }));
    Ok(Outcome::Ok)
}

fn cmd_detour(path: &Path, from: Point, to: Point, eps: Option<f64>, unchecked: bool, csv: Option<&Path>) -> anyhow::Result<Outcome> {
    let (file, scene) = load(path)?;
    let eps = eps.unwrap_or(file.params.eps);
    if !(eps > 0.0 && eps.is_finite()) {
        bail!("eps must be positive");
    }
    let d = match sparse_detour_with(from, to, &scene.barrier, eps, !unchecked) {
        Ok(d) => d,
        Err(e) => {
            print_json(&json!({"ok": false, "error": e.to_string()}));
            return Ok(Outcome::CheckFailed);
        }
    };
    let kappa = from.dist(to) / 2.0;
    let bound = 2.0 * kappa + 9.0 * eps * scene.barrier.total_length;
    let visible = d.points.windows(2).all(|w| scene.barrier.visible(w[0], w[1]));
    let within = d.length <= bound * (1.0 + 1e-12);
    if let Some(c) = csv {
        write(c, &d.to_csv())?;
    }
    let points: Vec<[f64; 2]> = d.points.iter().map(|q| [q.x, q.y]).collect();
    print_json(&json!({
        "ok": within && visible,
        "length": d.length,
        "bound": bound,
        "within_bound": within,
        "legs_visible": visible,
        "slope_bound": d.slope_bound,
        "meet": d.meet,
        "barrier_mass": d.barrier_mass,
        "points": points,
    }));
    Ok(if within && visible { Outcome::Ok } else { Outcome::CheckFailed })
}

fn cmd_prune(path: &Path, eps: Option<f64>, out: Option<&Path>, svg_out: Option<&Path>, seed: u64) -> anyhow::Result<Outcome> {
    let (file, scene) = load(path)?;
    let p = &file.params;
    let eps = eps.unwrap_or(p.eps);
    if !(eps > 0.0 && eps.is_finite()) {
        bail!("eps must be positive");
    }
    let cfg = FlowBoxConfig {
        scale: p.flowbox_scale,
        region: p.anchor_bbox(),
        candidates: p.flowbox_candidates,
        h_grid: p.grid_h,
        ..Default::default()
    };
    let im = match improve(&scene, eps, &cfg, seed) {
        Ok(im) => im,
        Err(e) => {
            let kind = format!("{e:?}");
            let kind = kind.split(['(', ' ', '{']).next().unwrap_or("").to_string();
            print_json(&json!({"ok": false, "kind": kind, "error": e.to_string()}));
            return Ok(Outcome::CheckFailed);
        }
    };
    if let Some(o) = out {
        write(o, &SceneFile::from_scene(&im.pruned.scene, *p).to_string())?;
    }
    if let Some(s) = svg_out {
        let mut fig = svg::Figure::new(scene.bbox());
        fig.scene(&im.pruned.scene);
        fig.region(&im.flowbox.region);
        write(s, &fig.render())?;
    }
    let fb = &im.flowbox;
    let report = serde_json::to_value(&im.report)?;
    print_json(&json!({
        "ok": im.report.passed,
        "removed_length": im.pruned.removed_length,
        "segments_cut": im.pruned.segments_cut,
        "flowbox": {
            "anchor": [fb.frame.origin.x, fb.frame.origin.y],
            "t_bar": fb.frame.t_bar,
            "t0": fb.t0,
            "h": fb.h,
            "area": fb.area(),
            "mass_inside": fb.mass_inside,
            "clearance": fb.clearance,
            "region_vertices": fb.region.len(),
        },
        "certificate": report,
    }));
    Ok(if im.report.passed { Outcome::Ok } else { Outcome::CheckFailed })
}

fn cmd_lemmas(target: &str, slack: f64, as_json: bool, seed: u64) -> anyhow::Result<Outcome> {
    let mut rows = Vec::new();
    let path = Path::new(target);
    if path.is_file() {
        let (file, scene) = load(path)?;
        rows.extend(lemmas::scene_rows(target, &scene, &file.params, slack, seed)?);
    } else {
        let params = Params::default();
        match target {
            "default" => {
                for (name, scene) in lemmas::bundled_scenes(seed)? {
                    rows.extend(lemmas::scene_rows(&name, &scene, &params, slack, seed)?);
                }
                rows.extend(lemmas::sweep_rows(false, slack, seed)?);
            }
            "sweep" => rows.extend(lemmas::sweep_rows(false, slack, seed)?),
            "empty" => {
                let scene = Scene::new(vec![Disc::new(Point::new(0.0, 0.0), 1.0)?], &[], 2.5, 0.0)?;
                rows.extend(lemmas::scene_rows("empty", &scene, &params, slack, seed)?);
                rows.extend(lemmas::sweep_rows(true, slack, seed)?);
            }
            _ => bail!("{target}: not a scene file or a suite (default, sweep, empty)"),
        }
    }
    if as_json {
        print_json(&serde_json::to_value(&rows)?);
    } else {
        out(lemmas::table(&rows).trim_end());
    }
    Ok(if rows.iter().all(|r| r.passed) { Outcome::Ok } else { Outcome::CheckFailed })
}

fn ring(center: Point, r: f64, n: usize) -> anyhow::Result<Vec<Segment>> {
    Ok(polygonalize_disc(&Disc::new(center, r)?, n)?.segments())
}

fn cmd_scene(name: &str, seed: u64) -> anyhow::Result<Outcome> {
    let o = Point::new(0.0, 0.0);
    let unit = vec![Disc::new(o, 1.0)?];
    let mut params = Params::default();
    let scene = match name {
        "corner" => Scene::new(unit, &[Segment::new(Point::new(2.0, -1.0), Point::new(2.0, 1.0))?], 2.5, 0.0)?,
        "empty" => Scene::new(unit, &[], 2.5, 0.0)?,
        "radial" => Scene::new(unit, &[Segment::new(Point::new(2.0, 0.0), Point::new(3.0, 0.0))?], 2.5, 0.0)?,
        "circle" => Scene::new(unit, &ring(o, 3.0, 256)?, 10.0, 1.0)?,
        "fast-circle" => Scene::new(unit, &ring(o, 1.5, 256)?, 2.5, 0.0)?,
        "spiral" => spiral_scene(&SpiralSpec::new(0.1, 2.5)?, 1.0)?,
        "dust" => {
            let r = demo_anchor_region();
            params.anchor_region = Some([r.min.x, r.min.y, r.max.x, r.max.y]);
            demo_scene(seed, 1.0)?
        }
        _ => bail!("unknown scene {name}"),
    };
    out(SceneFile::from_scene(&scene, params).to_string().trim_end());
    Ok(Outcome::Ok)
}

fn set_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("FIRELINE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| anyhow!("FIRELINE_THREADS: not a count: {v:?}"))?;
    if n == 0 {
        bail!("FIRELINE_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    set_threads()?;
    match cli.cmd {
        Cmd::Solve { scene, probe, grid, csv, svg, levels, json } => {
            cmd_solve(&scene, &probe, grid, csv.as_deref(), svg.as_deref(), levels, json)
        }
        Cmd::Verify { scene } => cmd_verify(&scene),
        Cmd::Cost { scene } => cmd_cost(&scene),
        Cmd::Detour { scene, from, to, eps, unchecked, csv } => cmd_detour(&scene, from, to, eps, unchecked, csv.as_deref()),
        Cmd::Prune { scene, eps, out, svg } => cmd_prune(&scene, eps, out.as_deref(), svg.as_deref(), cli.seed),
        Cmd::Lemmas { target, slack, json } => cmd_lemmas(&target, slack, json, cli.seed),
        Cmd::Scene { name } => cmd_scene(&name, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
