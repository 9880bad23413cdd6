//! Line-oriented scene files.
//!
//! ```text
//! version 1
//! [discs]
//! # x y r
//! 0 0 1
//! [segments]
//! # ax ay bx by
//! 2 -1 2 1
//! [params]
//! sigma = 2.5
//! c0 = 1
//! ```
//!
//! `#` starts a comment. Every parameter has a default, listed in [`Params`].

use std::fmt;
use std::path::Path;

use fireline::geometry::{BBox, Disc, GeometryError, Point, Scene, Segment};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Solver settings and tolerances carried by the scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Params {
    /// Wall-building speed. Default 2.5.
    pub sigma: f64,
    /// Cost per unit barrier length. Default 0.
    pub c0: f64,
    /// Grid spacing for grid fields, burned area and figures. Default 0.02.
    pub grid_h: f64,
    /// Grid stencil order (1 to 3). Default 2.
    pub grid_order: usize,
    /// 0 for exact circles, otherwise vertices per source polygon. Default 0.
    pub source_n: usize,
    /// Barrier samples per unit length for touch profiles. Default 64.
    pub samples_per_unit: f64,
    /// Minimum samples per barrier segment. Default 16.
    pub min_samples: usize,
    /// Admissibility tolerance; 0 means 1e-6 σ times the scene diameter. Default 0.
    pub admissibility_tol: f64,
    /// Sample count for the final-leg integral. Default 4000.
    pub rho_samples: usize,
    /// Density threshold for pruning and detours. Default 0.3.
    pub eps: f64,
    /// Flow box size. Default 0.3.
    pub flowbox_scale: f64,
    /// Anchor candidates tried per pruning run. Default 200.
    pub flowbox_candidates: usize,
    /// Anchor search box (x0 y0 x1 y1); the scene box when absent.
    pub anchor_region: Option<[f64; 4]>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            sigma: 2.5,
            c0: 0.0,
            grid_h: 0.02,
            grid_order: 2,
            source_n: 0,
            samples_per_unit: 64.0,
            min_samples: 16,
            admissibility_tol: 0.0,
            rho_samples: 4000,
            eps: 0.3,
            flowbox_scale: 0.3,
            flowbox_candidates: 200,
            anchor_region: None,
        }
    }
}

impl Params {
    pub fn anchor_bbox(&self) -> Option<BBox> {
        self.anchor_region.map(|[x0, y0, x1, y1]| BBox { min: Point::new(x0, y0), max: Point::new(x1, y1) })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneFile {
    pub discs: Vec<Disc>,
    pub segments: Vec<Segment>,
    pub params: Params,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Discs,
    Segments,
    Params,
}

fn numbers(line: usize, text: &str, n: usize) -> Result<Vec<f64>, ParseError> {
    let v: Vec<f64> = text
        .split_whitespace()
        .map(|w| w.parse::<f64>().map_err(|_| ParseError { line, message: format!("not a number: {w:?}") }))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return err(line, format!("expected {n} numbers, found {}", v.len()));
    }
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return err(line, format!("non-finite value {x}"));
    }
    Ok(v)
}

fn geometry_error(line: usize, e: GeometryError) -> ParseError {
    ParseError { line, message: e.to_string() }
}

impl SceneFile {
    pub fn from_scene(scene: &Scene, params: Params) -> Self {
        SceneFile {
            discs: scene.initial.clone(),
            segments: scene.barrier.segments().to_vec(),
            params: Params { sigma: scene.sigma, c0: scene.c0, ..params },
        }
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut version = None;
        let mut section = Section::None;
        let mut out = SceneFile { discs: Vec::new(), segments: Vec::new(), params: Params::default() };
        let mut seen_keys: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if version.is_none() {
                match line.strip_prefix("version") {
                    Some(v) if v.trim() == "1" => {
                        version = Some(1);
                        continue;
                    }
                    Some(v) => return err(ln, format!("unsupported version {:?}", v.trim())),
                    None => return err(ln, "expected `version 1` first"),
                }
            }
            if line.starts_with('[') {
                section = match line {
                    "[discs]" => Section::Discs,
                    "[segments]" => Section::Segments,
                    "[params]" => Section::Params,
                    _ => return err(ln, format!("unknown section {line}")),
                };
                continue;
            }
            match section {
                Section::None => return err(ln, "data outside a section"),
                Section::Discs => {
                    let v = numbers(ln, line, 3)?;
                    out.discs.push(Disc::new(Point::new(v[0], v[1]), v[2]).map_err(|e| geometry_error(ln, e))?);
                }
                Section::Segments => {
                    let v = numbers(ln, line, 4)?;
                    let s = Segment::new(Point::new(v[0], v[1]), Point::new(v[2], v[3]));
                    out.segments.push(s.map_err(|e| geometry_error(ln, e))?);
                }
                Section::Params => {
                    let Some((key, value)) = line.split_once('=') else {
                        return err(ln, "expected `key = value`");
                    };
                    let (key, value) = (key.trim(), value.trim());
                    if seen_keys.iter().any(|k| k == key) {
                        return err(ln, format!("duplicate key {key}"));
                    }
                    set_param(&mut out.params, ln, key, value)?;
                    seen_keys.push(key.to_string());
                }
            }
        }
        if version.is_none() {
            return err(0, "empty scene file");
        }
        if out.discs.is_empty() {
            return err(0, "no initial discs");
        }
        out.to_scene().map_err(|e| ParseError { line: 0, message: e.to_string() })?;
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ParseError { line: 0, message: e.to_string() })?;
        Self::parse(&text)
    }

    pub fn to_scene(&self) -> Result<Scene, GeometryError> {
        Scene::new(self.discs.clone(), &self.segments, self.params.sigma, self.params.c0)
    }
}

fn set_param(p: &mut Params, ln: usize, key: &str, value: &str) -> Result<(), ParseError> {
    let float = || -> Result<f64, ParseError> {
        match value.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => err(ln, format!("{key}: not a finite number: {value:?}")),
        }
    };
    let count = || -> Result<usize, ParseError> {
        value.parse::<usize>().or_else(|_| err(ln, format!("{key}: not a count: {value:?}")))
    };
    let positive = |x: f64| if x > 0.0 { Ok(x) } else { err(ln, format!("{key} must be positive")) };
    match key {
        "sigma" => p.sigma = float()?,
        "c0" => p.c0 = float()?,
        "grid_h" => p.grid_h = positive(float()?)?,
        "grid_order" => {
            p.grid_order = count()?;
            if !(1..=3).contains(&p.grid_order) {
                return err(ln, "grid_order must be 1, 2 or 3");
            }
        }
        "source_n" => {
            p.source_n = count()?;
            if p.source_n != 0 && p.source_n < 8 {
                return err(ln, "source_n must be 0 or at least 8");
            }
        }
        "samples_per_unit" => p.samples_per_unit = positive(float()?)?,
        "min_samples" => p.min_samples = count()?.max(1),
        "admissibility_tol" => {
            p.admissibility_tol = float()?;
            if p.admissibility_tol < 0.0 {
                return err(ln, "admissibility_tol must be nonnegative");
            }
        }
        "rho_samples" => p.rho_samples = count()?.max(1),
        "eps" => p.eps = positive(float()?)?,
        "flowbox_scale" => p.flowbox_scale = positive(float()?)?,
        "flowbox_candidates" => p.flowbox_candidates = count()?.max(1),
        "anchor_region" => {
            let v = numbers(ln, value, 4)?;
            if !(v[0] < v[2] && v[1] < v[3]) {
                return err(ln, "anchor_region needs x0 < x1 and y0 < y1");
            }
            p.anchor_region = Some([v[0], v[1], v[2], v[3]]);
        }
        _ => return err(ln, format!("unknown key {key}")),
    }
    Ok(())
}

impl fmt::Display for SceneFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "version 1")?;
        writeln!(f, "[discs]")?;
        for d in &self.discs {
            writeln!(f, "{:.16e} {:.16e} {:.16e}", d.center.x, d.center.y, d.radius)?;
        }
        writeln!(f, "[segments]")?;
        for s in &self.segments {
            writeln!(f, "{:.16e} {:.16e} {:.16e} {:.16e}", s.a.x, s.a.y, s.b.x, s.b.y)?;
        }
        writeln!(f, "[params]")?;
        writeln!(f, "sigma = {:.16e}", p.sigma)?;
        writeln!(f, "c0 = {:.16e}", p.c0)?;
        writeln!(f, "grid_h = {:.16e}", p.grid_h)?;
        writeln!(f, "grid_order = {}", p.grid_order)?;
        writeln!(f, "source_n = {}", p.source_n)?;
        writeln!(f, "samples_per_unit = {:.16e}", p.samples_per_unit)?;
        writeln!(f, "min_samples = {}", p.min_samples)?;
        writeln!(f, "admissibility_tol = {:.16e}", p.admissibility_tol)?;
        writeln!(f, "rho_samples = {}", p.rho_samples)?;
        writeln!(f, "eps = {:.16e}", p.eps)?;
        writeln!(f, "flowbox_scale = {:.16e}", p.flowbox_scale)?;
        writeln!(f, "flowbox_candidates = {}", p.flowbox_candidates)?;
        if let Some([a, b, c, d]) = p.anchor_region {
            writeln!(f, "anchor_region = {a:.16e} {b:.16e} {c:.16e} {d:.16e}")?;
        }
        Ok(())
    }
}
