//! Hue maps and the section-wise color symmetry of rectangular images.
//!
//! A rectangle's symmetry group `D_2 = {e, α, β_h, β_v}` splits an image into
//! four sections (ne, nw, se, sw). One section is the reference and keeps its
//! colors; every other section is reached from it by exactly one non-identity
//! element, and its pixels get their hue rewritten by that element's hue map.
//! Saturation and value are never touched.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::raster::{Canvas, Rgb};

#[derive(Debug, Error)]
pub enum HueError {
    #[error("hue {0} is not finite")]
    Domain(f64),
    #[error("pixel ({x}, {y}) outside a {width}x{height} image")]
    OutOfRange {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("unknown hue map {0:?}")]
    UnknownMap(String),
    #[error("unknown section {0:?} (expected ne, nw, se or sw)")]
    UnknownSection(String),
    #[error("hue table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("reading hue table: {0}")]
    Io(#[from] std::io::Error),
}

/// A color in HSV space; all components in `[0, 1]`, hue in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvColor {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl HsvColor {
    pub fn new(h: f64, s: f64, v: f64) -> Self {
        Self { h: wrap_unit(h), s, v }
    }
}

/// Reduces `x` mod 1 into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvColor {
    let (rf, gf, bf) = (r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0);
    let max = rf.max(gf).max(bf);
    let min = rf.min(gf).min(bf);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let h = if delta == 0.0 {
        0.0
    } else if max == rf {
        ((gf - bf) / delta).rem_euclid(6.0) / 6.0
    } else if max == gf {
        ((bf - rf) / delta + 2.0) / 6.0
    } else {
        ((rf - gf) / delta + 4.0) / 6.0
    };
    HsvColor::new(h, s, max)
}

pub fn hsv_to_rgb(c: HsvColor) -> Rgb {
    let h6 = wrap_unit(c.h) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let v = c.v;
    let p = v * (1.0 - c.s);
    let q = v * (1.0 - c.s * f);
    let t = v * (1.0 - c.s * (1.0 - f));
    let (r, g, b) = match sector as u8 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    let byte = |x: f64| (x * 255.0).round().clamp(0.0, 255.0) as u8;
    Rgb::new(byte(r), byte(g), byte(b))
}

/// A function from hue to hue.
#[derive(Debug, Clone, PartialEq)]
pub enum HueMap {
    Identity,
    /// `0.45|sin(√2·20πh)| + 0.55|sin(20πh)|`
    F1,
    /// `0.5(1 + sin(40πh))`
    F2,
    /// `4h(1 − h)`
    F3,
    /// `4h(h − 1) + 1`
    F4,
    /// `0.15(1 + cos(40πh)) + 0.5h`
    F5,
    /// `k·h mod 1`
    Fk(u32),
    /// 256-entry lookup; hue `h` reads entry `⌊256h⌋`.
    Table(Vec<f64>),
}

impl HueMap {
    /// The formula value before reduction into `[0, 1)`.
    pub fn raw(&self, h: f64) -> f64 {
        match self {
            HueMap::Identity => h,
            HueMap::F1 => {
                0.45 * (SQRT_2 * 20.0 * PI * h).sin().abs() + 0.55 * (20.0 * PI * h).sin().abs()
            }
            HueMap::F2 => 0.5 * (1.0 + (40.0 * PI * h).sin()),
            HueMap::F3 => 4.0 * h * (1.0 - h),
            HueMap::F4 => 4.0 * h * (h - 1.0) + 1.0,
            HueMap::F5 => 0.15 * (1.0 + (40.0 * PI * h).cos()) + 0.5 * h,
            HueMap::Fk(k) => *k as f64 * h,
            HueMap::Table(table) => {
                let idx = ((h * 256.0).floor() as usize).min(255);
                table[idx]
            }
        }
    }

    pub fn eval(&self, h: f64) -> Result<f64, HueError> {
        if !h.is_finite() {
            return Err(HueError::Domain(h));
        }
        Ok(wrap_unit(self.raw(wrap_unit(h))))
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, HueMap::Identity | HueMap::Fk(1))
    }

    /// Parses a table file: exactly 256 lines, each a decimal in `[0, 1)`.
    pub fn parse_table(text: &str) -> Result<Self, HueError> {
        let lines: Vec<&str> = text.trim_end().lines().collect();
        let mut table = Vec::with_capacity(256);
        for (i, line) in lines.iter().enumerate() {
            let value: f64 = line.trim().parse().map_err(|_| HueError::Table {
                line: i + 1,
                message: format!("{:?} is not a number", line.trim()),
            })?;
            if !(0.0..1.0).contains(&value) {
                return Err(HueError::Table {
                    line: i + 1,
                    message: format!("{value} is outside [0, 1)"),
                });
            }
            table.push(value);
        }
        if table.len() != 256 {
            return Err(HueError::Table {
                line: table.len(),
                message: format!("expected 256 entries, found {}", table.len()),
            });
        }
        Ok(HueMap::Table(table))
    }

    pub fn load_table(path: &Path) -> Result<Self, HueError> {
        Self::parse_table(&std::fs::read_to_string(path)?)
    }

    /// Resolves a map name, reading `table:PATH` from disk.
    pub fn resolve(spec: &str) -> Result<Self, HueError> {
        match spec.trim().strip_prefix("table:") {
            Some(path) => Self::load_table(Path::new(path)),
            None => spec.parse(),
        }
    }
}

impl fmt::Display for HueMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HueMap::Identity => write!(f, "identity"),
            HueMap::F1 => write!(f, "f1"),
            HueMap::F2 => write!(f, "f2"),
            HueMap::F3 => write!(f, "f3"),
            HueMap::F4 => write!(f, "f4"),
            HueMap::F5 => write!(f, "f5"),
            HueMap::Fk(k) => write!(f, "fk{k}"),
            HueMap::Table(_) => write!(f, "table"),
        }
    }
}

/// Built-in names: `identity`, `f1`…`f5`, `fk<k>` (also `fk:<k>`, `fk=<k>`).
impl FromStr for HueMap {
    type Err = HueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        Ok(match t.as_str() {
            "identity" | "id" | "e" => HueMap::Identity,
            "f1" => HueMap::F1,
            "f2" => HueMap::F2,
            "f3" => HueMap::F3,
            "f4" => HueMap::F4,
            "f5" => HueMap::F5,
            _ => {
                let k = t
                    .strip_prefix("fk")
                    .map(|r| r.trim_start_matches([':', '=']))
                    .and_then(|r| r.parse::<u32>().ok())
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| HueError::UnknownMap(s.to_string()))?;
                HueMap::Fk(k)
            }
        })
    }
}

pub fn eval_hue_map(m: &HueMap, h: f64) -> Result<f64, HueError> {
    m.eval(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Section {
    Ne,
    Nw,
    Se,
    Sw,
}

impl Section {
    fn is_east(self) -> bool {
        matches!(self, Section::Ne | Section::Se)
    }

    fn is_south(self) -> bool {
        matches!(self, Section::Se | Section::Sw)
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Section::Ne => "ne",
            Section::Nw => "nw",
            Section::Se => "se",
            Section::Sw => "sw",
        })
    }
}

impl FromStr for Section {
    type Err = HueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ne" => Ok(Section::Ne),
            "nw" => Ok(Section::Nw),
            "se" => Ok(Section::Se),
            "sw" => Ok(Section::Sw),
            _ => Err(HueError::UnknownSection(s.to_string())),
        }
    }
}

/// Section of pixel `(x, y)`, with `y` growing downward.
///
/// Columns `x >= ⌈width/2⌉` are east and rows `y >= ⌈height/2⌉` are south, so
/// for odd sizes the west and north halves get the extra column/row.
pub fn classify_section(x: usize, y: usize, width: usize, height: usize) -> Result<Section, HueError> {
    if x >= width || y >= height {
        return Err(HueError::OutOfRange { x, y, width, height });
    }
    Ok(section_of(x, y, width, height))
}

#[inline]
fn section_of(x: usize, y: usize, width: usize, height: usize) -> Section {
    let east = x >= width.div_ceil(2);
    let south = y >= height.div_ceil(2);
    match (east, south) {
        (true, false) => Section::Ne,
        (false, false) => Section::Nw,
        (true, true) => Section::Se,
        (false, true) => Section::Sw,
    }
}

/// Hue maps for the three non-identity elements of `D_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionAssignment {
    pub reference: Section,
    /// `α`, the half turn: the diagonally opposite section.
    pub rotation: HueMap,
    /// `β_v`, mirror in the vertical axis: the horizontal neighbor.
    pub reflect_v: HueMap,
    /// `β_h`, mirror in the horizontal axis: the vertical neighbor.
    pub reflect_h: HueMap,
}

impl SectionAssignment {
    pub fn identity(reference: Section) -> Self {
        Self {
            reference,
            rotation: HueMap::Identity,
            reflect_v: HueMap::Identity,
            reflect_h: HueMap::Identity,
        }
    }

    /// The map applied to pixels of `section`; `None` for the reference.
    pub fn map_for(&self, section: Section) -> Option<&HueMap> {
        let r = self.reference;
        match (section.is_east() != r.is_east(), section.is_south() != r.is_south()) {
            (false, false) => None,
            (true, true) => Some(&self.rotation),
            (true, false) => Some(&self.reflect_v),
            (false, true) => Some(&self.reflect_h),
        }
    }
}

/// A raster of HSV pixels, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<HsvColor>,
}

impl HsvImage {
    pub fn from_canvas(canvas: &Canvas) -> Self {
        let pixels = (0..canvas.height())
            .flat_map(|y| (0..canvas.width()).map(move |x| (x, y)))
            .map(|(x, y)| {
                let p = canvas.get(x, y);
                rgb_to_hsv(p.r, p.g, p.b)
            })
            .collect();
        Self {
            width: canvas.width(),
            height: canvas.height(),
            pixels,
        }
    }

    pub fn get(&self, x: usize, y: usize) -> HsvColor {
        self.pixels[y * self.width + x]
    }
}

pub fn apply_d2_color_symmetry(image: &HsvImage, assignment: &SectionAssignment) -> HsvImage {
    let (w, h) = (image.width, image.height);
    let mut pixels = image.pixels.clone();
    if w > 0 {
        pixels.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, px) in row.iter_mut().enumerate() {
                if let Some(map) = assignment.map_for(section_of(x, y, w, h)) {
                    // Hues are finite by construction.
                    px.h = wrap_unit(map.raw(px.h));
                }
            }
        });
    }
    HsvImage {
        width: w,
        height: h,
        pixels,
    }
}

/// The same transform on an RGB canvas. Pixels in the reference section, or
/// in a section whose map is the identity, are copied byte for byte.
pub fn apply_d2_to_canvas(canvas: &Canvas, assignment: &SectionAssignment) -> Canvas {
    let (w, h) = (canvas.width(), canvas.height());
    let mut out = canvas.clone();
    out.rows_mut().enumerate().for_each(|(y, row)| {
        for (x, px) in row.chunks_exact_mut(3).enumerate() {
            let Some(map) = assignment.map_for(section_of(x, y, w, h)) else {
                continue;
            };
            if map.is_identity() {
                continue;
            }
            let mut hsv = rgb_to_hsv(px[0], px[1], px[2]);
            hsv.h = wrap_unit(map.raw(hsv.h));
            let rgb = hsv_to_rgb(hsv);
            px.copy_from_slice(&[rgb.r, rgb.g, rgb.b]);
        }
    });
    out
}
