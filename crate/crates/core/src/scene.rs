//! Scene files: motifs, symmetry replication and rendering.
//!
//! A scene is a line-oriented block file. Section headers in brackets open a
//! block; `key = value` lines fill it. A `#` at the start of a line or
//! followed by a space starts a comment.
//!
//! ```text
//! [canvas]
//! width = 600
//! height = 450
//! background = black          # name, `r g b` or `#rrggbb`
//! grid = 3 4                  # optional R×C cell grid
//! margin = 0.05               # grid inset, fraction of the cell size
//! dot_radius = 1
//! palette = colors.txt        # optional RYB display palette
//! crop = 0 0 300 450          # optional x y w h, applied last
//!
//! [sim]
//! sigma = 3
//! grains = 2000
//! seed = 42                   # the CLI --seed overrides this
//!
//! [image]
//! source = source.png
//! ref = ne                    # optional D2 transform of the source
//! map_rot = f1
//! map_refl_v = f2
//! map_refl_h = f3
//!
//! [fibonacci]                 # carrier circle for `fib = j` placements
//! anchor = 150 225
//! base_radius = 80
//! unit = 3
//!
//! [motif]
//! cell = 0 0                  # or `center = x y`, `fib = j`, `cell = auto`
//! curve = rose_sin 40 3       # circle r | rose_cos a l | spiral g d k
//! color = red                 # wheel color, `r g b`, `#rrggbb` or `sample`
//! orientation = 0             # degrees
//!
//! [replicate]
//! motifs = 0                  # indices, or `all`
//! group = 12
//! center = 300 225            # default: canvas center
//! elements = a4 b
//! mode = mirror_exact         # or resample
//! color.a4 = r->b, y->r, b->y # wheel permutation per element
//! hue.b = f3                  # hue map per element (RGB/sampled colors)
//! ```
//!
//! Group elements act counter-clockwise as seen on the image, about the
//! replication center; `β` mirrors in the vertical line through it unless
//! `axis` (degrees) says otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::colorwheel::{ColorError, ColorPermutation, PermutationAssignment, WheelColor};
use crate::curves::{fibonacci_layout, FibLayout, RadiusCurve};
use crate::geom::Point;
use crate::huemap::{self, HueError, HueMap, SectionAssignment};
use crate::raster::{self, Canvas, RasterError, Rgb, RybPalette};
use crate::stigmergy::{self, ColorSource, Grain, Nest, SimError, SimParams};
use crate::symgroup::{self, DihedralGroup, GroupElement, Isometry};

/// One problem found while checking a scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scene:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Issue>),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Hue(#[from] HueError),
    #[error(transparent)]
    Color(#[from] ColorError),
}

impl SceneError {
    /// Whether the failure came from the file system rather than the input.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            SceneError::Raster(RasterError::Io(_)) | SceneError::Hue(HueError::Io(_)) | SceneError::Sim(SimError::Io(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanvasSpec {
    pub width: usize,
    pub height: usize,
    pub background: Rgb,
    pub grid: Option<(usize, usize)>,
    pub margin: f64,
    pub dot_radius: u32,
    pub crop: Option<(usize, usize, usize, usize)>,
}

impl Default for CanvasSpec {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            background: Rgb::BLACK,
            grid: None,
            margin: 0.05,
            dot_radius: 1,
            crop: None,
        }
    }
}

impl CanvasSpec {
    pub fn center(&self) -> Point {
        Point::new((self.width as f64 - 1.0) / 2.0, (self.height as f64 - 1.0) / 2.0)
    }
}

/// A rectangle of whole pixels, `x..x+w` by `y..y+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Cell {
    pub fn center(&self) -> Point {
        Point::new(
            self.x as f64 + (self.w as f64 - 1.0) / 2.0,
            self.y as f64 + (self.h as f64 - 1.0) / 2.0,
        )
    }
}

/// The `rows × cols` cells of a canvas, row-major. Cell edges fall on
/// `⌊i·W/C⌋` and `⌊j·H/R⌋`, so the cells tile the canvas exactly.
pub fn grid_cells(width: usize, height: usize, rows: usize, cols: usize) -> Vec<Cell> {
    let xs: Vec<usize> = (0..=cols).map(|c| c * width / cols).collect();
    let ys: Vec<usize> = (0..=rows).map(|r| r * height / rows).collect();
    let mut cells = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            cells.push(Cell {
                x: xs[c],
                y: ys[r],
                w: xs[c + 1] - xs[c],
                h: ys[r + 1] - ys[r],
            });
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    Center(Point),
    Cell { row: usize, col: usize },
    /// 1-based slot on the scene's Fibonacci carrier circle.
    Fibonacci(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MotifColor {
    Wheel(WheelColor),
    Rgb(Rgb),
    Sample,
}

impl fmt::Display for MotifColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MotifColor::Wheel(c) => write!(f, "{c}"),
            MotifColor::Rgb(c) => write!(f, "{c}"),
            MotifColor::Sample => write!(f, "sample"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotifSpec {
    pub placement: Placement,
    /// `None` only for Fibonacci placements, which then use a circle of the
    /// slot's Fibonacci radius.
    pub curve: Option<RadiusCurve>,
    pub color: MotifColor,
    pub orientation_deg: f64,
    pub forage: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReplicationMode {
    /// Copies share the original's grains, moved and recolored.
    #[default]
    MirrorExact,
    /// Copies are new nests at the moved position, simulated separately.
    Resample,
}

/// How one element recolors a copy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColorRule {
    /// For wheel-colored motifs.
    pub permutation: Option<ColorPermutation>,
    /// For RGB and image-sampled motifs; saturation and value are kept.
    pub hue: Option<HueMap>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSpec {
    /// Motif indices; empty means every motif.
    pub motifs: Vec<usize>,
    pub group: DihedralGroup,
    pub center: Option<Point>,
    pub axis_deg: f64,
    pub elements: Vec<GroupElement>,
    pub rules: BTreeMap<GroupElement, ColorRule>,
    pub mode: ReplicationMode,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub canvas: CanvasSpec,
    pub motifs: Vec<MotifSpec>,
    pub replications: Vec<ReplicationSpec>,
    pub sim: SimParams,
    pub source_image: Option<PathBuf>,
    pub d2_transform: Option<SectionAssignment>,
    pub palette: Option<PathBuf>,
    pub fibonacci: Option<FibLayout>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Canvas,
    Sim,
    Image,
    Fibonacci,
    Motif,
    Replicate,
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

struct RawBlock<'a> {
    kind: Block,
    line: usize,
    entries: Vec<Entry<'a>>,
}

/// A `#` opens a comment at the start of a line or when followed by
/// whitespace, so `#rrggbb` colors survive.
fn strip_comment(raw: &str) -> &str {
    let bytes = raw.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (raw[..i].trim().is_empty() || bytes.get(i + 1).is_none_or(|c| c.is_ascii_whitespace())) {
            return &raw[..i];
        }
    }
    raw
}

fn lex(text: &str) -> Result<Vec<RawBlock<'_>>, SceneError> {
    let mut blocks: Vec<RawBlock> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw);
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| SceneError::Syntax {
                line,
                column: indent + trimmed.len(),
                message: "section header is missing `]`".into(),
            })?;
            let kind = match name.trim() {
                "canvas" => Block::Canvas,
                "sim" => Block::Sim,
                "image" => Block::Image,
                "fibonacci" => Block::Fibonacci,
                "motif" => Block::Motif,
                "replicate" => Block::Replicate,
                other => {
                    return Err(SceneError::Syntax {
                        line,
                        column: indent + 2,
                        message: format!("unknown section [{other}]"),
                    })
                }
            };
            blocks.push(RawBlock {
                kind,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(SceneError::Syntax {
                line,
                column: indent + 1,
                message: "expected `key = value` or a [section] header".into(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(SceneError::Syntax {
                line,
                column: indent + 1,
                message: "missing key before `=`".into(),
            });
        }
        let Some(block) = blocks.last_mut() else {
            return Err(SceneError::Syntax {
                line,
                column: indent + 1,
                message: "setting outside of any section".into(),
            });
        };
        block.entries.push(Entry {
            line,
            key,
            value: value.trim(),
        });
    }
    Ok(blocks)
}

/// Collects issues while a scene is being interpreted.
struct Checker {
    issues: Vec<Issue>,
}

impl Checker {
    fn push(&mut self, line: Option<usize>, field: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            line,
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn value<T>(&mut self, e: &Entry, parsed: Result<T, String>) -> Option<T> {
        match parsed {
            Ok(v) => Some(v),
            Err(msg) => {
                self.push(Some(e.line), e.key, msg);
                None
            }
        }
    }
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot parse {s:?} as a number"))
}

fn nums<T: std::str::FromStr>(s: &str, count: usize) -> Result<Vec<T>, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != count {
        return Err(format!("expected {count} numbers, got {:?}", s));
    }
    parts.into_iter().map(num).collect()
}

fn point(s: &str) -> Result<Point, String> {
    let v: Vec<f64> = nums(s, 2)?;
    Ok(Point::new(v[0], v[1]))
}

fn rgb(s: &str) -> Result<Rgb, String> {
    let t = s.trim();
    if let Some(hex) = t.strip_prefix('#') {
        if hex.len() == 6 {
            if let Ok(v) = u32::from_str_radix(hex, 16) {
                return Ok(Rgb::new((v >> 16) as u8, (v >> 8) as u8, v as u8));
            }
        }
        return Err(format!("bad hex color {t:?}"));
    }
    match t {
        "black" => return Ok(Rgb::BLACK),
        "white" => return Ok(Rgb::WHITE),
        _ => {}
    }
    let v: Vec<u8> = nums(t, 3).map_err(|_| format!("bad color {t:?}"))?;
    Ok(Rgb::new(v[0], v[1], v[2]))
}

fn motif_color(s: &str) -> Result<MotifColor, String> {
    let t = s.trim();
    if t == "sample" {
        return Ok(MotifColor::Sample);
    }
    if let Ok(c) = t.parse::<WheelColor>() {
        return Ok(MotifColor::Wheel(c));
    }
    rgb(t).map(MotifColor::Rgb)
}

fn curve(s: &str) -> Result<RadiusCurve, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let c = match parts.as_slice() {
        ["circle", r] => RadiusCurve::Circle { r: num(r)? },
        ["rose_sin", a, l] => RadiusCurve::RoseSin { a: num(a)?, leaves: num(l)? },
        ["rose_cos", a, l] => RadiusCurve::RoseCos { a: num(a)?, leaves: num(l)? },
        ["spiral", g, d, k] => RadiusCurve::Spiral {
            gamma: num(g)?,
            delta: num(d)?,
            turns: num(k)?,
        },
        _ => {
            return Err(format!(
                "expected `circle r`, `rose_sin a l`, `rose_cos a l` or `spiral g d k`, got {s:?}"
            ))
        }
    };
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn parse_canvas(block: &RawBlock, scene: &mut Scene, ck: &mut Checker) {
    let c = &mut scene.canvas;
    for e in &block.entries {
        match e.key {
            "width" => c.width = ck.value(e, num(e.value)).unwrap_or(c.width),
            "height" => c.height = ck.value(e, num(e.value)).unwrap_or(c.height),
            "background" => c.background = ck.value(e, rgb(e.value)).unwrap_or(c.background),
            "grid" => {
                c.grid = ck.value(e, nums::<usize>(e.value, 2)).map(|v| (v[0], v[1]));
                if c.grid.is_some_and(|(r, cc)| r == 0 || cc == 0) {
                    ck.push(Some(e.line), e.key, "grid needs at least one row and column");
                }
            }
            "margin" => {
                c.margin = ck.value(e, num(e.value)).unwrap_or(c.margin);
                if !(0.0..0.5).contains(&c.margin) {
                    ck.push(Some(e.line), e.key, "margin must be in [0, 0.5)");
                }
            }
            "dot_radius" => c.dot_radius = ck.value(e, num(e.value)).unwrap_or(c.dot_radius),
            "palette" => scene.palette = Some(PathBuf::from(e.value)),
            "crop" => c.crop = ck.value(e, nums::<usize>(e.value, 4)).map(|v| (v[0], v[1], v[2], v[3])),
            other => ck.push(Some(e.line), other, "unknown canvas setting"),
        }
    }
    if c.width == 0 || c.height == 0 {
        ck.push(Some(block.line), "canvas", "width and height must be at least 1");
    }
    if let Some((x, y, w, h)) = c.crop {
        if w == 0 || h == 0 || x + w > c.width || y + h > c.height {
            ck.push(Some(block.line), "crop", "crop rectangle must be nonempty and inside the canvas");
        }
    }
}

fn parse_sim(block: &RawBlock, sim: &mut SimParams, ck: &mut Checker) {
    for e in &block.entries {
        match e.key {
            "sigma" => sim.sigma = ck.value(e, num(e.value)).unwrap_or(sim.sigma),
            "p_deposit_max" => sim.p_deposit_max = ck.value(e, num(e.value)).unwrap_or(sim.p_deposit_max),
            "p_pickup" => sim.p_pickup = ck.value(e, num(e.value)).unwrap_or(sim.p_pickup),
            "step_len" => sim.step_len = ck.value(e, num(e.value)),
            "forage_min" => sim.forage_min = ck.value(e, num(e.value)),
            "forage_max" => sim.forage_max = ck.value(e, num(e.value)),
            "ants_per_nest" | "ants" => {
                sim.ants_per_nest = ck.value(e, num(e.value)).unwrap_or(sim.ants_per_nest)
            }
            "grains" | "grains_total" => {
                sim.grains_total = ck.value(e, num(e.value)).unwrap_or(sim.grains_total)
            }
            "max_steps" => sim.max_steps = ck.value(e, num(e.value)).unwrap_or(sim.max_steps),
            "seed" => sim.seed = ck.value(e, num(e.value)).unwrap_or(sim.seed),
            "jitter" | "jitter_deg" => sim.jitter_deg = ck.value(e, num(e.value)).unwrap_or(sim.jitter_deg),
            other => ck.push(Some(e.line), other, "unknown sim setting"),
        }
    }
    if let Err(SimError::Invalid(problems)) = sim.validate() {
        for p in problems {
            ck.push(Some(block.line), "sim", p);
        }
    }
}

fn parse_image(block: &RawBlock, scene: &mut Scene, ck: &mut Checker) {
    let mut reference = None;
    let mut maps: [Option<HueMap>; 3] = [None, None, None];
    for e in &block.entries {
        let slot = match e.key {
            "source" => {
                scene.source_image = Some(PathBuf::from(e.value));
                continue;
            }
            "ref" | "reference" => {
                reference = ck.value(e, e.value.parse().map_err(|err: HueError| err.to_string()));
                continue;
            }
            "map_rot" => 0,
            "map_refl_v" => 1,
            "map_refl_h" => 2,
            other => {
                ck.push(Some(e.line), other, "unknown image setting");
                continue;
            }
        };
        maps[slot] = ck.value(e, HueMap::resolve(e.value).map_err(|err| err.to_string()));
    }
    let any_map = maps.iter().any(Option::is_some);
    match reference {
        Some(reference) => {
            let [rot, v, h] = maps;
            scene.d2_transform = Some(SectionAssignment {
                reference,
                rotation: rot.unwrap_or(HueMap::Identity),
                reflect_v: v.unwrap_or(HueMap::Identity),
                reflect_h: h.unwrap_or(HueMap::Identity),
            });
        }
        None if any_map => ck.push(Some(block.line), "ref", "hue maps given without a reference section"),
        None => {}
    }
}

fn parse_fibonacci(block: &RawBlock, ck: &mut Checker) -> FibLayout {
    let mut f = FibLayout {
        count: 0,
        unit: 1.0,
        anchor: Point::ORIGIN,
        base_radius: 100.0,
    };
    for e in &block.entries {
        match e.key {
            "anchor" => f.anchor = ck.value(e, point(e.value)).unwrap_or(f.anchor),
            "base_radius" => f.base_radius = ck.value(e, num(e.value)).unwrap_or(f.base_radius),
            "unit" => f.unit = ck.value(e, num(e.value)).unwrap_or(f.unit),
            "count" => f.count = ck.value(e, num(e.value)).unwrap_or(f.count),
            other => ck.push(Some(e.line), other, "unknown fibonacci setting"),
        }
    }
    if f.unit.is_nan() || f.unit <= 0.0 {
        ck.push(Some(block.line), "unit", "must be > 0");
    }
    f
}

fn parse_motif(block: &RawBlock, auto_cell: &mut usize, scene: &Scene, ck: &mut Checker) -> Option<MotifSpec> {
    let mut placements = Vec::new();
    let mut curve_v = None;
    let mut color = None;
    let mut orientation_deg = 0.0;
    let mut forage = None;
    for e in &block.entries {
        match e.key {
            "center" => placements.extend(ck.value(e, point(e.value)).map(Placement::Center)),
            "cell" => {
                let parsed = if e.value == "auto" {
                    match scene.canvas.grid {
                        Some((rows, cols)) if *auto_cell < rows * cols => {
                            let p = Placement::Cell {
                                row: *auto_cell / cols,
                                col: *auto_cell % cols,
                            };
                            *auto_cell += 1;
                            Ok(p)
                        }
                        Some(_) => Err("every grid cell is already taken".to_string()),
                        None => Err("`cell = auto` needs a [canvas] grid".to_string()),
                    }
                } else {
                    nums::<usize>(e.value, 2).map(|v| Placement::Cell { row: v[0], col: v[1] })
                };
                placements.extend(ck.value(e, parsed));
            }
            "fib" => placements.extend(ck.value(e, num(e.value)).map(Placement::Fibonacci)),
            "curve" => curve_v = ck.value(e, curve(e.value)),
            "color" => color = ck.value(e, motif_color(e.value)),
            "orientation" => orientation_deg = ck.value(e, num(e.value)).unwrap_or(0.0),
            "forage" => {
                forage = ck.value(e, nums::<f64>(e.value, 2)).map(|v| (v[0], v[1]));
                if forage.is_some_and(|(lo, hi)| !(lo >= 0.0 && lo < hi)) {
                    ck.push(Some(e.line), e.key, "need 0 <= inner < outer");
                }
            }
            other => ck.push(Some(e.line), other, "unknown motif setting"),
        }
    }
    let line = Some(block.line);
    if placements.is_empty() && scene.canvas.grid.is_some() {
        if let Some((rows, cols)) = scene.canvas.grid {
            if *auto_cell < rows * cols {
                placements.push(Placement::Cell {
                    row: *auto_cell / cols,
                    col: *auto_cell % cols,
                });
                *auto_cell += 1;
            }
        }
    }
    if placements.len() != 1 {
        ck.push(line, "placement", "set exactly one of center, cell, fib");
        return None;
    }
    let placement = placements[0];
    match placement {
        Placement::Cell { row, col } => match scene.canvas.grid {
            Some((rows, cols)) if row < rows && col < cols => {}
            Some(_) => ck.push(line, "cell", "cell outside the grid"),
            None => ck.push(line, "cell", "cell placement needs a [canvas] grid"),
        },
        Placement::Fibonacci(j) => {
            if scene.fibonacci.is_none() {
                ck.push(line, "fib", "fib placement needs a [fibonacci] block before the motif");
            }
            if j == 0 {
                ck.push(line, "fib", "slots are numbered from 1");
            }
        }
        Placement::Center(_) => {}
    }
    if curve_v.is_none() && !matches!(placement, Placement::Fibonacci(_)) {
        ck.push(line, "curve", "missing curve");
    }
    let Some(color) = color else {
        ck.push(line, "color", "missing color");
        return None;
    };
    Some(MotifSpec {
        placement,
        curve: curve_v,
        color,
        orientation_deg,
        forage,
    })
}

fn parse_replicate(block: &RawBlock, motif_count: usize, ck: &mut Checker) -> Option<ReplicationSpec> {
    let find = |key: &str| block.entries.iter().find(|e| e.key == key);
    let line = Some(block.line);
    let n = match find("group") {
        Some(e) => ck.value(e, num::<u32>(e.value).and_then(|n| {
            if n == 0 {
                Err("group degree must be at least 1".to_string())
            } else {
                Ok(n)
            }
        }))?,
        None => {
            ck.push(line, "group", "missing group degree");
            return None;
        }
    };
    let group = DihedralGroup::new(n).ok()?;
    let parse_el = |s: &str| symgroup::parse_element(s, n).map_err(|e| e.to_string());
    let mut spec = ReplicationSpec {
        motifs: Vec::new(),
        group,
        center: None,
        axis_deg: 90.0,
        elements: Vec::new(),
        rules: BTreeMap::new(),
        mode: ReplicationMode::MirrorExact,
    };
    for e in &block.entries {
        match e.key {
            "group" => {}
            "motifs" => {
                if e.value != "all" {
                    let list: Result<Vec<usize>, String> = e.value.split_whitespace().map(num).collect();
                    if let Some(list) = ck.value(e, list) {
                        for &m in &list {
                            if m >= motif_count {
                                ck.push(Some(e.line), e.key, format!("no motif {m} defined above"));
                            }
                        }
                        spec.motifs = list;
                    }
                }
            }
            "center" => spec.center = ck.value(e, point(e.value)),
            "axis" => spec.axis_deg = ck.value(e, num(e.value)).unwrap_or(90.0),
            "elements" => {
                let list: Result<Vec<_>, String> = e.value.split_whitespace().map(parse_el).collect();
                spec.elements = ck.value(e, list).unwrap_or_default();
            }
            "mode" => {
                spec.mode = match e.value {
                    "mirror_exact" => ReplicationMode::MirrorExact,
                    "resample" => ReplicationMode::Resample,
                    other => {
                        ck.push(Some(e.line), e.key, format!("unknown mode {other:?}"));
                        ReplicationMode::MirrorExact
                    }
                }
            }
            key => {
                let (kind, name) = match key.split_once('.') {
                    Some((k @ ("color" | "hue"), name)) => (k, name),
                    _ => {
                        ck.push(Some(e.line), key, "unknown replicate setting");
                        continue;
                    }
                };
                let Some(g) = ck.value(e, parse_el(name)) else {
                    continue;
                };
                let rule = spec.rules.entry(g).or_default();
                if kind == "color" {
                    rule.permutation = ck.value(e, e.value.parse().map_err(|err: ColorError| err.to_string()));
                } else {
                    rule.hue = ck.value(e, HueMap::resolve(e.value).map_err(|err| err.to_string()));
                }
            }
        }
    }
    if spec.elements.is_empty() {
        ck.push(line, "elements", "list at least one group element");
    }
    let perms: BTreeMap<_, _> = spec
        .rules
        .iter()
        .filter_map(|(g, r)| r.permutation.clone().map(|p| (*g, p)))
        .collect();
    if let Err(e) = PermutationAssignment::new(group, perms) {
        ck.push(line, "color", e.to_string());
    }
    Some(spec)
}

/// Parses a scene file. Every semantic problem is reported at once.
pub fn parse_scene(text: &str) -> Result<Scene, SceneError> {
    let blocks = lex(text)?;
    let mut scene = Scene::default();
    let mut ck = Checker { issues: Vec::new() };
    let mut auto_cell = 0;
    let mut seen_once = Vec::new();
    for block in &blocks {
        if matches!(block.kind, Block::Canvas | Block::Sim | Block::Image | Block::Fibonacci) {
            if seen_once.contains(&block.kind) {
                ck.push(Some(block.line), "section", "section may appear only once");
            }
            seen_once.push(block.kind);
        }
        match block.kind {
            Block::Canvas => parse_canvas(block, &mut scene, &mut ck),
            Block::Sim => parse_sim(block, &mut scene.sim, &mut ck),
            Block::Image => parse_image(block, &mut scene, &mut ck),
            Block::Fibonacci => scene.fibonacci = Some(parse_fibonacci(block, &mut ck)),
            Block::Motif => {
                if let Some(m) = parse_motif(block, &mut auto_cell, &scene, &mut ck) {
                    scene.motifs.push(m);
                }
            }
            Block::Replicate => {
                if let Some(r) = parse_replicate(block, scene.motifs.len(), &mut ck) {
                    scene.replications.push(r);
                }
            }
        }
    }
    if scene.source_image.is_none() {
        if scene.motifs.iter().any(|m| m.color == MotifColor::Sample) {
            ck.push(None, "source", "a motif samples its color from the source image, but [image] source is not set");
        }
        if scene.d2_transform.is_some() {
            ck.push(None, "source", "a D2 transform needs [image] source");
        }
    }
    if ck.issues.is_empty() {
        Ok(scene)
    } else {
        Err(SceneError::Invalid(ck.issues))
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(RasterError::Io)?;
    let mut scene = parse_scene(&text)?;
    if let Some(dir) = path.parent() {
        scene.resolve_paths(dir);
    }
    Ok(scene)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

impl fmt::Display for Scene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.canvas;
        writeln!(f, "[canvas]")?;
        writeln!(f, "width = {}", c.width)?;
        writeln!(f, "height = {}", c.height)?;
        writeln!(f, "background = {}", c.background)?;
        if let Some((r, cc)) = c.grid {
            writeln!(f, "grid = {r} {cc}")?;
        }
        writeln!(f, "margin = {}", c.margin)?;
        writeln!(f, "dot_radius = {}", c.dot_radius)?;
        if let Some(p) = &self.palette {
            writeln!(f, "palette = {}", p.display())?;
        }
        if let Some((x, y, w, h)) = c.crop {
            writeln!(f, "crop = {x} {y} {w} {h}")?;
        }

        let s = &self.sim;
        writeln!(f, "\n[sim]")?;
        writeln!(f, "sigma = {}", s.sigma)?;
        writeln!(f, "p_deposit_max = {}", s.p_deposit_max)?;
        writeln!(f, "p_pickup = {}", s.p_pickup)?;
        if let Some(v) = s.step_len {
            writeln!(f, "step_len = {v}")?;
        }
        if let Some(v) = s.forage_min {
            writeln!(f, "forage_min = {v}")?;
        }
        if let Some(v) = s.forage_max {
            writeln!(f, "forage_max = {v}")?;
        }
        writeln!(f, "ants_per_nest = {}", s.ants_per_nest)?;
        writeln!(f, "grains = {}", s.grains_total)?;
        writeln!(f, "max_steps = {}", s.max_steps)?;
        writeln!(f, "seed = {}", s.seed)?;
        writeln!(f, "jitter = {}", s.jitter_deg)?;

        if self.source_image.is_some() || self.d2_transform.is_some() {
            writeln!(f, "\n[image]")?;
            if let Some(p) = &self.source_image {
                writeln!(f, "source = {}", p.display())?;
            }
            if let Some(t) = &self.d2_transform {
                writeln!(f, "ref = {}", t.reference)?;
                writeln!(f, "map_rot = {}", t.rotation)?;
                writeln!(f, "map_refl_v = {}", t.reflect_v)?;
                writeln!(f, "map_refl_h = {}", t.reflect_h)?;
            }
        }

        if let Some(fib) = &self.fibonacci {
            writeln!(f, "\n[fibonacci]")?;
            writeln!(f, "anchor = {} {}", fib.anchor.x, fib.anchor.y)?;
            writeln!(f, "base_radius = {}", fib.base_radius)?;
            writeln!(f, "unit = {}", fib.unit)?;
            writeln!(f, "count = {}", fib.count)?;
        }

        for m in &self.motifs {
            writeln!(f, "\n[motif]")?;
            match m.placement {
                Placement::Center(p) => writeln!(f, "center = {} {}", p.x, p.y)?,
                Placement::Cell { row, col } => writeln!(f, "cell = {row} {col}")?,
                Placement::Fibonacci(j) => writeln!(f, "fib = {j}")?,
            }
            if let Some(c) = &m.curve {
                writeln!(f, "curve = {c}")?;
            }
            writeln!(f, "color = {}", m.color)?;
            writeln!(f, "orientation = {}", m.orientation_deg)?;
            if let Some((lo, hi)) = m.forage {
                writeln!(f, "forage = {lo} {hi}")?;
            }
        }

        for r in &self.replications {
            writeln!(f, "\n[replicate]")?;
            if r.motifs.is_empty() {
                writeln!(f, "motifs = all")?;
            } else {
                let list: Vec<String> = r.motifs.iter().map(|m| m.to_string()).collect();
                writeln!(f, "motifs = {}", list.join(" "))?;
            }
            writeln!(f, "group = {}", r.group.degree())?;
            if let Some(p) = r.center {
                writeln!(f, "center = {} {}", p.x, p.y)?;
            }
            writeln!(f, "axis = {}", r.axis_deg)?;
            let els: Vec<String> = r.elements.iter().map(ascii_element).collect();
            writeln!(f, "elements = {}", els.join(" "))?;
            let mode = match r.mode {
                ReplicationMode::MirrorExact => "mirror_exact",
                ReplicationMode::Resample => "resample",
            };
            writeln!(f, "mode = {mode}")?;
            for (g, rule) in &r.rules {
                if let Some(p) = &rule.permutation {
                    let pairs: Vec<String> =
                        p.pairs().map(|(a, b)| format!("{}->{}", a.abbrev(), b.abbrev())).collect();
                    writeln!(f, "color.{} = {}", ascii_element(g), pairs.join(", "))?;
                }
                if let Some(h) = &rule.hue {
                    writeln!(f, "hue.{} = {}", ascii_element(g), h)?;
                }
            }
        }
        Ok(())
    }
}

fn ascii_element(g: &GroupElement) -> String {
    match (g.is_reflection(), g.exponent()) {
        (false, 0) => "e".into(),
        (false, k) => format!("a{k}"),
        (true, 0) => "b".into(),
        (true, k) => format!("ba{k}"),
    }
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

impl Scene {
    /// Makes relative file references relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.source_image, &mut self.palette].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        match self.canvas.grid {
            Some((rows, cols)) => grid_cells(self.canvas.width, self.canvas.height, rows, cols),
            None => Vec::new(),
        }
    }

    /// Center and wall curve of motif `index`, after grid fitting.
    pub fn motif_geometry(&self, index: usize) -> (Point, RadiusCurve) {
        let m = &self.motifs[index];
        match m.placement {
            Placement::Center(p) => (p, m.curve.expect("checked at parse time")),
            Placement::Cell { row, col } => {
                let (_, cols) = self.canvas.grid.expect("checked at parse time");
                let cell = self.cells()[row * cols + col];
                let curve = m.curve.expect("checked at parse time");
                // Keep the wall (plus 3σ of spread) inside the inset cell.
                let half = cell.w.min(cell.h) as f64 / 2.0 * (1.0 - 2.0 * self.canvas.margin);
                let room = half - 3.0 * self.sim.sigma;
                let fitted = if room > 0.0 && curve.max_radius() > room {
                    curve.scaled(room / curve.max_radius())
                } else {
                    curve
                };
                (cell.center(), fitted)
            }
            Placement::Fibonacci(j) => {
                let layout = self.fibonacci.expect("checked at parse time");
                let circles = fibonacci_layout(&FibLayout { count: j, ..layout });
                let (center, radius) = circles[j - 1];
                (center, m.curve.unwrap_or(RadiusCurve::Circle { r: radius }))
            }
        }
    }
}

/// Options that are not part of the scene itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct RenderOptions {
    /// Overrides `[sim] seed`.
    pub seed: Option<u64>,
    /// Worker threads for the simulation; 0 = one per CPU.
    pub threads: usize,
}

/// Everything a render produced.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub canvas: Canvas,
    /// `(nest id, grain)` in plotting order. Motif `i` has id `i`; copies
    /// get ids after the motifs, in replication/element/motif order.
    pub grains: Vec<(usize, Grain)>,
    pub warnings: Vec<String>,
}

fn flip(p: Point) -> Point {
    Point::new(p.x, -p.y)
}

/// `element` about `center` as seen on the image (y grows downward).
fn canvas_isometry(rep: &ReplicationSpec, element: GroupElement, center: Point) -> impl Fn(Point) -> Point {
    let iso = Isometry {
        center: flip(center),
        element,
        axis_phase: rep.axis_deg.to_radians(),
    };
    move |p| flip(iso.apply(flip(p)))
}

fn recolor_rgb(color: Rgb, map: &HueMap) -> Rgb {
    if map.is_identity() {
        return color;
    }
    let mut hsv = huemap::rgb_to_hsv(color.r, color.g, color.b);
    hsv.h = huemap::wrap_unit(map.raw(hsv.h));
    huemap::hsv_to_rgb(hsv)
}

/// Color a motif ends up with after `element`'s rule.
#[derive(Debug, Clone, PartialEq)]
enum CopyColor {
    Wheel(WheelColor),
    Hue(HueMap),
}

fn copy_color(color: &MotifColor, rep: &ReplicationSpec, g: GroupElement) -> Result<CopyColor, SceneError> {
    let rule = rep.rules.get(&g);
    let missing = |what: &str| {
        SceneError::Invalid(vec![Issue {
            line: None,
            field: format!("{what}.{}", ascii_element(&g)),
            message: format!("no color rule for element {g}"),
        }])
    };
    match color {
        MotifColor::Wheel(c) => match rule.and_then(|r| r.permutation.as_ref()) {
            Some(p) => Ok(CopyColor::Wheel(p.apply(*c)?)),
            None if g.is_identity() => Ok(CopyColor::Wheel(*c)),
            None => Err(missing("color")),
        },
        MotifColor::Rgb(_) | MotifColor::Sample => match rule.and_then(|r| r.hue.clone()) {
            Some(h) => Ok(CopyColor::Hue(h)),
            None if g.is_identity() => Ok(CopyColor::Hue(HueMap::Identity)),
            None => Err(missing("hue")),
        },
    }
}

/// Moves a nest's frame with an isometry.
fn transform_nest(nest: &Nest, map: &impl Fn(Point) -> Point) -> Nest {
    let u = Point::polar(nest.orientation);
    let perp = Point::new(-u.y, u.x);
    let v = if nest.mirrored { perp * -1.0 } else { perp };
    let c2 = map(nest.center);
    let u2 = map(nest.center + u) - c2;
    let v2 = map(nest.center + v) - c2;
    Nest {
        center: c2,
        orientation: u2.angle(),
        mirrored: u2.cross(v2) < 0.0,
        ..nest.clone()
    }
}

/// Copies of one motif under every element of `rep`.
///
/// In mirror-exact mode each copy carries the original's grains, moved by
/// the element and recolored by its rule. In resample mode the copies carry
/// no grains; they are new nests to be simulated.
pub fn replicate_motif(
    nest: &Nest,
    color: &MotifColor,
    rep: &ReplicationSpec,
    grains: &[Grain],
    palette: &RybPalette,
    default_center: Point,
) -> Result<Vec<(Nest, Vec<Grain>)>, SceneError> {
    let center = rep.center.unwrap_or(default_center);
    let mut out = Vec::with_capacity(rep.elements.len());
    for &g in &rep.elements {
        let map = canvas_isometry(rep, g, center);
        let mut copy = transform_nest(nest, &map);
        let recolor = copy_color(color, rep, g)?;
        if let CopyColor::Wheel(c) = recolor {
            copy.color_source = ColorSource::Fixed(raster::realize_color(c, palette));
        }
        let moved = match rep.mode {
            ReplicationMode::Resample => Vec::new(),
            ReplicationMode::MirrorExact => grains
                .iter()
                .map(|grain| Grain {
                    position: map(grain.position),
                    color: match &recolor {
                        CopyColor::Wheel(c) => raster::realize_color(*c, palette),
                        CopyColor::Hue(h) => recolor_rgb(grain.color, h),
                    },
                })
                .collect(),
        };
        out.push((copy, moved));
    }
    Ok(out)
}

fn sample_source(source: &Canvas, scene: &CanvasSpec, p: Point) -> Rgb {
    let sx = source.width() as f64 / scene.width as f64;
    let sy = source.height() as f64 / scene.height as f64;
    let x = ((p.x + 0.5) * sx - 0.5).round().clamp(0.0, source.width() as f64 - 1.0);
    let y = ((p.y + 0.5) * sy - 0.5).round().clamp(0.0, source.height() as f64 - 1.0);
    source.get(x as usize, y as usize)
}

/// Reads `CHROMAGLYPH_THREADS` (unset or 0 = one worker per CPU).
pub fn threads_from_env() -> usize {
    std::env::var("CHROMAGLYPH_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

pub fn render_scene(scene: &Scene) -> Result<Canvas, SceneError> {
    Ok(render_scene_with(scene, RenderOptions::default())?.canvas)
}

/// A nest to simulate plus what happens to its grains afterwards.
struct Job {
    nest: Nest,
    sampled: bool,
    hue: Option<HueMap>,
}

pub fn render_scene_with(scene: &Scene, opts: RenderOptions) -> Result<Rendered, SceneError> {
    let palette = match &scene.palette {
        Some(p) => RybPalette::load(p)?,
        None => RybPalette::default(),
    };
    let source = match &scene.source_image {
        Some(path) => {
            let img = raster::read_image(path)?;
            Some(match &scene.d2_transform {
                Some(t) => huemap::apply_d2_to_canvas(&img, t),
                None => img,
            })
        }
        None => None,
    };
    let mut params = scene.sim.clone();
    if let Some(seed) = opts.seed {
        params.seed = seed;
    }
    let mut warnings = Vec::new();
    let canvas_center = scene.canvas.center();

    // Original motifs.
    let mut jobs: Vec<Job> = Vec::new();
    for (i, m) in scene.motifs.iter().enumerate() {
        let (center, curve) = scene.motif_geometry(i);
        let color_source = match m.color {
            MotifColor::Wheel(c) => ColorSource::Fixed(raster::realize_color(c, &palette)),
            MotifColor::Rgb(c) => ColorSource::Fixed(c),
            MotifColor::Sample => ColorSource::SampleImage,
        };
        let mut nest = Nest::new(i, center, curve, color_source);
        nest.orientation = m.orientation_deg.to_radians();
        nest.forage = m.forage;
        let reach = curve.max_radius() + 4.0 * params.sigma;
        let (w, h) = (scene.canvas.width as f64, scene.canvas.height as f64);
        if center.x - reach < 0.0 || center.y - reach < 0.0 || center.x + reach > w || center.y + reach > h {
            warnings.push(format!("motif {i}: wall extends past the canvas edge"));
        }
        jobs.push(Job {
            nest,
            sampled: m.color == MotifColor::Sample,
            hue: None,
        });
    }

    let targets = |rep: &ReplicationSpec| -> Vec<usize> {
        if rep.motifs.is_empty() {
            (0..scene.motifs.len()).collect()
        } else {
            rep.motifs.clone()
        }
    };

    // Resampled copies are simulated alongside the originals.
    for rep in scene.replications.iter().filter(|r| r.mode == ReplicationMode::Resample) {
        for &g in &rep.elements {
            for m in targets(rep) {
                let single = ReplicationSpec {
                    elements: vec![g],
                    ..rep.clone()
                };
                let (nest, _) = replicate_motif(&jobs[m].nest, &scene.motifs[m].color, &single, &[], &palette, canvas_center)?
                    .pop()
                    .expect("one element");
                let hue = match copy_color(&scene.motifs[m].color, rep, g)? {
                    CopyColor::Hue(h) => Some(h),
                    CopyColor::Wheel(_) => None,
                };
                let id = jobs.len();
                jobs.push(Job {
                    nest: Nest { id, ..nest },
                    sampled: jobs[m].sampled,
                    hue,
                });
            }
        }
    }

    let nests: Vec<Nest> = jobs.iter().map(|j| j.nest.clone()).collect();
    let max_steps = params.max_steps;
    let state = stigmergy::init_sim(nests, params)?;
    let outcome = stigmergy::run_until_empty(state, max_steps, opts.threads);
    if !outcome.completed {
        warnings.push(format!("simulation stopped after {max_steps} steps with grains left"));
    }

    // Realized grains per nest.
    let mut grains: Vec<Vec<Grain>> = Vec::with_capacity(jobs.len());
    for (job, sim) in jobs.iter().zip(&outcome.state.nests) {
        let mut list = sim.deposited.clone();
        if job.sampled {
            let src = source.as_ref().expect("checked at parse time");
            for g in &mut list {
                g.color = sample_source(src, &scene.canvas, g.position);
            }
        }
        if let Some(h) = &job.hue {
            for g in &mut list {
                g.color = recolor_rgb(g.color, h);
            }
        }
        grains.push(list);
    }

    let mut plotted: Vec<(usize, Grain)> = Vec::new();
    for (id, list) in grains.iter().enumerate().take(scene.motifs.len()) {
        plotted.extend(list.iter().map(|g| (id, *g)));
    }
    let mut next_id = jobs.len();
    let mut resampled_id = scene.motifs.len();
    for rep in &scene.replications {
        for &g in &rep.elements {
            for m in targets(rep) {
                match rep.mode {
                    ReplicationMode::Resample => {
                        plotted.extend(grains[resampled_id].iter().map(|gr| (resampled_id, *gr)));
                        resampled_id += 1;
                    }
                    ReplicationMode::MirrorExact => {
                        let single = ReplicationSpec {
                            elements: vec![g],
                            ..rep.clone()
                        };
                        let (_, moved) = replicate_motif(
                            &jobs[m].nest,
                            &scene.motifs[m].color,
                            &single,
                            &grains[m],
                            &palette,
                            canvas_center,
                        )?
                        .pop()
                        .expect("one element");
                        plotted.extend(moved.into_iter().map(|gr| (next_id, gr)));
                        next_id += 1;
                    }
                }
            }
        }
    }

    let c = &scene.canvas;
    let mut canvas = Canvas::new(c.width, c.height, c.background)?;
    for (_, g) in &plotted {
        raster::plot_grain(&mut canvas, g, c.dot_radius)?;
    }
    if let Some((x, y, w, h)) = c.crop {
        let mut cropped = Canvas::new(w, h, c.background)?;
        for j in 0..h {
            for i in 0..w {
                cropped.set(i, j, canvas.get(x + i, y + j));
            }
        }
        canvas = cropped;
    }
    Ok(Rendered {
        canvas,
        grains: plotted,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorwheel::primary_rotation_permutation;

    const MINIMAL: &str = "[canvas]\nwidth = 64\nheight = 48\n";

    #[test]
    fn minimal_scene() {
        let scene = parse_scene(MINIMAL).unwrap();
        assert!(scene.motifs.is_empty());
        assert_eq!((scene.canvas.width, scene.canvas.height), (64, 48));
        let canvas = render_scene(&scene).unwrap();
        assert_eq!(canvas.count_non_background(), 0);
    }

    #[test]
    fn grid_auto_cells_are_row_major() {
        let mut text = String::from("[canvas]\nwidth = 400\nheight = 300\ngrid = 3 4\n");
        for _ in 0..12 {
            text.push_str("[motif]\ncurve = circle 20\ncolor = red\n");
        }
        let scene = parse_scene(&text).unwrap();
        assert_eq!(scene.motifs.len(), 12);
        for (i, m) in scene.motifs.iter().enumerate() {
            assert_eq!(m.placement, Placement::Cell { row: i / 4, col: i % 4 });
        }
        text.push_str("[motif]\ncurve = circle 20\ncolor = red\n");
        assert!(parse_scene(&text).is_err());
    }

    #[test]
    fn grid_cells_tile_the_canvas() {
        for (w, h, r, c) in [(400, 300, 3, 4), (101, 57, 4, 7), (5, 5, 5, 5), (9, 2, 1, 3)] {
            let cells = grid_cells(w, h, r, c);
            assert_eq!(cells.len(), r * c);
            let mut cover = vec![0u8; w * h];
            for cell in &cells {
                for y in cell.y..cell.y + cell.h {
                    for x in cell.x..cell.x + cell.w {
                        cover[y * w + x] += 1;
                    }
                }
            }
            assert!(cover.iter().all(|&n| n == 1));
        }
    }

    #[test]
    fn sampling_without_source_is_rejected() {
        let text = format!("{MINIMAL}[motif]\ncenter = 10 10\ncurve = circle 5\ncolor = sample\n");
        match parse_scene(&text) {
            Err(SceneError::Invalid(issues)) => {
                assert!(issues.iter().any(|i| i.field == "source"), "{issues:?}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn errors_are_collected_with_lines() {
        let text = "[canvas]\nwidth = x\nheight = 10\n[motif]\ncenter = 1 2\ncurve = circle -3\ncolor = mauve\n";
        match parse_scene(text) {
            Err(SceneError::Invalid(issues)) => {
                let lines: Vec<_> = issues.iter().filter_map(|i| i.line).collect();
                assert!(lines.contains(&2) && lines.contains(&6) && lines.contains(&7), "{issues:?}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_scene("[canvas]\n  width 10\n") {
            Err(SceneError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_scene("[nope]\n"), Err(SceneError::Syntax { line: 1, .. })));
        assert!(matches!(parse_scene("width = 3\n"), Err(SceneError::Syntax { line: 1, .. })));
    }

    #[test]
    fn replication_rules_parse() {
        let text = format!(
            "{MINIMAL}[motif]\ncenter = 20 20\ncurve = circle 5\ncolor = red\n\
             [replicate]\ngroup = 12\nelements = a b\ncolor.a = r->b, y->r, b->y\ncolor.b = r->b, b->r, y->y\n"
        );
        let scene = parse_scene(&text).unwrap();
        let rep = &scene.replications[0];
        assert_eq!(rep.elements, vec![GroupElement::alpha(12), GroupElement::beta(12)]);
        assert_eq!(
            rep.rules[&GroupElement::alpha(12)].permutation,
            Some(primary_rotation_permutation())
        );
        assert_eq!(rep.mode, ReplicationMode::MirrorExact);
    }

    #[test]
    fn non_homomorphic_rules_are_rejected() {
        let text = format!(
            "{MINIMAL}[motif]\ncenter = 20 20\ncurve = circle 5\ncolor = red\n\
             [replicate]\ngroup = 12\nelements = e\ncolor.e = r->b, b->r\n"
        );
        assert!(parse_scene(&text).is_err());
    }

    #[test]
    fn missing_rule_is_reported_at_replication() {
        let nest = Nest::new(0, Point::new(5.0, 5.0), RadiusCurve::Circle { r: 2.0 }, ColorSource::Fixed(Rgb::WHITE));
        let rep = ReplicationSpec {
            motifs: vec![],
            group: DihedralGroup::new(4).unwrap(),
            center: None,
            axis_deg: 90.0,
            elements: vec![GroupElement::alpha(4)],
            rules: BTreeMap::new(),
            mode: ReplicationMode::MirrorExact,
        };
        let grains = [Grain { position: Point::new(1.0, 1.0), color: Rgb::WHITE }];
        let res = replicate_motif(&nest, &MotifColor::Wheel(WheelColor::Red), &rep, &grains, &RybPalette::default(), Point::ORIGIN);
        assert!(matches!(res, Err(SceneError::Invalid(_))));

        let identity = ReplicationSpec { elements: vec![GroupElement::identity(4)], ..rep };
        let res = replicate_motif(&nest, &MotifColor::Rgb(Rgb::WHITE), &identity, &grains, &RybPalette::default(), Point::ORIGIN).unwrap();
        assert_eq!(res[0].1, grains.to_vec());
        assert_eq!(res[0].0, nest);
    }

    #[test]
    fn transformed_nest_frames() {
        let nest = Nest::new(0, Point::new(10.0, 0.0), RadiusCurve::RoseSin { a: 3.0, leaves: 3 }, ColorSource::SampleImage);
        let rep = ReplicationSpec {
            motifs: vec![],
            group: DihedralGroup::new(4).unwrap(),
            center: Some(Point::ORIGIN),
            axis_deg: 90.0,
            elements: vec![GroupElement::beta(4)],
            rules: BTreeMap::from([(GroupElement::beta(4), ColorRule { permutation: None, hue: Some(HueMap::Identity) })]),
            mode: ReplicationMode::Resample,
        };
        let out = replicate_motif(&nest, &MotifColor::Sample, &rep, &[], &RybPalette::default(), Point::ORIGIN).unwrap();
        let copy = &out[0].0;
        assert_eq!(copy.center, Point::new(-10.0, 0.0));
        assert!(copy.mirrored);
        // A wall point of the original maps onto a wall point of the copy.
        for k in 0..50 {
            let theta = std::f64::consts::TAU * k as f64 / 50.0;
            let r = nest.curve.radius_unchecked(theta);
            let p = nest.center + Point::new(theta.cos(), theta.sin()) * r;
            let q = Point::new(-p.x, p.y);
            let rel = q - copy.center;
            if rel.norm() < 0.1 {
                continue;
            }
            let wall = copy.wall_distance(rel, 0).unwrap();
            assert!((wall - rel.norm()).abs() < 1e-9, "θ={theta}: wall {wall} vs {}", rel.norm());
        }
    }

    #[test]
    fn serialize_round_trip() {
        let text = "[canvas]\nwidth = 300\nheight = 200\nbackground = #102030\ngrid = 2 3\ncrop = 0 0 150 100\n\
                    [sim]\nsigma = 2.5\ngrains = 50\nseed = 9\nstep_len = 1.1\n\
                    [fibonacci]\nanchor = 50 60\nbase_radius = 30\nunit = 2\n\
                    [motif]\ncurve = spiral 4 1.5 2\ncolor = teal\norientation = 30\n\
                    [motif]\ncell = 1 2\ncurve = rose_cos 20 2\ncolor = 10 20 30\nforage = 40 60\n\
                    [motif]\nfib = 3\ncolor = red\n\
                    [replicate]\nmotifs = 0 2\ngroup = 6\ncenter = 150 100\nelements = a3 ba\nmode = resample\n\
                    color.a3 = r->r, te->te\ncolor.ba = r->r, te->te\nhue.a3 = fk:3\n";
        let scene = parse_scene(text).unwrap();
        let again = parse_scene(&scene.to_string()).unwrap();
        assert_eq!(scene, again);
    }
}
