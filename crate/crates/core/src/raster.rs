//! Canvas, grain plotting, RYB display palette and PPM/PNG I/O.
//!
//! Pixel `(i, j)` is centered on canvas coordinate `(i, j)`; `j` grows
//! downward.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::colorwheel::WheelColor;
use crate::stigmergy::Grain;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("canvas dimensions must be at least 1x1, got {0}x{1}")]
    ZeroDimension(usize, usize),
    #[error("malformed image at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("non-finite grain position ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("palette line {line}: {message}")]
    Palette { line: usize, message: String },
    #[error("unsupported image format for {0:?} (expected .png or .ppm)")]
    Format(String),
    #[error("png: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<png::EncodingError> for RasterError {
    fn from(e: png::EncodingError) -> Self {
        match e {
            png::EncodingError::IoError(io) => RasterError::Io(io),
            other => RasterError::Png(other.to_string()),
        }
    }
}

impl From<png::DecodingError> for RasterError {
    fn from(e: png::DecodingError) -> Self {
        match e {
            png::DecodingError::IoError(io) => RasterError::Io(io),
            other => RasterError::Png(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.r, self.g, self.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    background: Rgb,
}

pub fn new_canvas(width: usize, height: usize, background: Rgb) -> Result<Canvas, RasterError> {
    Canvas::new(width, height, background)
}

impl Canvas {
    pub fn new(width: usize, height: usize, background: Rgb) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension(width, height));
        }
        let pixels = [background.r, background.g, background.b].repeat(width * height);
        Ok(Self {
            width,
            height,
            pixels,
            background,
        })
    }

    /// Wraps an existing row-major RGB buffer.
    pub fn from_raw(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::ZeroDimension(width, height));
        }
        if pixels.len() != 3 * width * height {
            return Err(RasterError::Parse {
                offset: pixels.len(),
                message: format!("expected {} bytes of pixel data", 3 * width * height),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            background: Rgb::BLACK,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn background(&self) -> Rgb {
        self.background
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let i = 3 * (y * self.width + x);
        Rgb::new(self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        let i = 3 * (y * self.width + x);
        self.pixels[i..i + 3].copy_from_slice(&[c.r, c.g, c.b]);
    }

    pub fn rows_mut(&mut self) -> std::slice::ChunksExactMut<'_, u8> {
        self.pixels.chunks_exact_mut(3 * self.width)
    }

    /// Color of the pixel under canvas point `(x, y)`, or `None` off-canvas.
    pub fn sample(&self, x: f64, y: f64) -> Option<Rgb> {
        let (i, j) = (x.round(), y.round());
        if !(i >= 0.0 && j >= 0.0 && i < self.width as f64 && j < self.height as f64) {
            return None;
        }
        Some(self.get(i as usize, j as usize))
    }

    /// Number of pixels that differ from the background.
    pub fn count_non_background(&self) -> usize {
        let bg = [self.background.r, self.background.g, self.background.b];
        self.pixels.chunks_exact(3).filter(|p| *p != bg).count()
    }
}

/// Draws `grain` as a filled disc: pixel `(i, j)` is set when its center lies
/// within `dot_radius + 0.5` of the grain's rounded position. Off-canvas parts
/// are clipped.
pub fn plot_grain(canvas: &mut Canvas, grain: &Grain, dot_radius: u32) -> Result<(), RasterError> {
    let p = grain.position;
    if !p.is_finite() {
        return Err(RasterError::NonFinite(p.x, p.y));
    }
    // f64::round rounds half away from zero.
    let (cx, cy) = (p.x.round(), p.y.round());
    let reach = dot_radius as f64 + 0.5;
    let r = dot_radius as f64;
    let (w, h) = (canvas.width as f64, canvas.height as f64);
    if cx + r < 0.0 || cy + r < 0.0 || cx - r >= w || cy - r >= h {
        return Ok(());
    }
    let x0 = (cx - r).max(0.0) as usize;
    let x1 = (cx + r).min(w - 1.0) as usize;
    let y0 = (cy - r).max(0.0) as usize;
    let y1 = (cy + r).min(h - 1.0) as usize;
    for j in y0..=y1 {
        let dy = j as f64 - cy;
        for i in x0..=x1 {
            let dx = i as f64 - cx;
            if dx * dx + dy * dy <= reach * reach {
                canvas.set(i, j, grain.color);
            }
        }
    }
    Ok(())
}

pub fn write_ppm(canvas: &Canvas, path: &Path) -> Result<(), RasterError> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(&encode_ppm(canvas))?;
    out.flush()?;
    Ok(())
}

pub fn encode_ppm(canvas: &Canvas) -> Vec<u8> {
    let mut bytes = format!("P6\n{} {}\n255\n", canvas.width, canvas.height).into_bytes();
    bytes.extend_from_slice(&canvas.pixels);
    bytes
}

pub fn read_ppm(path: &Path) -> Result<Canvas, RasterError> {
    decode_ppm(&std::fs::read(path)?)
}

/// Decodes a binary P6 file with maxval 255. Comments (`#` to end of line)
/// are allowed in the header.
pub fn decode_ppm(bytes: &[u8]) -> Result<Canvas, RasterError> {
    let mut pos = 0;
    let parse_err = |offset: usize, message: &str| RasterError::Parse {
        offset,
        message: message.to_string(),
    };
    if bytes.get(..2) != Some(b"P6") {
        return Err(parse_err(0, "missing P6 magic"));
    }
    pos += 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(parse_err(pos, "truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(parse_err(pos, "expected a decimal number"));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text.parse().map_err(|_| parse_err(start, "number too large"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(parse_err(pos, "expected whitespace after maxval")),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(parse_err(pos, "only maxval 255 is supported"));
    }
    if width == 0 || height == 0 {
        return Err(RasterError::ZeroDimension(width, height));
    }
    let need = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| parse_err(pos, "dimensions overflow"))?;
    let body = &bytes[pos..];
    if body.len() < need {
        return Err(parse_err(
            bytes.len(),
            &format!("truncated pixel data: {} of {need} bytes", body.len()),
        ));
    }
    Canvas::from_raw(width, height, body[..need].to_vec())
}

pub fn write_png(canvas: &Canvas, path: &Path) -> Result<(), RasterError> {
    let file = BufWriter::new(File::create(path)?);
    let mut encoder = png::Encoder::new(file, canvas.width as u32, canvas.height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header()?;
    writer.write_image_data(&canvas.pixels)?;
    writer.finish()?;
    Ok(())
}

/// Reads any 8- or 16-bit PNG and converts it to 8-bit RGB.
pub fn read_png(path: &Path) -> Result<Canvas, RasterError> {
    let mut decoder = png::Decoder::new(BufReader::new(File::open(path)?));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info()?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| RasterError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf)?;
    buf.truncate(info.buffer_size());
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => return Err(RasterError::Png("unexpanded palette".into())),
    };
    let rgb = if channels == 3 {
        buf
    } else {
        buf.chunks_exact(channels)
            .flat_map(|px| match channels {
                1 | 2 => [px[0], px[0], px[0]],
                _ => [px[0], px[1], px[2]],
            })
            .collect()
    };
    Canvas::from_raw(info.width as usize, info.height as usize, rgb)
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Writes PNG or PPM depending on the file extension.
pub fn write_image(canvas: &Canvas, path: &Path) -> Result<(), RasterError> {
    match extension(path).as_str() {
        "png" => write_png(canvas, path),
        "ppm" => write_ppm(canvas, path),
        _ => Err(RasterError::Format(path.display().to_string())),
    }
}

pub fn read_image(path: &Path) -> Result<Canvas, RasterError> {
    match extension(path).as_str() {
        "png" => read_png(path),
        "ppm" => read_ppm(path),
        _ => Err(RasterError::Format(path.display().to_string())),
    }
}

const DEFAULT_PALETTE: &str = include_str!("../data/ryb_palette.txt");

/// Display RGB values for the twelve wheel colors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RybPalette {
    colors: BTreeMap<WheelColor, Rgb>,
}

impl Default for RybPalette {
    fn default() -> Self {
        Self::parse(DEFAULT_PALETTE).expect("shipped palette is valid")
    }
}

impl RybPalette {
    /// Parses `name r g b` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, RasterError> {
        let mut colors = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| RasterError::Palette { line: i + 1, message };
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [name, r, g, b] = parts[..] else {
                return Err(err(format!("expected `name r g b`, got {line:?}")));
            };
            let color: WheelColor = name.parse().map_err(|e| err(format!("{e}")))?;
            let channel = |s: &str| s.parse::<u8>().map_err(|_| err(format!("bad channel {s:?}")));
            if colors.insert(color, Rgb::new(channel(r)?, channel(g)?, channel(b)?)).is_some() {
                return Err(err(format!("{color} listed twice")));
            }
        }
        Self::from_map(colors)
    }

    pub fn load(path: &Path) -> Result<Self, RasterError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn from_map(colors: BTreeMap<WheelColor, Rgb>) -> Result<Self, RasterError> {
        let missing: Vec<_> = WheelColor::ALL
            .iter()
            .filter(|c| !colors.contains_key(c))
            .map(|c| c.name())
            .collect();
        if !missing.is_empty() {
            return Err(RasterError::Palette {
                line: 0,
                message: format!("missing colors: {}", missing.join(", ")),
            });
        }
        let distinct: std::collections::BTreeSet<_> =
            colors.values().map(|c| (c.r, c.g, c.b)).collect();
        if distinct.len() != colors.len() {
            return Err(RasterError::Palette {
                line: 0,
                message: "display colors must be distinct".into(),
            });
        }
        Ok(Self { colors })
    }

    pub fn get(&self, c: WheelColor) -> Rgb {
        self.colors[&c]
    }
}

pub fn realize_color(name: WheelColor, palette: &RybPalette) -> Rgb {
    palette.get(name)
}
