//! Python bindings: `import chromaglyph`.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use chromaglyph::colorwheel::{self as cw, Induced, SolveOptions, WheelColor};
use chromaglyph::curves::{self, FibLayout};
use chromaglyph::huemap::{self as hm, HsvColor, SectionAssignment};
use chromaglyph::raster::{self, RasterError};
use chromaglyph::scene::{self as sc, RenderOptions, SceneError};
use chromaglyph::symgroup as sg;
use chromaglyph::Point;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn raster_err(e: RasterError) -> PyErr {
    match e {
        RasterError::Io(io) => PyOSError::new_err(io.to_string()),
        other => value_err(other),
    }
}

fn scene_err(e: SceneError) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        value_err(e)
    }
}

fn color(name: &str) -> PyResult<WheelColor> {
    name.parse().map_err(value_err)
}

/// An element `α^k` or `βα^k` of the dihedral group of degree `n`.
#[pyclass(name = "GroupElement", module = "chromaglyph", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGroupElement(sg::GroupElement);

#[pymethods]
impl PyGroupElement {
    /// Parses `e`, `a3`, `b`, `ba5` (or `α^3`, `βα^5`) for degree `n`.
    #[new]
    fn new(name: &str, n: u32) -> PyResult<Self> {
        sg::parse_element(name, n).map(Self).map_err(value_err)
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.0.degree()
    }

    #[getter]
    fn exponent(&self) -> u32 {
        self.0.exponent()
    }

    #[getter]
    fn is_reflection(&self) -> bool {
        self.0.is_reflection()
    }

    /// `self` first, then `other`.
    fn compose(&self, other: &Self) -> PyResult<Self> {
        sg::compose(self.0, other.0).map(Self).map_err(value_err)
    }

    fn inverse(&self) -> Self {
        Self(sg::inverse(self.0))
    }

    fn order(&self) -> u32 {
        sg::element_order(self.0)
    }

    fn slot_action(&self, slot: usize) -> PyResult<usize> {
        sg::slot_action(self.0, slot).map_err(value_err)
    }

    /// Image of `(x, y)` about `center`, in a y-up frame.
    #[pyo3(signature = (x, y, center = (0.0, 0.0)))]
    fn apply(&self, x: f64, y: f64, center: (f64, f64)) -> (f64, f64) {
        let iso = sg::Isometry::new(Point::new(center.0, center.1), self.0);
        let p = iso.apply(Point::new(x, y));
        (p.x, p.y)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __hash__(&self) -> u64 {
        ((self.0.degree() as u64) << 33) | ((self.0.is_reflection() as u64) << 32) | self.0.exponent() as u64
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("GroupElement('{}', {})", self.0, self.0.degree())
    }
}

/// All `2n` elements of `D_n`: rotations first, then reflections.
#[pyfunction]
fn dihedral_group(n: u32) -> PyResult<Vec<PyGroupElement>> {
    let g = sg::DihedralGroup::new(n).map_err(value_err)?;
    Ok(g.elements().into_iter().map(PyGroupElement).collect())
}

/// A bijection between wheel colors, e.g. `ColorPermutation("r->b, y->r, b->y")`.
#[pyclass(name = "ColorPermutation", module = "chromaglyph", frozen, from_py_object)]
#[derive(Clone)]
struct PyColorPermutation(cw::ColorPermutation);

#[pymethods]
impl PyColorPermutation {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(value_err)
    }

    fn apply(&self, name: &str) -> PyResult<String> {
        self.0.apply(color(name)?).map(|c| c.name().to_string()).map_err(value_err)
    }

    fn order(&self) -> u32 {
        cw::permutation_order(&self.0)
    }

    fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    /// `[(from, to)]` by color name.
    fn mapping(&self) -> Vec<(String, String)> {
        self.0.pairs().map(|(a, b)| (a.name().to_string(), b.name().to_string())).collect()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Colors of the `n` clock slots, slot 0 at 12 o'clock.
#[pyclass(name = "SlotColoring", module = "chromaglyph", frozen, from_py_object)]
#[derive(Clone)]
struct PySlotColoring(cw::SlotColoring);

#[pymethods]
impl PySlotColoring {
    #[new]
    fn new(colors: Vec<String>) -> PyResult<Self> {
        let colors = colors.iter().map(|c| color(c)).collect::<PyResult<Vec<_>>>()?;
        Ok(Self(cw::SlotColoring::new(colors)))
    }

    #[getter]
    fn colors(&self) -> Vec<String> {
        self.0.colors().iter().map(|c| c.name().to_string()).collect()
    }

    /// The permutation `g` induces, or `None` if `g` is not a color symmetry.
    fn induced_permutation(&self, g: &PyGroupElement) -> PyResult<Option<PyColorPermutation>> {
        Ok(match cw::induced_permutation(&self.0, g.0).map_err(value_err)? {
            Induced::Permutation(p) => Some(PyColorPermutation(p)),
            Induced::Inconsistent => None,
        })
    }

    fn color_preserving_elements(&self) -> PyResult<Vec<PyGroupElement>> {
        Ok(cw::color_preserving_elements(&self.0)
            .map_err(value_err)?
            .into_iter()
            .map(PyGroupElement)
            .collect())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// Smallest coloring (in palette order) whose induced permutations match
/// `constraints`, or `None`.
#[pyfunction]
#[pyo3(signature = (n, palette, constraints, pins = Vec::new()))]
fn solve_coloring(
    n: usize,
    palette: Vec<String>,
    constraints: Vec<(PyGroupElement, PyColorPermutation)>,
    pins: Vec<(usize, String)>,
) -> PyResult<Option<PySlotColoring>> {
    let palette = palette.iter().map(|c| color(c)).collect::<PyResult<Vec<_>>>()?;
    let constraints: Vec<_> = constraints.into_iter().map(|(g, p)| (g.0, p.0)).collect();
    let options = SolveOptions {
        pins: pins.iter().map(|(s, c)| Ok((*s, color(c)?))).collect::<PyResult<_>>()?,
        ..SolveOptions::default()
    };
    cw::solve_coloring(n, &palette, &constraints, &options)
        .map(|c| c.map(PySlotColoring))
        .map_err(value_err)
}

/// A hue map by name: `identity`, `f1`..`f5`, `fk:K` or `table:PATH`.
#[pyclass(name = "HueMap", module = "chromaglyph", frozen, from_py_object)]
#[derive(Clone)]
struct PyHueMap(hm::HueMap);

#[pymethods]
impl PyHueMap {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        hm::HueMap::resolve(name).map(Self).map_err(value_err)
    }

    /// Value in `[0, 1)`.
    fn __call__(&self, h: f64) -> PyResult<f64> {
        self.0.eval(h).map_err(value_err)
    }

    /// Formula value before wrapping.
    fn raw(&self, h: f64) -> f64 {
        self.0.raw(h)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pyfunction]
fn rgb_to_hsv(r: u8, g: u8, b: u8) -> (f64, f64, f64) {
    let c = hm::rgb_to_hsv(r, g, b);
    (c.h, c.s, c.v)
}

#[pyfunction]
fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (u8, u8, u8) {
    let c = hm::hsv_to_rgb(HsvColor::new(h, s, v));
    (c.r, c.g, c.b)
}

/// Recolors the three non-reference quadrants of an image file.
#[pyfunction]
#[pyo3(signature = (input, output, reference, rotation = "identity", reflect_v = "identity", reflect_h = "identity"))]
fn transform_image(
    input: PathBuf,
    output: PathBuf,
    reference: &str,
    rotation: &str,
    reflect_v: &str,
    reflect_h: &str,
) -> PyResult<()> {
    let map = |s: &str| hm::HueMap::resolve(s).map_err(value_err);
    let assignment = SectionAssignment {
        reference: reference.parse().map_err(value_err)?,
        rotation: map(rotation)?,
        reflect_v: map(reflect_v)?,
        reflect_h: map(reflect_h)?,
    };
    let image = raster::read_image(&input).map_err(raster_err)?;
    raster::write_image(&hm::apply_d2_to_canvas(&image, &assignment), &output).map_err(raster_err)
}

#[pyfunction]
fn golden_angle() -> f64 {
    curves::golden_angle()
}

/// `[(x, y, radius)]` for circles `1..=count`.
#[pyfunction]
#[pyo3(signature = (count, unit = 1.0, anchor = (0.0, 0.0), base_radius = 100.0))]
fn fibonacci_layout(count: usize, unit: f64, anchor: (f64, f64), base_radius: f64) -> Vec<(f64, f64, f64)> {
    let layout = FibLayout {
        count,
        unit,
        anchor: Point::new(anchor.0, anchor.1),
        base_radius,
    };
    curves::fibonacci_layout(&layout)
        .into_iter()
        .map(|(c, r)| (c.x, c.y, r))
        .collect()
}

/// `(nest_id, x, y, (r, g, b))`
type GrainRow = (usize, f64, f64, (u8, u8, u8));

/// A parsed scene file.
#[pyclass(name = "Scene", module = "chromaglyph", frozen)]
struct PyScene(sc::Scene);

#[pymethods]
impl PyScene {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        sc::parse_scene(text).map(Self).map_err(scene_err)
    }

    /// Loads a file; relative image and palette paths resolve against it.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        sc::load_scene(&path).map(Self).map_err(scene_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.canvas.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.canvas.height
    }

    #[getter]
    fn motif_count(&self) -> usize {
        self.0.motifs.len()
    }

    /// `(width, height, rgb_bytes)` of the rendered image.
    #[pyo3(signature = (seed = None, threads = 0))]
    fn render<'py>(&self, py: Python<'py>, seed: Option<u64>, threads: usize) -> PyResult<(usize, usize, Bound<'py, PyBytes>)> {
        let out = py
            .detach(|| sc::render_scene_with(&self.0, RenderOptions { seed, threads }))
            .map_err(scene_err)?;
        let c = out.canvas;
        Ok((c.width(), c.height(), PyBytes::new(py, c.pixels())))
    }

    /// `[(nest_id, x, y, (r, g, b))]` in plotting order.
    #[pyo3(signature = (seed = None, threads = 0))]
    fn grains(&self, py: Python<'_>, seed: Option<u64>, threads: usize) -> PyResult<Vec<GrainRow>> {
        let out = py
            .detach(|| sc::render_scene_with(&self.0, RenderOptions { seed, threads }))
            .map_err(scene_err)?;
        Ok(out
            .grains
            .iter()
            .map(|(id, g)| (*id, g.position.x, g.position.y, (g.color.r, g.color.g, g.color.b)))
            .collect())
    }

    /// Renders and writes a `.png` or `.ppm` file.
    #[pyo3(signature = (path, seed = None, threads = 0))]
    fn write(&self, py: Python<'_>, path: PathBuf, seed: Option<u64>, threads: usize) -> PyResult<()> {
        let out = py
            .detach(|| sc::render_scene_with(&self.0, RenderOptions { seed, threads }))
            .map_err(scene_err)?;
        raster::write_image(&out.canvas, &path).map_err(raster_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

#[pymodule(name = "chromaglyph")]
fn chromaglyph_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroupElement>()?;
    m.add_class::<PyColorPermutation>()?;
    m.add_class::<PySlotColoring>()?;
    m.add_class::<PyHueMap>()?;
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(dihedral_group, m)?)?;
    m.add_function(wrap_pyfunction!(solve_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(rgb_to_hsv, m)?)?;
    m.add_function(wrap_pyfunction!(hsv_to_rgb, m)?)?;
    m.add_function(wrap_pyfunction!(transform_image, m)?)?;
    m.add_function(wrap_pyfunction!(golden_angle, m)?)?;
    m.add_function(wrap_pyfunction!(fibonacci_layout, m)?)?;
    Ok(())
}
