//! Finite dihedral groups `D_n`.
//!
//! Elements are written `α^k` (rotation) or `βα^k` (reflection) and compose
//! left to right: `compose(g1, g2)` means "apply `g1`, then `g2`". The
//! generators are `α`, a counter-clockwise rotation by `360°/n`, and `β`, the
//! mirror in the axis through slot 0 (12 o'clock) and slot `n/2`.
//!
//! Slots of an `n`-slot wheel are numbered like a clock face: slot 0 at the
//! top, increasing clockwise. Acting on positions, `α` sends slot `s` to
//! `s - 1` and `β` sends `s` to `-s` (mod `n`).

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geom::{exact_sin_cos, Point};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("degree mismatch: D_{0} element combined with D_{1} element")]
    DegreeMismatch(u32, u32),
    #[error("slot {slot} out of range for a {n}-slot wheel")]
    SlotOutOfRange { slot: usize, n: u32 },
    #[error("group degree must be at least 1")]
    ZeroDegree,
    #[error("cannot parse group element {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Rotation,
    Reflection,
}

/// `α^k` (rotation) or `βα^k` (reflection) in `D_n`, always with `0 <= k < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    kind: Kind,
    k: u32,
    n: u32,
}

impl GroupElement {
    pub fn identity(n: u32) -> Self {
        Self::rotation(n, 0)
    }

    /// `α^k`; `k` may be any integer and is reduced mod `n`.
    pub fn rotation(n: u32, k: i64) -> Self {
        assert!(n >= 1, "dihedral degree must be positive");
        Self {
            kind: Kind::Rotation,
            k: k.rem_euclid(n as i64) as u32,
            n,
        }
    }

    /// `βα^k`; `k` may be any integer and is reduced mod `n`.
    pub fn reflection(n: u32, k: i64) -> Self {
        assert!(n >= 1, "dihedral degree must be positive");
        Self {
            kind: Kind::Reflection,
            k: k.rem_euclid(n as i64) as u32,
            n,
        }
    }

    pub fn alpha(n: u32) -> Self {
        Self::rotation(n, 1)
    }

    pub fn beta(n: u32) -> Self {
        Self::reflection(n, 0)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.kind == Kind::Rotation && self.k == 0
    }

    pub fn is_reflection(&self) -> bool {
        self.kind == Kind::Reflection
    }

    /// Same element viewed in a group with degree `n`. Only meaningful when
    /// the element was parsed without a degree.
    pub(crate) fn with_degree(self, n: u32) -> Self {
        match self.kind {
            Kind::Rotation => Self::rotation(n, self.k as i64),
            Kind::Reflection => Self::reflection(n, self.k as i64),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.k) {
            (Kind::Rotation, 0) => write!(f, "e"),
            (Kind::Rotation, 1) => write!(f, "α"),
            (Kind::Rotation, k) => write!(f, "α^{k}"),
            (Kind::Reflection, 0) => write!(f, "β"),
            (Kind::Reflection, 1) => write!(f, "βα"),
            (Kind::Reflection, k) => write!(f, "βα^{k}"),
        }
    }
}

/// Parses the names used by scene files and the CLI: `e`, `a`, `a3`, `a^3`,
/// `b`, `ba`, `ba5`, `ba^5` (ASCII) or the `α`/`β` spellings produced by
/// `Display`. The degree is left at a placeholder; callers attach it with
/// [`parse_element`].
impl FromStr for GroupElement {
    type Err = SymmetryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || SymmetryError::Parse(s.to_string());
        let t = s.trim().replace('α', "a").replace('β', "b");
        if t == "e" {
            return Ok(Self::rotation(u32::MAX, 0));
        }
        let (kind, rest) = if let Some(rest) = t.strip_prefix("ba") {
            (Kind::Reflection, rest)
        } else if t == "b" {
            (Kind::Reflection, "0")
        } else if let Some(rest) = t.strip_prefix('a') {
            (Kind::Rotation, rest)
        } else {
            return Err(err());
        };
        let rest = rest.strip_prefix('^').unwrap_or(rest);
        let k: u32 = if rest.is_empty() {
            1
        } else {
            rest.parse().map_err(|_| err())?
        };
        Ok(Self { kind, k, n: u32::MAX })
    }
}

/// Parses an element name and reduces it into `D_n`.
pub fn parse_element(s: &str, n: u32) -> Result<GroupElement, SymmetryError> {
    if n == 0 {
        return Err(SymmetryError::ZeroDegree);
    }
    let g: GroupElement = s.parse()?;
    Ok(g.with_degree(n))
}

/// "First apply `g1`, then `g2`".
pub fn compose(g1: GroupElement, g2: GroupElement) -> Result<GroupElement, SymmetryError> {
    if g1.n != g2.n {
        return Err(SymmetryError::DegreeMismatch(g1.n, g2.n));
    }
    let n = g1.n;
    let (a, b) = (g1.k as i64, g2.k as i64);
    // As maps on the plane: α^k = R^k, βα^k = R^k∘B, with B R = R⁻¹ B.
    Ok(match (g1.kind, g2.kind) {
        (Kind::Rotation, Kind::Rotation) => GroupElement::rotation(n, a + b),
        (Kind::Rotation, Kind::Reflection) => GroupElement::reflection(n, b - a),
        (Kind::Reflection, Kind::Rotation) => GroupElement::reflection(n, a + b),
        (Kind::Reflection, Kind::Reflection) => GroupElement::rotation(n, b - a),
    })
}

pub fn inverse(g: GroupElement) -> GroupElement {
    match g.kind {
        Kind::Rotation => GroupElement::rotation(g.n, -(g.k as i64)),
        Kind::Reflection => g,
    }
}

/// `g` composed with itself `m` times (`g^0 = e`).
pub fn power(g: GroupElement, m: u32) -> GroupElement {
    match g.kind {
        Kind::Rotation => GroupElement::rotation(g.n, g.k as i64 * m as i64),
        Kind::Reflection if m.is_multiple_of(2) => GroupElement::identity(g.n),
        Kind::Reflection => g,
    }
}

pub fn element_order(g: GroupElement) -> u32 {
    match g.kind {
        Kind::Reflection => 2,
        Kind::Rotation if g.k == 0 => 1,
        Kind::Rotation => g.n / gcd(g.n, g.k),
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Position index that receives the content of `slot` under `g`.
pub fn slot_action(g: GroupElement, slot: usize) -> Result<usize, SymmetryError> {
    let n = g.n as i64;
    if slot as i64 >= n {
        return Err(SymmetryError::SlotOutOfRange { slot, n: g.n });
    }
    let s = slot as i64;
    let k = g.k as i64;
    let image = match g.kind {
        Kind::Rotation => s - k,
        Kind::Reflection => -s - k,
    };
    Ok(image.rem_euclid(n) as usize)
}

/// The dihedral group of degree `n` (order `2n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DihedralGroup {
    n: u32,
}

impl DihedralGroup {
    pub fn new(n: u32) -> Result<Self, SymmetryError> {
        if n == 0 {
            return Err(SymmetryError::ZeroDegree);
        }
        Ok(Self { n })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        2 * self.n as usize
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.n)
    }

    pub fn alpha(&self) -> GroupElement {
        GroupElement::alpha(self.n)
    }

    pub fn beta(&self) -> GroupElement {
        GroupElement::beta(self.n)
    }

    /// `e, α, …, α^(n-1), β, βα, …, βα^(n-1)` in that order.
    pub fn elements(&self) -> Vec<GroupElement> {
        let n = self.n;
        (0..n)
            .map(|k| GroupElement::rotation(n, k as i64))
            .chain((0..n).map(|k| GroupElement::reflection(n, k as i64)))
            .collect()
    }

    /// Rotation step `360°/n` in radians.
    pub fn step_angle(&self) -> f64 {
        TAU / self.n as f64
    }
}

/// A group element realized as a planar isometry about `center`.
///
/// `axis_phase` is the angle of `β`'s mirror axis, counter-clockwise from the
/// +x axis; `π/2` puts it through 12 and 6 o'clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub center: Point,
    pub element: GroupElement,
    pub axis_phase: f64,
}

impl Isometry {
    pub fn new(center: Point, element: GroupElement) -> Self {
        Self {
            center,
            element,
            axis_phase: FRAC_PI_2,
        }
    }

    /// The linear part as `(column for x, column for y)`.
    fn linear(&self) -> (Point, Point) {
        let theta = self.element.k as f64 * TAU / self.element.n as f64;
        let (s, c) = exact_sin_cos(theta);
        match self.element.kind {
            Kind::Rotation => (Point::new(c, s), Point::new(-s, c)),
            Kind::Reflection => {
                // R(θ)·M(φ) with M(φ) the mirror in the line at angle φ.
                let (s2, c2) = exact_sin_cos(2.0 * self.axis_phase);
                let m_x = Point::new(c2, s2);
                let m_y = Point::new(s2, -c2);
                let rot = |p: Point| Point::new(c * p.x - s * p.y, s * p.x + c * p.y);
                (rot(m_x), rot(m_y))
            }
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let (cx, cy) = self.linear();
        let d = p - self.center;
        self.center + cx * d.x + cy * d.y
    }

    /// Applies only the linear part, for transforming directions.
    pub fn apply_vector(&self, v: Point) -> Point {
        let (cx, cy) = self.linear();
        cx * v.x + cy * v.y
    }
}

pub fn apply_isometry(iso: &Isometry, p: Point) -> Point {
    iso.apply(p)
}

/// Unit-circle representative point of a clock slot (slot 0 at the top).
pub fn slot_point(slot: usize, n: u32) -> Point {
    Point::polar(FRAC_PI_2 - slot as f64 * TAU / n as f64)
}
