//! The RYB color wheel, slot colorings and color symmetry.
//!
//! A group element `g` is a color symmetry of a slot coloring `c` when there
//! is a bijection `P` of the colors with `c[g(s)] == P(c[s])` for every slot
//! `s`, where `g(s)` is [`slot_action`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::symgroup::{self, DihedralGroup, GroupElement, SymmetryError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColorError {
    #[error("unknown color {0:?}")]
    UnknownName(String),
    #[error("color {0} is not in the permutation's domain")]
    UnknownColor(WheelColor),
    #[error("not a bijection: {0}")]
    NotBijection(String),
    #[error("coloring has {coloring} slots but the element belongs to D_{element}")]
    DegreeMismatch { coloring: usize, element: u32 },
    #[error("empty palette")]
    EmptyPalette,
    #[error("search exceeded the cap of {0} candidate prefixes")]
    SearchCapExceeded(u64),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("invalid permutation assignment: {0}")]
    Assignment(String),
}

/// The twelve colors of the artistic RYB wheel, in clock order from 12 o'clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WheelColor {
    Yellow,
    Amber,
    Orange,
    Vermilion,
    Red,
    Magenta,
    Purple,
    Violet,
    Blue,
    Teal,
    Green,
    Chartreuse,
}

impl WheelColor {
    pub const ALL: [WheelColor; 12] = [
        WheelColor::Yellow,
        WheelColor::Amber,
        WheelColor::Orange,
        WheelColor::Vermilion,
        WheelColor::Red,
        WheelColor::Magenta,
        WheelColor::Purple,
        WheelColor::Violet,
        WheelColor::Blue,
        WheelColor::Teal,
        WheelColor::Green,
        WheelColor::Chartreuse,
    ];

    /// Clock slot on the 12-slot wheel (0 = 12 o'clock).
    pub fn position(self) -> usize {
        self as usize
    }

    pub fn at_position(slot: usize) -> WheelColor {
        Self::ALL[slot % 12]
    }

    pub fn name(self) -> &'static str {
        match self {
            WheelColor::Yellow => "yellow",
            WheelColor::Amber => "amber",
            WheelColor::Orange => "orange",
            WheelColor::Vermilion => "vermilion",
            WheelColor::Red => "red",
            WheelColor::Magenta => "magenta",
            WheelColor::Purple => "purple",
            WheelColor::Violet => "violet",
            WheelColor::Blue => "blue",
            WheelColor::Teal => "teal",
            WheelColor::Green => "green",
            WheelColor::Chartreuse => "chartreuse",
        }
    }

    /// One- or two-letter abbreviation (`r`, `y`, `b`, `o`, `p`, `g`, `ve`, …).
    pub fn abbrev(self) -> &'static str {
        match self {
            WheelColor::Yellow => "y",
            WheelColor::Amber => "am",
            WheelColor::Orange => "o",
            WheelColor::Vermilion => "ve",
            WheelColor::Red => "r",
            WheelColor::Magenta => "ma",
            WheelColor::Purple => "p",
            WheelColor::Violet => "vi",
            WheelColor::Blue => "b",
            WheelColor::Teal => "te",
            WheelColor::Green => "g",
            WheelColor::Chartreuse => "ch",
        }
    }
}

impl fmt::Display for WheelColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WheelColor {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        WheelColor::ALL
            .into_iter()
            .find(|c| c.name() == t || c.abbrev() == t)
            .ok_or_else(|| ColorError::UnknownName(s.to_string()))
    }
}

/// The color `6` slots away on the wheel.
pub fn complement(c: WheelColor) -> WheelColor {
    WheelColor::at_position(c.position() + 6)
}

/// A coloring of the `n` slots of a wheel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlotColoring {
    colors: Vec<WheelColor>,
}

impl SlotColoring {
    pub fn new(colors: Vec<WheelColor>) -> Self {
        Self { colors }
    }

    pub fn constant(n: usize, color: WheelColor) -> Self {
        Self::new(vec![color; n])
    }

    /// `pattern` repeated clockwise from slot 0 until `n` slots are filled.
    pub fn repeating(n: usize, pattern: &[WheelColor]) -> Self {
        Self::new((0..n).map(|s| pattern[s % pattern.len()]).collect())
    }

    pub fn degree(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[WheelColor] {
        &self.colors
    }

    /// Distinct colors in order of first appearance.
    pub fn palette(&self) -> Vec<WheelColor> {
        let mut seen = BTreeSet::new();
        self.colors.iter().copied().filter(|c| seen.insert(*c)).collect()
    }
}

impl fmt::Display for SlotColoring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.colors.iter().map(|c| c.abbrev()).collect();
        write!(f, "({})", names.join(","))
    }
}

impl FromStr for SlotColoring {
    type Err = ColorError;

    /// Comma- or whitespace-separated color names, slot 0 first.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let colors = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(colors))
    }
}

pub fn ryb_wheel() -> SlotColoring {
    SlotColoring::new(WheelColor::ALL.to_vec())
}

/// A bijection of a finite set of wheel colors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ColorPermutation {
    mapping: BTreeMap<WheelColor, WheelColor>,
}

impl ColorPermutation {
    /// Builds a permutation from two-line notation pairs `(from, to)`.
    pub fn new<I>(pairs: I) -> Result<Self, ColorError>
    where
        I: IntoIterator<Item = (WheelColor, WheelColor)>,
    {
        let mut mapping = BTreeMap::new();
        for (from, to) in pairs {
            if let Some(prev) = mapping.insert(from, to) {
                if prev != to {
                    return Err(ColorError::NotBijection(format!(
                        "{from} maps to both {prev} and {to}"
                    )));
                }
            }
        }
        let domain: BTreeSet<_> = mapping.keys().collect();
        let image: BTreeSet<_> = mapping.values().collect();
        if domain != image {
            return Err(ColorError::NotBijection(format!(
                "image {:?} differs from domain {:?}",
                image.iter().map(|c| c.abbrev()).collect::<Vec<_>>(),
                domain.iter().map(|c| c.abbrev()).collect::<Vec<_>>()
            )));
        }
        Ok(Self { mapping })
    }

    /// Two-line notation: `top[i]` maps to `bottom[i]`.
    pub fn two_line(top: &[WheelColor], bottom: &[WheelColor]) -> Result<Self, ColorError> {
        if top.len() != bottom.len() {
            return Err(ColorError::NotBijection("rows differ in length".into()));
        }
        Self::new(top.iter().copied().zip(bottom.iter().copied()))
    }

    pub fn identity<I: IntoIterator<Item = WheelColor>>(domain: I) -> Self {
        Self {
            mapping: domain.into_iter().map(|c| (c, c)).collect(),
        }
    }

    pub fn domain(&self) -> impl Iterator<Item = WheelColor> + '_ {
        self.mapping.keys().copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (WheelColor, WheelColor)> + '_ {
        self.mapping.iter().map(|(a, b)| (*a, *b))
    }

    pub fn apply(&self, c: WheelColor) -> Result<WheelColor, ColorError> {
        self.mapping.get(&c).copied().ok_or(ColorError::UnknownColor(c))
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().all(|(a, b)| a == b)
    }

    /// `self` first, then `then`. Both must share a domain.
    pub fn then(&self, then: &ColorPermutation) -> Result<ColorPermutation, ColorError> {
        let mapping = self
            .mapping
            .iter()
            .map(|(a, b)| Ok((*a, then.apply(*b)?)))
            .collect::<Result<BTreeMap<_, _>, ColorError>>()?;
        Ok(Self { mapping })
    }

    pub fn power(&self, m: u32) -> ColorPermutation {
        let mut out = Self::identity(self.domain());
        for _ in 0..m {
            out = out.then(self).expect("same domain");
        }
        out
    }

    /// Cycle lengths, longest first.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = BTreeSet::new();
        let mut lengths = Vec::new();
        for &start in self.mapping.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut len = 0;
            let mut c = start;
            while seen.insert(c) {
                len += 1;
                c = self.mapping[&c];
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }
}

impl fmt::Display for ColorPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<_> = self
            .mapping
            .iter()
            .map(|(a, b)| format!("{}→{}", a.abbrev(), b.abbrev()))
            .collect();
        write!(f, "({})", pairs.join(", "))
    }
}

/// Parses `r->b, y->r, b->y` (also accepts `→` and `:`).
impl FromStr for ColorPermutation {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let pairs = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|pair| {
                let norm = pair.replace("->", "→").replace(':', "→");
                let (from, to) = norm
                    .split_once('→')
                    .ok_or_else(|| ColorError::UnknownName(pair.trim().to_string()))?;
                Ok((from.parse()?, to.parse()?))
            })
            .collect::<Result<Vec<_>, ColorError>>()?;
        Self::new(pairs)
    }
}

pub fn apply_permutation(p: &ColorPermutation, c: WheelColor) -> Result<WheelColor, ColorError> {
    p.apply(c)
}

pub fn permutation_order(p: &ColorPermutation) -> u32 {
    p.cycle_type().into_iter().fold(1, |acc, len| lcm(acc, len as u32))
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Outcome of asking which color permutation an element induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Induced {
    Permutation(ColorPermutation),
    Inconsistent,
}

impl Induced {
    pub fn permutation(&self) -> Option<&ColorPermutation> {
        match self {
            Induced::Permutation(p) => Some(p),
            Induced::Inconsistent => None,
        }
    }
}

fn check_degree(coloring: &SlotColoring, g: GroupElement) -> Result<(), ColorError> {
    if coloring.degree() != g.degree() as usize {
        return Err(ColorError::DegreeMismatch {
            coloring: coloring.degree(),
            element: g.degree(),
        });
    }
    Ok(())
}

pub fn induced_permutation(coloring: &SlotColoring, g: GroupElement) -> Result<Induced, ColorError> {
    check_degree(coloring, g)?;
    let mut forward = BTreeMap::new();
    for (s, &from) in coloring.colors.iter().enumerate() {
        let to = coloring.colors[symgroup::slot_action(g, s)?];
        if *forward.entry(from).or_insert(to) != to {
            return Ok(Induced::Inconsistent);
        }
    }
    let image: BTreeSet<_> = forward.values().collect();
    if image.len() != forward.len() {
        return Ok(Induced::Inconsistent);
    }
    Ok(Induced::Permutation(ColorPermutation { mapping: forward }))
}

pub fn is_color_symmetry(coloring: &SlotColoring, g: GroupElement) -> Result<bool, ColorError> {
    Ok(matches!(induced_permutation(coloring, g)?, Induced::Permutation(_)))
}

/// Every element of `D_n` that induces the identity permutation.
pub fn color_preserving_elements(coloring: &SlotColoring) -> Result<Vec<GroupElement>, ColorError> {
    let group = DihedralGroup::new(coloring.degree() as u32)?;
    let mut out = Vec::new();
    for g in group.elements() {
        if let Induced::Permutation(p) = induced_permutation(coloring, g)? {
            if p.is_identity() {
                out.push(g);
            }
        }
    }
    Ok(out)
}

/// An assignment of color permutations to group elements that must respect
/// the group law (left-to-right composition).
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationAssignment {
    group: DihedralGroup,
    assign: BTreeMap<GroupElement, ColorPermutation>,
}

impl PermutationAssignment {
    pub fn new(
        group: DihedralGroup,
        assign: BTreeMap<GroupElement, ColorPermutation>,
    ) -> Result<Self, ColorError> {
        let out = Self { group, assign };
        out.validate()?;
        Ok(out)
    }

    /// The permutations induced by a coloring, for every consistent element.
    pub fn from_coloring(coloring: &SlotColoring) -> Result<Self, ColorError> {
        let group = DihedralGroup::new(coloring.degree() as u32)?;
        let mut assign = BTreeMap::new();
        for g in group.elements() {
            if let Induced::Permutation(p) = induced_permutation(coloring, g)? {
                assign.insert(g, p);
            }
        }
        Self::new(group, assign)
    }

    pub fn group(&self) -> DihedralGroup {
        self.group
    }

    pub fn get(&self, g: &GroupElement) -> Option<&ColorPermutation> {
        self.assign.get(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &ColorPermutation)> {
        self.assign.iter()
    }

    fn validate(&self) -> Result<(), ColorError> {
        let n = self.group.degree();
        if let Some(g) = self.assign.keys().find(|g| g.degree() != n) {
            return Err(SymmetryError::DegreeMismatch(n, g.degree()).into());
        }
        if let Some(p) = self.assign.get(&self.group.identity()) {
            if !p.is_identity() {
                return Err(ColorError::Assignment(format!("e is assigned {p}")));
            }
        }
        for (g1, p1) in &self.assign {
            for (g2, p2) in &self.assign {
                let g12 = symgroup::compose(*g1, *g2)?;
                let Some(p12) = self.assign.get(&g12) else {
                    continue;
                };
                let expected = p1.then(p2).map_err(|_| {
                    ColorError::Assignment(format!("{g1} and {g2} have different domains"))
                })?;
                if &expected != p12 {
                    return Err(ColorError::Assignment(format!(
                        "{g1}·{g2} = {g12} is assigned {p12}, expected {expected}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Search controls for [`solve_coloring`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Maximum number of candidate prefixes explored.
    pub cap: u64,
    /// Slots whose color is fixed in advance.
    pub pins: Vec<(usize, WheelColor)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            cap: 10_000_000,
            pins: Vec::new(),
        }
    }
}

/// Exhaustive search for a coloring whose induced permutations equal the
/// given constraints. Returns the lexicographically smallest solution
/// (palette order), or `None`.
pub fn solve_coloring(
    n: usize,
    palette: &[WheelColor],
    constraints: &[(GroupElement, ColorPermutation)],
    options: &SolveOptions,
) -> Result<Option<SlotColoring>, ColorError> {
    if palette.is_empty() {
        return Err(ColorError::EmptyPalette);
    }
    for (g, _) in constraints {
        if g.degree() as usize != n {
            return Err(ColorError::DegreeMismatch {
                coloring: n,
                element: g.degree(),
            });
        }
    }
    let mut pins = vec![None; n];
    for &(slot, color) in &options.pins {
        if slot >= n {
            return Err(SymmetryError::SlotOutOfRange { slot, n: n as u32 }.into());
        }
        pins[slot] = Some(color);
    }
    // Image tables so the pruning check is a lookup.
    let images: Vec<Vec<usize>> = constraints
        .iter()
        .map(|(g, _)| (0..n).map(|s| symgroup::slot_action(*g, s)).collect())
        .collect::<Result<_, _>>()?;

    let mut search = Search {
        n,
        palette,
        constraints,
        images: &images,
        pins: &pins,
        slots: Vec::with_capacity(n),
        visited: 0,
        cap: options.cap,
    };
    search.run()
}

struct Search<'a> {
    n: usize,
    palette: &'a [WheelColor],
    constraints: &'a [(GroupElement, ColorPermutation)],
    images: &'a [Vec<usize>],
    pins: &'a [Option<WheelColor>],
    slots: Vec<WheelColor>,
    visited: u64,
    cap: u64,
}

impl Search<'_> {
    fn run(&mut self) -> Result<Option<SlotColoring>, ColorError> {
        if self.slots.len() == self.n {
            let candidate = SlotColoring::new(self.slots.clone());
            for (g, p) in self.constraints {
                if induced_permutation(&candidate, *g)?.permutation() != Some(p) {
                    return Ok(None);
                }
            }
            return Ok(Some(candidate));
        }
        let slot = self.slots.len();
        for &color in self.palette {
            if self.pins[slot].is_some_and(|pinned| pinned != color) {
                continue;
            }
            self.visited += 1;
            if self.visited > self.cap {
                return Err(ColorError::SearchCapExceeded(self.cap));
            }
            self.slots.push(color);
            if self.consistent(slot) {
                if let Some(found) = self.run()? {
                    return Ok(Some(found));
                }
            }
            self.slots.pop();
        }
        Ok(None)
    }

    /// Checks every constraint pair that involves the newly assigned slot.
    fn consistent(&self, slot: usize) -> bool {
        let assigned = self.slots.len();
        self.constraints
            .iter()
            .zip(self.images)
            .all(|((_, p), image)| {
                let Ok(mapped) = p.apply(self.slots[slot]) else {
                    return false;
                };
                let fwd = image[slot];
                if fwd < assigned && self.slots[fwd] != mapped {
                    return false;
                }
                // Slots that map onto `slot`.
                (0..assigned).all(|s| {
                    image[s] != slot
                        || p.apply(self.slots[s]).is_ok_and(|c| c == self.slots[slot])
                })
            })
    }
}

/// Primary colors `r, y, b`.
pub const PRIMARIES: [WheelColor; 3] = [WheelColor::Red, WheelColor::Yellow, WheelColor::Blue];

/// Secondary colors `o, g, p`.
pub const SECONDARIES: [WheelColor; 3] = [WheelColor::Orange, WheelColor::Green, WheelColor::Purple];

/// The threefold rotation permutation `r→b, y→r, b→y`.
pub fn primary_rotation_permutation() -> ColorPermutation {
    use WheelColor::*;
    ColorPermutation::two_line(&[Red, Yellow, Blue], &[Blue, Red, Yellow]).expect("bijection")
}

/// The 12-slot primary coloring `(y, b, r)` repeating clockwise from slot 0,
/// on which `α` induces [`primary_rotation_permutation`].
pub fn primary_threefold_coloring() -> SlotColoring {
    use WheelColor::*;
    SlotColoring::repeating(12, &[Yellow, Blue, Red])
}

/// Default inner-circle coloring: the smallest `(o, g, p)` coloring of 12
/// slots, using all three colors, on which `β` induces the identity.
pub fn default_inner_coloring() -> Result<Option<SlotColoring>, ColorError> {
    let beta = GroupElement::beta(12);
    solve_coloring(
        12,
        &SECONDARIES,
        &[(beta, ColorPermutation::identity(SECONDARIES))],
        &SolveOptions::default(),
    )
}
