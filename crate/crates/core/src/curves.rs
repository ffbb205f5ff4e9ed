//! Polar radius curves for nest walls, and the Fibonacci circle layout.

use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("angle {theta} outside [0, {max}]")]
    OutOfDomain { theta: f64, max: f64 },
    #[error("invalid curve: {0}")]
    Invalid(String),
}

/// Wall radius as a function of the polar angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusCurve {
    Circle { r: f64 },
    /// `a·sin(ℓθ)`
    RoseSin { a: f64, leaves: u32 },
    /// `a·cos(ℓθ)`
    RoseCos { a: f64, leaves: u32 },
    /// `γ + δθ` over `k` turns.
    Spiral { gamma: f64, delta: f64, turns: u32 },
}

impl RadiusCurve {
    pub fn validate(&self) -> Result<(), CurveError> {
        let bad = |msg: &str| Err(CurveError::Invalid(msg.to_string()));
        match *self {
            RadiusCurve::Circle { r } if !(r > 0.0 && r.is_finite()) => bad("circle radius must be > 0"),
            RadiusCurve::RoseSin { a, leaves } | RadiusCurve::RoseCos { a, leaves }
                if !(a > 0.0 && a.is_finite()) || leaves == 0 =>
            {
                bad("rose needs a > 0 and at least one leaf")
            }
            RadiusCurve::Spiral { gamma, delta, turns }
                if !(gamma > 0.0 && delta > 0.0 && gamma.is_finite() && delta.is_finite())
                    || turns == 0 =>
            {
                bad("spiral needs gamma > 0, delta > 0 and at least one turn")
            }
            _ => Ok(()),
        }
    }

    /// Number of full turns the angle parameter covers.
    pub fn turns(&self) -> u32 {
        match *self {
            RadiusCurve::Spiral { turns, .. } => turns,
            _ => 1,
        }
    }

    /// Upper end of the angle domain, `2kπ`.
    pub fn theta_max(&self) -> f64 {
        TAU * self.turns() as f64
    }

    /// Largest `|r(θ)|` over the domain.
    pub fn max_radius(&self) -> f64 {
        match *self {
            RadiusCurve::Circle { r } => r,
            RadiusCurve::RoseSin { a, .. } | RadiusCurve::RoseCos { a, .. } => a,
            RadiusCurve::Spiral { gamma, delta, turns } => gamma + delta * TAU * turns as f64,
        }
    }

    /// `r(θ)` without a domain check.
    pub fn radius_unchecked(&self, theta: f64) -> f64 {
        match *self {
            RadiusCurve::Circle { r } => r,
            RadiusCurve::RoseSin { a, leaves } => a * (leaves as f64 * theta).sin(),
            RadiusCurve::RoseCos { a, leaves } => a * (leaves as f64 * theta).cos(),
            RadiusCurve::Spiral { gamma, delta, .. } => gamma + delta * theta,
        }
    }

    /// The same curve with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> RadiusCurve {
        match *self {
            RadiusCurve::Circle { r } => RadiusCurve::Circle { r: r * factor },
            RadiusCurve::RoseSin { a, leaves } => RadiusCurve::RoseSin { a: a * factor, leaves },
            RadiusCurve::RoseCos { a, leaves } => RadiusCurve::RoseCos { a: a * factor, leaves },
            RadiusCurve::Spiral { gamma, delta, turns } => RadiusCurve::Spiral {
                gamma: gamma * factor,
                delta: delta * factor,
                turns,
            },
        }
    }
}

impl fmt::Display for RadiusCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RadiusCurve::Circle { r } => write!(f, "circle {r}"),
            RadiusCurve::RoseSin { a, leaves } => write!(f, "rose_sin {a} {leaves}"),
            RadiusCurve::RoseCos { a, leaves } => write!(f, "rose_cos {a} {leaves}"),
            RadiusCurve::Spiral { gamma, delta, turns } => write!(f, "spiral {gamma} {delta} {turns}"),
        }
    }
}

/// `r(θ)` for `θ` in `[0, 2kπ]`. Rose radii may be negative.
pub fn radius_at(c: &RadiusCurve, theta: f64) -> Result<f64, CurveError> {
    let max = c.theta_max();
    if !(0.0..=max).contains(&theta) {
        return Err(CurveError::OutOfDomain { theta, max });
    }
    Ok(c.radius_unchecked(theta))
}

/// `center + r(θ)·(cos θ, sin θ)`. A negative radius lands on the opposite
/// side of the center, which is how roses get their petals.
pub fn boundary_point(c: &RadiusCurve, center: Point, theta: f64) -> Result<Point, CurveError> {
    let r = radius_at(c, theta)?;
    Ok(center + Point::new(theta.cos(), theta.sin()) * r)
}

/// `180°·(3 − √5)`.
pub fn golden_angle() -> f64 {
    180.0 * (3.0 - 5f64.sqrt())
}

/// Circles placed at successive golden-angle steps on a carrier circle, with
/// Fibonacci radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FibLayout {
    pub count: usize,
    pub unit: f64,
    pub anchor: Point,
    pub base_radius: f64,
}

/// Circle `j` (1-based) has radius `unit·F_j` and sits at angle `j·golden`
/// on the carrier circle.
pub fn fibonacci_layout(f: &FibLayout) -> Vec<(Point, f64)> {
    let step = golden_angle() * PI / 180.0;
    let (mut prev, mut cur) = (0u64, 1u64);
    (1..=f.count)
        .map(|j| {
            let fib = cur;
            (prev, cur) = (cur, prev.saturating_add(cur));
            let phi = j as f64 * step;
            let center = f.anchor + Point::new(phi.cos(), phi.sin()) * f.base_radius;
            (center, f.unit * fib as f64)
        })
        .collect()
}
