//! Agent-based nest construction.
//!
//! Each nest has a foraging ground (an annulus around its center, modeled as
//! a grain counter) and a colony of ants. An empty ant walks outward to the
//! ground and picks up a grain there; a carrying ant walks toward the center
//! and at every step drops its grain with probability
//!
//! ```text
//! p_deposit_max · exp(−(d − r(θ))² / (2σ²))
//! ```
//!
//! where `d` and `θ` are its polar coordinates relative to the nest and `r` is
//! the nest's wall curve. The deposited grains form a wall with a Gaussian
//! radial profile around `r(θ)`.
//!
//! A carrying ant that passes more than `4σ` inside the wall without
//! dropping turns around and sweeps back out to `4σ` beyond it, then inward
//! again, so every crossing of the wall band is matched by one in the other
//! direction. Picking up a grain moves the ant to the grain, a uniformly random
//! point of the foraging ground.
//!
//! Randomness: nest `i` draws from a ChaCha8 stream seeded with
//! `seed ^ splitmix64(i)`. Nests never share state, so they can be simulated
//! on any number of threads with identical results.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::io::{self, BufRead};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::curves::{CurveError, RadiusCurve};
use crate::geom::{exact_sin_cos, wrap_angle, Point};
use crate::raster::Rgb;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation parameters: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("unknown nest id {0}")]
    UnknownNest(usize),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("grain dump line {line}: {message}")]
    Dump { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Where a nest's grains get their color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorSource {
    Fixed(Rgb),
    /// Colored later from a source image at each grain's position.
    SampleImage,
}

/// A motif: center, color source and wall curve.
///
/// `orientation` and `mirrored` place the curve's own frame in the canvas: a
/// curve point at angle `θ` appears at canvas angle `orientation + θ`, or
/// `orientation − θ` when mirrored.
#[derive(Debug, Clone, PartialEq)]
pub struct Nest {
    pub id: usize,
    pub center: Point,
    pub color_source: ColorSource,
    pub curve: RadiusCurve,
    pub orientation: f64,
    pub mirrored: bool,
    /// Overrides the foraging annulus from [`SimParams`].
    pub forage: Option<(f64, f64)>,
}

impl Nest {
    pub fn new(id: usize, center: Point, curve: RadiusCurve, color_source: ColorSource) -> Self {
        Self {
            id,
            center,
            color_source,
            curve,
            orientation: 0.0,
            mirrored: false,
            forage: None,
        }
    }

    /// Angle of canvas offset `rel` in the curve's own frame, in `[0, 2π)`.
    pub fn local_angle(&self, rel: Point) -> f64 {
        let a = rel.angle() - self.orientation;
        wrap_angle(if self.mirrored { -a } else { a })
    }

    /// Distance from the center to the wall along the ray through `rel`.
    /// Spirals use turn `turn` of the curve. A rose ray may cross no petal
    /// (`None`) or two, in which case the one nearer `|rel|` wins.
    pub fn wall_distance(&self, rel: Point, turn: u32) -> Option<f64> {
        let theta = self.local_angle(rel);
        match self.curve {
            RadiusCurve::Circle { r } => Some(r),
            RadiusCurve::Spiral { .. } => Some(self.curve.radius_unchecked(theta + TAU * turn as f64)),
            RadiusCurve::RoseSin { .. } | RadiusCurve::RoseCos { .. } => {
                let d = rel.norm();
                let here = self.curve.radius_unchecked(theta);
                // A negative radius at θ + π plots on this ray.
                let opposite = -self.curve.radius_unchecked(wrap_angle(theta + PI));
                [here, opposite]
                    .into_iter()
                    .filter(|w| *w > 0.0)
                    .min_by(|a, b| (a - d).abs().total_cmp(&(b - d).abs()))
            }
        }
    }

    /// Default foraging annulus: starts `5σ` past the curve's farthest point.
    fn forage_ring(&self, params: &SimParams) -> (f64, f64) {
        if let Some(ring) = self.forage {
            return ring;
        }
        let inner = params
            .forage_min
            .unwrap_or(self.curve.max_radius() + 5.0 * params.sigma);
        let outer = params
            .forage_max
            .unwrap_or(inner + (10.0 * params.sigma).max(0.25 * self.curve.max_radius()));
        (inner, outer)
    }
}

/// Simulation parameters, shared by all nests.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Wall thickness (standard deviation of the radial grain profile).
    pub sigma: f64,
    pub p_deposit_max: f64,
    pub p_pickup: f64,
    /// Step length; `None` means `sigma / 2`.
    pub step_len: Option<f64>,
    /// Inner radius of the foraging annulus; `None` derives it per nest.
    pub forage_min: Option<f64>,
    pub forage_max: Option<f64>,
    pub ants_per_nest: usize,
    pub grains_total: usize,
    pub max_steps: u64,
    pub seed: u64,
    /// Half-width of the uniform heading jitter, in degrees.
    pub jitter_deg: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            p_deposit_max: DEFAULT_P_DEPOSIT_MAX,
            p_pickup: 0.5,
            step_len: None,
            forage_min: None,
            forage_max: None,
            ants_per_nest: 64,
            grains_total: 2000,
            max_steps: 1_000_000,
            seed: 0,
            jitter_deg: 60.0,
        }
    }
}

/// Peak per-step deposit probability used unless overridden.
///
/// Kept low so an ant crosses the wall band several times before dropping;
/// near 1 the first inbound crossing dominates and the wall drifts outward
/// by about one σ.
pub const DEFAULT_P_DEPOSIT_MAX: f64 = 0.05;

impl SimParams {
    pub fn step_len(&self) -> f64 {
        self.step_len.unwrap_or(self.sigma / 2.0)
    }

    /// Lists every violated bound.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut errors = Vec::new();
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            errors.push(format!("sigma must be > 0 (got {})", self.sigma));
        }
        if !(self.p_deposit_max > 0.0 && self.p_deposit_max <= 1.0) {
            errors.push(format!("p_deposit_max must be in (0, 1] (got {})", self.p_deposit_max));
        }
        if !(self.p_pickup > 0.0 && self.p_pickup <= 1.0) {
            errors.push(format!("p_pickup must be in (0, 1] (got {})", self.p_pickup));
        }
        if let Some(step) = self.step_len {
            if !(step > 0.0 && step.is_finite()) {
                errors.push(format!("step_len must be > 0 (got {step})"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.forage_min, self.forage_max) {
            if !(lo >= 0.0 && lo < hi) {
                errors.push(format!("need 0 <= forage_min < forage_max (got {lo}, {hi})"));
            }
        }
        if !(0.0..=180.0).contains(&self.jitter_deg) {
            errors.push(format!("jitter_deg must be in [0, 180] (got {})", self.jitter_deg));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(SimError::Invalid(errors))
        }
    }
}

/// `p_max · exp(−(d − wall)² / (2σ²))`.
pub fn deposit_kernel(d: f64, wall: f64, sigma: f64, p_max: f64) -> f64 {
    let z = (d - wall) / sigma;
    p_max * (-0.5 * z * z).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ant {
    pub position: Point,
    pub carrying: bool,
    pub nest_id: usize,
    /// While carrying: sweeping toward the center (true) or back out.
    pub inbound: bool,
    /// Spiral turn the carried grain belongs to.
    pub turn: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grain {
    pub position: Point,
    pub color: Rgb,
}

/// One nest's colony, foraging counter, wall and random stream.
#[derive(Debug, Clone)]
pub struct NestSim {
    pub nest: Nest,
    pub ants: Vec<Ant>,
    pub remaining: usize,
    pub deposited: Vec<Grain>,
    forage: (f64, f64),
    rng: ChaCha8Rng,
}

impl NestSim {
    pub fn carried(&self) -> usize {
        self.ants.iter().filter(|a| a.carrying).count()
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0 && self.ants.iter().all(|a| !a.carrying)
    }

    pub fn forage_ring(&self) -> (f64, f64) {
        self.forage
    }
}

/// The whole simulation.
#[derive(Debug, Clone)]
pub struct SimState {
    pub nests: Vec<NestSim>,
    pub params: SimParams,
    pub step_count: u64,
}

/// SplitMix64 finalizer, used to derive per-nest seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of nest `id`'s random stream under master seed `seed`.
pub fn nest_seed(seed: u64, id: usize) -> u64 {
    seed ^ splitmix64(id as u64)
}

fn point_in_ring(rng: &mut ChaCha8Rng, center: Point, (inner, outer): (f64, f64)) -> Point {
    let u: f64 = rng.random();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    let phi = TAU * rng.random::<f64>();
    center + Point::new(phi.cos(), phi.sin()) * r
}

pub fn init_sim(nests: Vec<Nest>, params: SimParams) -> Result<SimState, SimError> {
    params.validate()?;
    let mut problems = Vec::new();
    for nest in &nests {
        if let Err(e) = nest.curve.validate() {
            problems.push(format!("nest {}: {e}", nest.id));
        }
        let (lo, hi) = nest.forage_ring(&params);
        if !(lo >= 0.0 && lo < hi) {
            problems.push(format!("nest {}: foraging ring ({lo}, {hi}) is empty", nest.id));
        }
    }
    if !problems.is_empty() {
        return Err(SimError::Invalid(problems));
    }
    let sims = nests
        .into_iter()
        .map(|nest| {
            let mut rng = ChaCha8Rng::seed_from_u64(nest_seed(params.seed, nest.id));
            let forage = nest.forage_ring(&params);
            let ants = (0..params.ants_per_nest)
                .map(|_| Ant {
                    position: point_in_ring(&mut rng, nest.center, forage),
                    carrying: false,
                    nest_id: nest.id,
                    inbound: true,
                    turn: 0,
                })
                .collect();
            NestSim {
                ants,
                remaining: params.grains_total,
                deposited: Vec::with_capacity(params.grains_total),
                forage,
                rng,
                nest,
            }
        })
        .collect();
    Ok(SimState {
        nests: sims,
        params,
        step_count: 0,
    })
}

fn step_nest(sim: &mut NestSim, params: &SimParams) {
    let sigma = params.sigma;
    let step_len = params.step_len();
    let jitter = params.jitter_deg.to_radians();
    let turns = sim.nest.curve.turns();
    let center = sim.nest.center;
    let (ring_in, ring_out) = sim.forage;

    for i in 0..sim.ants.len() {
        let ant = &mut sim.ants[i];
        if !ant.carrying && sim.remaining == 0 {
            continue;
        }
        let rel = ant.position - center;
        let d = rel.norm();
        let toward_center;
        if ant.carrying {
            let wall = sim.nest.wall_distance(rel, ant.turn);
            let p = wall.map_or(0.0, |w| deposit_kernel(d, w, sigma, params.p_deposit_max));
            if sim.rng.random::<f64>() < p {
                ant.carrying = false;
                let color = match sim.nest.color_source {
                    ColorSource::Fixed(c) => c,
                    ColorSource::SampleImage => Rgb::BLACK,
                };
                sim.deposited.push(Grain {
                    position: ant.position,
                    color,
                });
                continue;
            }
            let (inner, outer) = match wall {
                Some(w) => (w - 4.0 * sigma, w + 4.0 * sigma),
                None => (0.0, ring_in),
            };
            if ant.inbound && d <= inner.max(step_len) {
                ant.inbound = false;
            } else if !ant.inbound && d >= outer {
                ant.inbound = true;
            }
            toward_center = ant.inbound;
        } else {
            if d >= ring_in && d <= ring_out && sim.rng.random::<f64>() < params.p_pickup {
                sim.remaining -= 1;
                ant.carrying = true;
                ant.inbound = true;
                ant.position = point_in_ring(&mut sim.rng, center, sim.forage);
                ant.turn = if turns > 1 { sim.rng.random_range(0..turns) } else { 0 };
                continue;
            }
            toward_center = d > ring_out;
        }
        let outward = rel.angle();
        let bearing = if toward_center { outward + PI } else { outward };
        let heading = bearing + jitter * (2.0 * sim.rng.random::<f64>() - 1.0);
        let (s, c) = exact_sin_cos(heading);
        ant.position = ant.position + Point::new(c, s) * step_len;
    }
}

impl SimState {
    /// Advances every ant of every nest by one step.
    pub fn step(&mut self) {
        let params = &self.params;
        for sim in &mut self.nests {
            step_nest(sim, params);
        }
        self.step_count += 1;
    }

    pub fn is_done(&self) -> bool {
        self.nests.iter().all(NestSim::is_done)
    }

    /// Grains of nest `nest_id` in deposition order.
    pub fn grain_positions(&self, nest_id: usize) -> Result<&[Grain], SimError> {
        self.nests
            .iter()
            .find(|s| s.nest.id == nest_id)
            .map(|s| s.deposited.as_slice())
            .ok_or(SimError::UnknownNest(nest_id))
    }

    /// `(remaining, carried, deposited)` for each nest.
    pub fn grain_accounts(&self) -> Vec<(usize, usize, usize)> {
        self.nests
            .iter()
            .map(|s| (s.remaining, s.carried(), s.deposited.len()))
            .collect()
    }
}

pub fn step(state: &mut SimState) {
    state.step();
}

pub fn grain_positions(state: &SimState, nest_id: usize) -> Result<&[Grain], SimError> {
    state.grain_positions(nest_id)
}

/// Result of [`run_until_empty`].
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SimState,
    pub completed: bool,
}

/// Steps until every foraging ground is empty and no ant carries a grain, or
/// until `max_steps` total steps have run.
///
/// Nests run independently on a pool of `threads` workers (0 = one per CPU).
/// A finished nest's ants are idle and draw no random numbers, so the result
/// equals stepping all nests in lockstep.
pub fn run_until_empty(mut state: SimState, max_steps: u64, threads: usize) -> RunOutcome {
    let budget = max_steps.saturating_sub(state.step_count);
    let params = state.params.clone();
    let run = |sim: &mut NestSim| -> u64 {
        let mut used = 0;
        while used < budget && !sim.is_done() {
            step_nest(sim, &params);
            used += 1;
        }
        used
    };
    let used: Vec<u64> = if threads == 1 {
        state.nests.iter_mut().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| state.nests.par_iter_mut().map(run).collect())
    };
    state.step_count += used.into_iter().max().unwrap_or(0);
    let completed = state.is_done();
    RunOutcome { state, completed }
}

/// Writes `nest_id x y r g b` lines.
pub fn format_grain_dump<'a, I>(grains: I) -> String
where
    I: IntoIterator<Item = (usize, &'a Grain)>,
{
    let mut out = String::new();
    for (id, g) in grains {
        let c = g.color;
        writeln!(
            out,
            "{id} {:.4} {:.4} {} {} {}",
            g.position.x, g.position.y, c.r, c.g, c.b
        )
        .expect("writing to a String");
    }
    out
}

pub fn parse_grain_dump<R: BufRead>(reader: R) -> Result<Vec<(usize, Grain)>, SimError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| SimError::Dump {
            line: i + 1,
            message: message.to_string(),
        };
        let f: Vec<&str> = line.split_whitespace().collect();
        let [id, x, y, r, g, b] = f[..] else {
            return Err(err("expected 6 fields"));
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| err("bad coordinate"));
        let byte = |s: &str| s.parse::<u8>().map_err(|_| err("bad color channel"));
        out.push((
            id.parse().map_err(|_| err("bad nest id"))?,
            Grain {
                position: Point::new(num(x)?, num(y)?),
                color: Rgb::new(byte(r)?, byte(g)?, byte(b)?),
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn red_circle(r: f64) -> Nest {
        Nest::new(
            0,
            Point::new(200.0, 200.0),
            RadiusCurve::Circle { r },
            ColorSource::Fixed(Rgb::new(254, 39, 18)),
        )
    }

    fn small_params() -> SimParams {
        SimParams {
            grains_total: 300,
            ants_per_nest: 16,
            seed: 7,
            ..SimParams::default()
        }
    }

    #[test]
    fn kernel_values() {
        assert_eq!(deposit_kernel(100.0, 100.0, 3.0, 0.9), 0.9);
        let expected = 0.9 * (-0.5f64).exp();
        assert!((deposit_kernel(103.0, 100.0, 3.0, 0.9) - expected).abs() < 1e-15);
        assert!((deposit_kernel(97.0, 100.0, 3.0, 0.9) - expected).abs() < 1e-15);
        assert!((expected / 0.9 - 0.6065306597).abs() < 1e-9);
        assert_eq!(deposit_kernel(1e6, 100.0, 3.0, 0.9), 0.0);
    }

    #[test]
    fn validation_lists_every_problem() {
        let bad = SimParams {
            sigma: 0.0,
            p_pickup: 1.5,
            forage_min: Some(10.0),
            forage_max: Some(5.0),
            ..SimParams::default()
        };
        match bad.validate() {
            Err(SimError::Invalid(list)) => assert_eq!(list.len(), 3, "{list:?}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(init_sim(vec![red_circle(0.0)], SimParams::default()).is_err());
    }

    #[test]
    fn no_ants_is_inert() {
        let params = SimParams {
            ants_per_nest: 0,
            ..small_params()
        };
        let mut state = init_sim(vec![red_circle(50.0)], params).unwrap();
        assert_eq!(state.grain_accounts(), vec![(300, 0, 0)]);
        state.step();
        assert_eq!(state.step_count, 1);
        assert_eq!(state.grain_accounts(), vec![(300, 0, 0)]);
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_sim(vec![red_circle(50.0)], small_params()).unwrap();
        let b = init_sim(vec![red_circle(50.0)], small_params()).unwrap();
        assert_eq!(a.nests[0].ants, b.nests[0].ants);
        let (lo, hi) = a.nests[0].forage_ring();
        for ant in &a.nests[0].ants {
            let d = ant.position.distance(Point::new(200.0, 200.0));
            assert!(d >= lo - 1e-9 && d <= hi + 1e-9);
            assert!(!ant.carrying);
        }
    }

    #[test]
    fn conservation_and_monotone_progress() {
        let mut state = init_sim(vec![red_circle(40.0)], small_params()).unwrap();
        let mut last_remaining = usize::MAX;
        for _ in 0..5000 {
            state.step();
            let (remaining, carried, deposited) = state.grain_accounts()[0];
            assert_eq!(remaining + carried + deposited, 300);
            assert!(remaining <= last_remaining);
            last_remaining = remaining;
            if state.is_done() {
                break;
            }
        }
        assert!(state.is_done());
    }

    #[test]
    fn run_completes_and_matches_lockstep() {
        let nests = vec![
            red_circle(40.0),
            Nest {
                id: 1,
                center: Point::new(500.0, 200.0),
                ..red_circle(25.0)
            },
        ];
        let state = init_sim(nests.clone(), small_params()).unwrap();
        let out = run_until_empty(state, 1_000_000, 4);
        assert!(out.completed);
        assert_eq!(out.state.grain_positions(0).unwrap().len(), 300);
        assert!(out.state.grain_positions(2).is_err());

        let mut lockstep = init_sim(nests, small_params()).unwrap();
        while !lockstep.is_done() {
            lockstep.step();
        }
        for id in 0..2 {
            assert_eq!(
                lockstep.grain_positions(id).unwrap(),
                out.state.grain_positions(id).unwrap()
            );
        }
        assert_eq!(lockstep.step_count, out.state.step_count);
    }

    #[test]
    fn incomplete_run_is_flagged() {
        let state = init_sim(vec![red_circle(40.0)], small_params()).unwrap();
        let out = run_until_empty(state, 10, 1);
        assert!(!out.completed);
        assert_eq!(out.state.step_count, 10);
        let (remaining, carried, deposited) = out.state.grain_accounts()[0];
        assert_eq!(remaining + carried + deposited, 300);
    }

    #[test]
    fn grains_start_empty() {
        let state = init_sim(vec![red_circle(40.0)], small_params()).unwrap();
        assert!(state.grain_positions(0).unwrap().is_empty());
    }

    #[test]
    fn rose_walls_follow_the_plotted_curve() {
        let nest = Nest::new(
            0,
            Point::ORIGIN,
            RadiusCurve::RoseSin { a: 50.0, leaves: 3 },
            ColorSource::SampleImage,
        );
        // Petal tip at θ = π/6.
        let tip = Point::polar(PI / 6.0) * 40.0;
        assert!((nest.wall_distance(tip, 0).unwrap() - 50.0).abs() < 1e-9);
        // r(π/2) = −50 plots at angle 3π/2.
        let down = Point::new(0.0, -10.0);
        assert!((nest.wall_distance(down, 0).unwrap() - 50.0).abs() < 1e-9);
        // Between petals there is no wall.
        assert_eq!(nest.wall_distance(Point::new(0.0, 10.0), 0), None);

        let even = Nest::new(
            0,
            Point::ORIGIN,
            RadiusCurve::RoseCos { a: 30.0, leaves: 2 },
            ColorSource::SampleImage,
        );
        assert!((even.wall_distance(Point::new(0.0, 5.0), 0).unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn spiral_turns_and_orientation() {
        let mut nest = Nest::new(
            0,
            Point::ORIGIN,
            RadiusCurve::Spiral { gamma: 10.0, delta: 2.0, turns: 2 },
            ColorSource::SampleImage,
        );
        let east = Point::new(5.0, 0.0);
        assert_eq!(nest.wall_distance(east, 0), Some(10.0));
        assert!((nest.wall_distance(east, 1).unwrap() - (10.0 + 4.0 * PI)).abs() < 1e-12);
        nest.orientation = PI / 2.0;
        assert!((nest.local_angle(east) - 1.5 * PI).abs() < 1e-12);
        nest.mirrored = true;
        assert!((nest.local_angle(east) - 0.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn dump_round_trip() {
        let grains = [
            Grain {
                position: Point::new(1.5, -2.25),
                color: Rgb::new(1, 2, 3),
            },
            Grain {
                position: Point::new(100.0, 0.125),
                color: Rgb::WHITE,
            },
        ];
        let text = format_grain_dump(grains.iter().enumerate());
        assert_eq!(text.lines().next().unwrap(), "0 1.5000 -2.2500 1 2 3");
        let parsed = parse_grain_dump(text.as_bytes()).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[1].1, grains[1]);
        assert!(matches!(
            parse_grain_dump("0 1 2 3".as_bytes()),
            Err(SimError::Dump { line: 1, .. })
        ));
    }
}
