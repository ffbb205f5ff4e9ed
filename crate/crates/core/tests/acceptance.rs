//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use chromaglyph::colorwheel::{
    self, permutation_order, primary_rotation_permutation, ColorPermutation, SolveOptions,
    WheelColor, PRIMARIES,
};
use chromaglyph::curves::{fibonacci_layout, golden_angle, FibLayout, RadiusCurve};
use chromaglyph::huemap::{self, HsvColor, HsvImage, HueMap, Section, SectionAssignment};
use chromaglyph::raster::{self, Canvas, Rgb, RybPalette};
use chromaglyph::stigmergy::{self, ColorSource, Nest, SimParams};
use chromaglyph::symgroup::{compose, inverse, DihedralGroup, GroupElement};
use chromaglyph::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

// ---------------------------------------------------------------------------

fn group_axioms(n: u32) -> Outcome {
    let group = DihedralGroup::new(n).map_err(|e| e.to_string())?;
    let els = group.elements();
    ensure(els.len() == 2 * n as usize, || format!("D{n} has {} elements", els.len()))?;
    for (i, a) in els.iter().enumerate() {
        ensure(!els[..i].contains(a), || format!("D{n}: duplicate {a}"))?;
    }
    let e = group.identity();
    let op = |a: GroupElement, b: GroupElement| compose(a, b).map_err(|err| err.to_string());
    for &a in &els {
        ensure(op(e, a)? == a && op(a, e)? == a, || format!("D{n}: identity fails for {a}"))?;
        let inv = inverse(a);
        ensure(op(a, inv)? == e && op(inv, a)? == e, || format!("D{n}: inverse fails for {a}"))?;
        for &b in &els {
            let ab = op(a, b)?;
            ensure(els.contains(&ab), || format!("D{n}: {a}{b} not closed"))?;
            for &c in &els {
                ensure(op(ab, c)? == op(a, op(b, c)?)?, || format!("D{n}: ({a}{b}){c} != {a}({b}{c})"))?;
            }
        }
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let d12 = DihedralGroup::new(12).map_err(|e| e.to_string())?;
    ensure(d12.elements().len() == 24 && d12.order() == 24, || "D12 order is not 24".into())?;
    let (a, b) = (d12.alpha(), d12.beta());
    let bab = compose(compose(b, a).unwrap(), b).unwrap();
    ensure(bab == GroupElement::rotation(12, 11), || format!("βαβ = {bab}"))?;
    for n in [2, 3, 4, 6, 12] {
        group_axioms(n)?;
    }
    within(start.elapsed(), Duration::from_secs(1))
}

// ---------------------------------------------------------------------------

/// Slot colors after moving every slot by `g`, computed from the slot
/// positions on the clock face rather than the library's slot action.
fn moved_slot(n: usize, g: GroupElement, slot: usize) -> usize {
    // Slot s sits at clock angle 2πs/n measured clockwise from 12 o'clock.
    let angle = -(TAU * slot as f64 / n as f64) + PI / 2.0;
    let (x, y) = (angle.cos(), angle.sin());
    let k = g.exponent() as f64;
    // α turns counter-clockwise by 2π/n; β mirrors in the vertical axis.
    let (x, y) = if g.is_reflection() {
        let t = -TAU * k / n as f64;
        let (rx, ry) = (x * t.cos() - y * t.sin(), x * t.sin() + y * t.cos());
        (-rx, ry)
    } else {
        let t = TAU * k / n as f64;
        (x * t.cos() - y * t.sin(), x * t.sin() + y * t.cos())
    };
    let clock = (PI / 2.0 - y.atan2(x)).rem_euclid(TAU);
    ((clock / TAU * n as f64).round() as usize) % n
}

fn preserves(c: &[WheelColor], g: GroupElement) -> bool {
    (0..c.len()).all(|s| c[moved_slot(c.len(), g, s)] == c[s])
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let p = primary_rotation_permutation();
    let alpha = GroupElement::alpha(12);
    let options = SolveOptions {
        pins: vec![(0, WheelColor::Yellow)],
        ..SolveOptions::default()
    };
    let coloring = colorwheel::solve_coloring(12, &PRIMARIES, &[(alpha, p.clone())], &options)
        .map_err(|e| e.to_string())?
        .ok_or("no coloring found")?;
    let c = coloring.colors();
    // Induced permutation of α checked directly: c[α(s)] = p(c[s]).
    for s in 0..12 {
        ensure(c[moved_slot(12, alpha, s)] == p.apply(c[s]).unwrap(), || {
            format!("solution {coloring} violates the α constraint at slot {s}")
        })?;
    }
    let group = DihedralGroup::new(12).unwrap();
    let rotations: Vec<u32> = group
        .elements()
        .into_iter()
        .filter(|g| !g.is_reflection() && preserves(c, *g))
        .map(|g| g.exponent())
        .collect();
    ensure(rotations == [0, 3, 6, 9], || format!("preserving rotations {rotations:?}"))?;
    let fixed_reflections: Vec<String> = group
        .elements()
        .into_iter()
        .filter(|g| g.is_reflection() && preserves(c, *g))
        .map(|g| g.to_string())
        .collect();
    ensure(fixed_reflections.is_empty(), || format!("reflections preserving colors: {fixed_reflections:?}"))?;
    let lib: Vec<GroupElement> = colorwheel::color_preserving_elements(&coloring).map_err(|e| e.to_string())?;
    let expected: Vec<GroupElement> = [0, 3, 6, 9].iter().map(|&k| GroupElement::rotation(12, k)).collect();
    ensure(lib == expected, || format!("library reports {lib:?}"))?;
    within(start.elapsed(), Duration::from_secs(1))
}

// ---------------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let p = primary_rotation_permutation();
    ensure(permutation_order(&p) == 3, || format!("order {}", permutation_order(&p)))?;
    let step = |c: WheelColor, times: usize| (0..times).fold(c, |c, _| p.apply(c).unwrap());
    for m in 1..=3 {
        let fixed = PRIMARIES.iter().all(|&c| step(c, m) == c);
        ensure(fixed == (m == 3), || format!("p^{m} fixed = {fixed}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let table: Vec<f64> = (0..256).map(|i| (i as f64 * 0.37).sin().abs()).collect();
    let mut maps = vec![
        HueMap::Identity,
        HueMap::F1,
        HueMap::F2,
        HueMap::F3,
        HueMap::F4,
        HueMap::F5,
        HueMap::Table(table),
    ];
    maps.extend((1..=6).map(HueMap::Fk));
    let grid = 1_000_000;
    for m in &maps {
        for i in 0..grid {
            let h = i as f64 / grid as f64;
            let v = m.eval(h).map_err(|e| e.to_string())?;
            if !(0.0..1.0).contains(&v) {
                return Err(format!("{m}({h}) = {v}"));
            }
        }
    }
    let checks = [
        ("f3(0.5) raw", HueMap::F3.raw(0.5), 1.0),
        ("f4(0.5)", HueMap::F4.eval(0.5).unwrap(), 0.0),
        ("f5(0)", HueMap::F5.eval(0.0).unwrap(), 0.3),
        ("f2(0)", HueMap::F2.eval(0.0).unwrap(), 0.5),
        ("f2(0.75)", HueMap::F2.eval(0.75).unwrap(), 0.5),
    ];
    for (name, got, want) in checks {
        ensure((got - want).abs() <= 1e-12, || format!("{name} = {got}, want {want}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))
}

// ---------------------------------------------------------------------------

fn oracle_map(name: &str, h: f64) -> f64 {
    let v = match name {
        "f1" => 0.45 * (20.0 * SQRT_2 * PI * h).sin().abs() + 0.55 * (20.0 * PI * h).sin().abs(),
        "f2" => (1.0 + (40.0 * PI * h).sin()) / 2.0,
        "f3" => 4.0 * h - 4.0 * h * h,
        "f4" => 1.0 - 4.0 * h + 4.0 * h * h,
        "f5" => 0.15 + 0.15 * (40.0 * PI * h).cos() + h / 2.0,
        _ => unreachable!(),
    };
    v - v.floor()
}

fn hue_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let (w, h) = (256usize, 256usize);
    let pixels: Vec<HsvColor> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| HsvColor::new(x as f64 / w as f64, 0.2 + 0.8 * y as f64 / h as f64, 1.0 - 0.5 * x as f64 / w as f64))
        .collect();
    let image = HsvImage { width: w, height: h, pixels };
    let names = ["f1", "f2", "f3", "f4", "f5"];
    let parse = |s: &str| s.parse::<HueMap>().unwrap();
    let mut mismatches = 0usize;
    for (i, reference) in [Section::Ne, Section::Nw, Section::Se, Section::Sw].into_iter().enumerate() {
        let (rot, rv, rh) = (names[i], names[(i + 1) % 5], names[(i + 2) % 5]);
        let assignment = SectionAssignment {
            reference,
            rotation: parse(rot),
            reflect_v: parse(rv),
            reflect_h: parse(rh),
        };
        let out = huemap::apply_d2_color_symmetry(&image, &assignment);
        let (ref_east, ref_south) = (matches!(reference, Section::Ne | Section::Se), matches!(reference, Section::Se | Section::Sw));
        for y in 0..h {
            for x in 0..w {
                let src = image.pixels[y * w + x];
                let got = out.pixels[y * w + x];
                let east = 2 * x >= w;
                let south = 2 * y >= h;
                let want_h = match (east != ref_east, south != ref_south) {
                    (false, false) => src.h,
                    (true, true) => oracle_map(rot, src.h),
                    (true, false) => oracle_map(rv, src.h),
                    (false, true) => oracle_map(rh, src.h),
                };
                let same_section = east == ref_east && south == ref_south;
                let ok = if same_section {
                    got == src
                } else {
                    got.s == src.s && got.v == src.v && hue_gap(got.h, want_h) <= 1e-12
                };
                if !ok {
                    mismatches += 1;
                }
            }
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatched pixels"))?;
    within(start.elapsed(), Duration::from_secs(1))
}

// ---------------------------------------------------------------------------

fn two_sample_ks(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let center = Point::new(200.0, 200.0);
    let nest = Nest::new(0, center, RadiusCurve::Circle { r: 100.0 }, ColorSource::Fixed(Rgb::WHITE));
    let params = SimParams {
        sigma: 3.0,
        grains_total: 20_000,
        seed: 2024,
        ..SimParams::default()
    };
    let max_steps = params.max_steps;
    let state = stigmergy::init_sim(vec![nest], params).map_err(|e| e.to_string())?;
    let outcome = stigmergy::run_until_empty(state, max_steps, 0);
    let sim = &outcome.state.nests[0];
    ensure(outcome.completed && sim.remaining == 0 && sim.carried() == 0, || {
        format!("unfinished: remaining {}, carried {}", sim.remaining, sim.carried())
    })?;
    ensure(sim.deposited.len() == 20_000, || format!("{} grains deposited", sim.deposited.len()))?;
    let mut radii: Vec<f64> = sim.deposited.iter().map(|g| g.position.distance(center)).collect();
    let n = radii.len() as f64;
    let mean = radii.iter().sum::<f64>() / n;
    let std = (radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    ensure((99.5..=100.5).contains(&mean), || format!("mean radius {mean:.3}"))?;
    ensure((2.4..=3.6).contains(&std), || format!("radial std {std:.3}"))?;

    let normal = Normal::new(100.0, std).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut reference: Vec<f64> = (0..10_000)
        .map(|_| normal.inverse_cdf(rng.random_range(f64::EPSILON..1.0)))
        .collect();
    let d = two_sample_ks(&mut radii, &mut reference);
    let alpha: f64 = 0.001;
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let critical = c * ((20_000.0 + 10_000.0) / (20_000.0 * 10_000.0f64)).sqrt();
    ensure(d < critical, || format!("KS D = {d:.4}, critical {critical:.4}"))?;

    let bins = 36;
    let mut counts = vec![0usize; bins];
    for g in &sim.deposited {
        let a = (g.position - center).angle();
        counts[((a / TAU * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expected = n / bins as f64;
    let chi2: f64 = counts.iter().map(|&k| (k as f64 - expected).powi(2) / expected).sum();
    let limit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.999);
    ensure(chi2 < limit, || format!("angular χ² {chi2:.2} >= {limit:.2}"))?;
    within(start.elapsed(), Duration::from_secs(10))
}

// ---------------------------------------------------------------------------

fn determinism_scene() -> String {
    let mut text = String::from(
        "[canvas]\nwidth = 600\nheight = 450\ngrid = 3 4\nbackground = black\n\n[sim]\ngrains = 1500\nseed = 11\n",
    );
    let curves = ["circle 40", "rose_sin 45 3", "spiral 8 3 2"];
    let colors = ["red", "yellow", "blue", "green"];
    for i in 0..12 {
        text.push_str(&format!(
            "\n[motif]\ncurve = {}\ncolor = {}\norientation = {}\n",
            curves[i % 3],
            colors[i % 4],
            15 * i
        ));
    }
    text
}

fn run_cli(args: &[&str], threads: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_chromaglyph"))
        .args(args)
        .env("CHROMAGLYPH_THREADS", threads)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("{args:?} exited with {status}"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scene = dir.path().join("grid.scene");
    std::fs::write(&scene, determinism_scene()).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for (i, threads) in ["4", "4", "1"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}.ppm"));
        run_cli(
            &["generate", "--scene", scene.to_str().unwrap(), "--seed", "5", "--out", out.to_str().unwrap()],
            threads,
        )?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let canvas = raster::decode_ppm(&outputs[0]).map_err(|e| e.to_string())?;
    ensure(canvas.count_non_background() > 0, || "empty image".into())?;
    ensure(outputs[0] == outputs[1], || "two runs differ".into())?;
    ensure(outputs[0] == outputs[2], || "1 and 4 threads differ".into())?;
    within(start.elapsed(), Duration::from_secs(30))
}

// ---------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scene = dir.path().join("mirror.scene");
    std::fs::write(
        &scene,
        "[canvas]\nwidth = 401\nheight = 301\n\n[sim]\ngrains = 3000\n\n\
         [motif]\ncenter = 120 150\ncurve = circle 40\ncolor = red\n\n\
         [replicate]\ngroup = 12\ncenter = 200 150\nelements = b a\n\
         color.a = r->b, y->r, b->y\ncolor.b = r->b, b->r, y->y\n",
    )
    .map_err(|e| e.to_string())?;
    let dump = dir.path().join("grains.txt");
    run_cli(
        &["dump-grains", "--scene", scene.to_str().unwrap(), "--seed", "3", "--out", dump.to_str().unwrap()],
        "0",
    )?;
    let file = std::fs::File::open(&dump).map_err(|e| e.to_string())?;
    let grains = stigmergy::parse_grain_dump(std::io::BufReader::new(file)).map_err(|e| e.to_string())?;
    let of = |id: usize| grains.iter().filter(|(n, _)| *n == id).map(|(_, g)| *g).collect::<Vec<_>>();
    let (original, mirrored, rotated) = (of(0), of(1), of(2));
    ensure(original.len() == 3000 && mirrored.len() == 3000 && rotated.len() == 3000, || {
        format!("grain counts {} {} {}", original.len(), mirrored.len(), rotated.len())
    })?;

    // Reflect the original dump in the vertical line x = 200 and format it
    // the same way as the dump.
    let reflected: Vec<String> = original
        .iter()
        .map(|g| format!("{:.4} {:.4}", 400.0 - g.position.x, g.position.y))
        .collect();
    let copy: Vec<String> = mirrored
        .iter()
        .map(|g| format!("{:.4} {:.4}", g.position.x, g.position.y))
        .collect();
    let diff = reflected.iter().zip(&copy).filter(|(a, b)| a != b).count();
    ensure(diff == 0, || format!("{diff} reflected positions differ"))?;

    let palette = RybPalette::default();
    let (red, blue) = (palette.get(WheelColor::Red), palette.get(WheelColor::Blue));
    ensure(original.iter().all(|g| g.color == red), || "original is not red".into())?;
    ensure(rotated.iter().all(|g| g.color == blue), || "α copy is not blue".into())?;
    ensure(mirrored.iter().all(|g| g.color == blue), || "β copy is not blue".into())?;
    let p: ColorPermutation = "r->b, y->r, b->y".parse().unwrap();
    ensure(p.apply(WheelColor::Red) == Ok(WheelColor::Blue), || "p_α(red) != blue".into())
}

// ---------------------------------------------------------------------------

fn criterion_9() -> Outcome {
    // 180(3 − √5) to 17 significant digits.
    let g = golden_angle();
    ensure((g - 137.507_764_050_037_85).abs() <= 1e-9, || format!("golden angle {g}"))?;
    let unit = 2.5;
    let layout = FibLayout {
        count: 7,
        unit,
        anchor: Point::new(0.0, 0.0),
        base_radius: 50.0,
    };
    let radii: Vec<f64> = fibonacci_layout(&layout).iter().map(|c| c.1).collect();
    let want: Vec<f64> = [1.0, 1.0, 2.0, 3.0, 5.0, 8.0, 13.0].iter().map(|f| f * unit).collect();
    ensure(radii == want, || format!("radii {radii:?}"))
}

// ---------------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for i in 0..1000 {
        let (w, h) = (rng.random_range(1..=48usize), rng.random_range(1..=48usize));
        let mut bytes = vec![0u8; w * h * 3];
        rng.fill(&mut bytes[..]);
        let canvas = Canvas::from_raw(w, h, bytes).map_err(|e| e.to_string())?;
        let ppm = raster::decode_ppm(&raster::encode_ppm(&canvas)).map_err(|e| e.to_string())?;
        ensure(ppm.pixels() == canvas.pixels() && ppm.width() == w, || format!("PPM case {i} differs"))?;
        let path = dir.path().join(format!("c{i}.png"));
        raster::write_png(&canvas, &path).map_err(|e| e.to_string())?;
        let png = raster::read_png(&path).map_err(|e| e.to_string())?;
        ensure(png.pixels() == canvas.pixels() && png.height() == h, || format!("PNG case {i} differs"))?;
    }
    for _ in 0..200_000 {
        let [r, g, b]: [u8; 3] = rng.random();
        let back = huemap::hsv_to_rgb(huemap::rgb_to_hsv(r, g, b));
        let err = [(r, back.r), (g, back.g), (b, back.b)]
            .iter()
            .map(|&(x, y)| (x as i16 - y as i16).abs())
            .max()
            .unwrap();
        ensure(err <= 1, || format!("({r},{g},{b}) -> {back:?}"))?;
    }
    within(start.elapsed(), Duration::from_secs(10))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 10] = [
        ("group structure of D12", criterion_1),
        ("coloring with p_α: preserving set {e, α³, α⁶, α⁹}, reflections recolor", criterion_2),
        ("p_α has order 3", criterion_3),
        ("hue maps stay in [0,1) and hit reference values", criterion_4),
        ("D2 image transform matches per-pixel oracle", criterion_5),
        ("wall density: mean, std, KS, angular χ²", criterion_6),
        ("generate is deterministic across runs and thread counts", criterion_7),
        ("mirror-exact copy reflects grains, red maps to blue", criterion_8),
        ("golden angle and Fibonacci radii", criterion_9),
        ("PPM/PNG round-trips and RGB↔HSV error", criterion_10),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let ms = start.elapsed().as_millis();
        match result {
            Ok(()) => println!("PASS {:>2} {name} ({ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({ms} ms): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
