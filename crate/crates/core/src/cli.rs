//! Command-line driver.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::colorwheel::{self, ColorError, Induced, SlotColoring};
use crate::huemap::{self, HueError, HueMap, Section, SectionAssignment};
use crate::raster::{self, RasterError};
use crate::scene::{self, RenderOptions, SceneError};
use crate::stigmergy;
use crate::symgroup::DihedralGroup;

/// Exit status for bad input or usage.
pub const EXIT_INVALID: i32 = 1;
/// Exit status for file-system failures.
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "chromaglyph", version, about = "Color-symmetric stigmergic images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a scene to PNG or PPM.
    Generate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recolor the four quadrants of an image with hue maps.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "ref")]
        reference: Section,
        #[arg(long, default_value = "identity")]
        map_rot: String,
        #[arg(long, default_value = "identity")]
        map_refl_v: String,
        #[arg(long, default_value = "identity")]
        map_refl_h: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect the symmetry of a slot coloring.
    Wheel {
        #[arg(long)]
        coloring: PathBuf,
        /// List the permutation every element induces.
        #[arg(long)]
        report: bool,
    },
    /// Write every grain of a scene as `nest x y r g b` lines.
    DumpGrains {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Hue(#[from] HueError),
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        let io = match self {
            CliError::Io { .. } => true,
            CliError::Scene(e) => e.is_io(),
            CliError::Raster(e) => matches!(e, RasterError::Io(_)),
            CliError::Hue(e) => matches!(e, HueError::Io(_)),
            CliError::Color(_) => false,
        };
        if io {
            EXIT_IO
        } else {
            EXIT_INVALID
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { scene, seed, out } => {
            let rendered = render(&scene, seed)?;
            raster::write_image(&rendered.canvas, &out)?;
        }
        Command::DumpGrains { scene, seed, out } => {
            let rendered = render(&scene, seed)?;
            let text = stigmergy::format_grain_dump(rendered.grains.iter().map(|(id, g)| (*id, g)));
            std::fs::write(&out, text).map_err(io_err(&out))?;
        }
        Command::Transform {
            input,
            reference,
            map_rot,
            map_refl_v,
            map_refl_h,
            out,
        } => {
            let assignment = SectionAssignment {
                reference,
                rotation: HueMap::resolve(&map_rot)?,
                reflect_v: HueMap::resolve(&map_refl_v)?,
                reflect_h: HueMap::resolve(&map_refl_h)?,
            };
            let image = raster::read_image(&input)?;
            raster::write_image(&huemap::apply_d2_to_canvas(&image, &assignment), &out)?;
        }
        Command::Wheel { coloring, report } => {
            let text = std::fs::read_to_string(&coloring).map_err(io_err(&coloring))?;
            let body: String = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .collect::<Vec<_>>()
                .join(" ");
            let coloring: SlotColoring = body.parse()?;
            let text = wheel_report(&coloring, report)?;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(io_err(Path::new("<stdout>")))?;
        }
    }
    Ok(())
}

fn render(path: &Path, seed: Option<u64>) -> Result<scene::Rendered, CliError> {
    let scene = scene::load_scene(path).map_err(|e| match e {
        SceneError::Raster(RasterError::Io(source)) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other.into(),
    })?;
    let rendered = scene::render_scene_with(
        &scene,
        RenderOptions {
            seed,
            threads: scene::threads_from_env(),
        },
    )?;
    for w in &rendered.warnings {
        eprintln!("warning: {w}");
    }
    Ok(rendered)
}

/// The text printed by `wheel`. With `full`, every element's induced
/// permutation is listed before the color-preserving set.
pub fn wheel_report(coloring: &SlotColoring, full: bool) -> Result<String, ColorError> {
    let n = coloring.degree() as u32;
    let group = DihedralGroup::new(n)?;
    let mut out = String::new();
    let names: Vec<&str> = coloring.colors().iter().map(|c| c.name()).collect();
    writeln!(out, "coloring: {}", names.join(" ")).unwrap();
    writeln!(out, "group: D{n} (order {})", group.order()).unwrap();
    if full {
        for g in group.elements() {
            let induced = match colorwheel::induced_permutation(coloring, g)? {
                Induced::Permutation(p) if p.is_identity() => "identity".to_string(),
                Induced::Permutation(p) => p.to_string(),
                Induced::Inconsistent => "not a color symmetry".to_string(),
            };
            writeln!(out, "{:<8} {induced}", g.to_string()).unwrap();
        }
    }
    let preserving: Vec<String> = colorwheel::color_preserving_elements(coloring)?
        .iter()
        .map(|g| g.to_string())
        .collect();
    writeln!(out, "color-preserving: {}", preserving.join(" ")).unwrap();
    Ok(out)
}
