//! `confmap`: map regions to disks and annuli, evaluate, render and verify maps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod points;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use confmap::conformal::{
    map_document, read_artifact, verify_map, write_artifact, ConformalMap, MapMethod, MapOptions,
};
use confmap::geometry::{Region, Target};
use confmap::Error;

use render::RenderSpec;

#[derive(Parser)]
#[command(
    name = "confmap",
    version,
    about = "Numerical conformal maps by rational approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct GridArgs {
    /// Target grid as CIRCLES,RAYS.
    #[arg(long, value_parser = parse_grid, default_value = "10,24")]
    grid: (usize, usize),
    /// Canvas size in pixels.
    #[arg(long, default_value_t = 600)]
    size: u32,
    #[arg(long)]
    no_poles: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a map and write its artifact.
    Map {
        region: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value = "auto", value_parser = parse_method)]
        method: MapMethod,
        /// Overrides the target named in the region file.
        #[arg(long, value_parser = parse_target)]
        target: Option<Target>,
        /// Artifact path (defaults to the region path with a `.map.json` suffix).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render `<PREFIX>-domain.svg` and `<PREFIX>-target.svg`.
        #[arg(long, value_name = "PREFIX")]
        svg: Option<PathBuf>,
        /// Maximum AAA degree.
        #[arg(long, default_value_t = confmap::aaa::DEFAULT_MMAX)]
        mmax: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Evaluate a map on a points file.
    Eval {
        artifact: PathBuf,
        direction: Direction,
        points: PathBuf,
        /// Output file (defaults to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render domain and target figures as SVG.
    Render {
        artifact: PathBuf,
        /// Output prefix (defaults to the artifact path without extension).
        #[arg(long, value_name = "PREFIX")]
        svg: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Check boundary accuracy, round trip, poles and normalization.
    Verify {
        artifact: PathBuf,
        /// Number of interior test points.
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Fwd,
    Inv,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| "expected CIRCLES,RAYS".to_string())?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((n(a)?, n(b)?))
}

fn parse_method(s: &str) -> Result<MapMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failed command and its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn unconverged(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Normalization(_)
            | Error::SingularSample(_)
            | Error::PoleEvaluation(_)
            | Error::InvalidModulus(_) => Failure::unconverged(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn render_to(
    map: &ConformalMap,
    region: &Region,
    grid: &GridArgs,
    prefix: &Path,
) -> Result<(), Failure> {
    let spec = RenderSpec {
        circles: grid.grid.0,
        rays: grid.grid.1,
        show_poles: !grid.no_poles,
        size: grid.size,
        ..Default::default()
    };
    let (dom, tgt) = render::render(map, region, &spec).map_err(Failure::input)?;
    let (dp, tp) = (
        with_suffix(prefix, "-domain.svg"),
        with_suffix(prefix, "-target.svg"),
    );
    write(&dp, &dom)?;
    write(&tp, &tgt)?;
    println!("figures      {} {}", dp.display(), tp.display());
    Ok(())
}

fn report(map: &ConformalMap, region: &Region, seconds: f64) {
    let d = &map.diagnostics;
    println!("region       {} -> {}", region.spec.kind(), map.target);
    println!("method       {}", map.method);
    println!("tol          {:e}", map.tol);
    println!("converged    {}", map.converged);
    println!("boundary     {:.3e}", map.boundary_error);
    println!(
        "degrees      forward {} inverse {}",
        map.degrees.0, map.degrees.1
    );
    if let Some(rho) = map.modulus {
        println!("modulus      {rho:.12}");
    }
    println!(
        "dirichlet    dof {} error {:.3e} converged {}",
        d.dirichlet_dof, d.dirichlet_error, d.dirichlet_converged
    );
    println!(
        "fits         forward {:.3e} inverse {:.3e}",
        d.forward_fit_error, d.inverse_fit_error
    );
    println!(
        "time         {seconds:.3} s (solve {:.3}, forward fit {:.3}, inverse fit {:.3})",
        d.timings.solve, d.timings.forward_fit, d.timings.inverse_fit
    );
    for note in &d.notes {
        println!("note         {note}");
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Map {
            region,
            tol,
            method,
            target,
            out,
            svg,
            mmax,
            grid,
        } => {
            let text = read(&region)?;
            let opts = MapOptions {
                tol,
                method,
                target,
                aaa_mmax: mmax,
            };
            let start = Instant::now();
            let (reg, map) = map_document(&text, &opts)?;
            let seconds = start.elapsed().as_secs_f64();
            let out = out.unwrap_or_else(|| region.with_extension("map.json"));
            write_artifact(&map, &out)?;
            report(&map, &reg, seconds);
            println!("artifact     {}", out.display());
            if let Some(prefix) = svg {
                render_to(&map, &reg, &grid, &prefix)?;
            }
            if map.converged {
                Ok(())
            } else {
                Err(Failure::unconverged(format!(
                    "map did not converge to tol {:e}; artifact written to {}",
                    map.tol,
                    out.display()
                )))
            }
        }
        Command::Eval {
            artifact,
            direction,
            points,
            out,
        } => {
            let map = read_artifact(&artifact)?;
            let pts = points::parse_points(&read(&points)?)
                .map_err(|e| Failure::input(format!("{}: {e}", points.display())))?;
            let start = Instant::now();
            let images = match direction {
                Direction::Fwd => map.forward_at(&pts),
                Direction::Inv => map.inverse_at(&pts),
            };
            let seconds = start.elapsed().as_secs_f64();
            let text = points::format_points(&images);
            let rate = format!(
                "evaluated    {} points in {seconds:.6} s ({:.3e} per second)",
                pts.len(),
                pts.len() as f64 / seconds.max(1e-12)
            );
            match out {
                Some(path) => {
                    write(&path, &text)?;
                    println!("{rate}");
                }
                None => {
                    print!("{text}");
                    eprintln!("{rate}");
                }
            }
            Ok(())
        }
        Command::Render {
            artifact,
            svg,
            grid,
        } => {
            let map = read_artifact(&artifact)?;
            let region = map.source_region()?;
            let prefix = svg.unwrap_or_else(|| artifact.with_extension(""));
            render_to(&map, &region, &grid, &prefix)
        }
        Command::Verify {
            artifact,
            points,
            seed,
        } => {
            let map = read_artifact(&artifact)?;
            let region = map.source_region()?;
            let rep = verify_map(&map, &region, points, seed)?;
            println!("boundary     {:.3e}", rep.boundary_error);
            println!(
                "round trip   {:.3e} over {} points",
                rep.round_trip_error, rep.test_points
            );
            println!(
                "poles        {} forward and {} inverse in the closed domains; {} inverse in the open target",
                rep.forward_pole_violations.len(),
                rep.inverse_pole_violations.len(),
                rep.inverse_poles_in_target
            );
            if let Some(v) = rep.anchor_value {
                println!("anchor       |f(a)| = {v:.3e}");
            }
            if let Some(a) = rep.anchor_derivative_arg {
                println!("anchor       arg f'(a) = {a:.3e}");
            }
            for f in &rep.flags {
                println!("flag         {f}");
            }
            println!("passed       {}", rep.passed());
            if rep.passed() {
                Ok(())
            } else {
                Err(Failure::unconverged("verification failed"))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
