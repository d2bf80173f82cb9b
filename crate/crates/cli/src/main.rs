//! `filament`: command-line front end for filament-core.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid parameters or I/O
//! failure, 3 numerical non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use commands::{flow, frames, nls, profile, spectral};
use config::{ConfigFile, Format, Globals};
use output::Output;

#[derive(Parser, Debug)]
#[command(
    name = "filament",
    version,
    about = "Self-similar vortex filaments, Talbot polygons and NLS scattering"
)]
struct Cli {
    /// Output directory for artifacts and the manifest
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for independent sweep points
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Profile G on [-S, S] with corner vectors and invariant drifts
    Profile(profile::ProfileArgs),
    /// Corner vectors over a grid of a and S, against the closed forms
    Corners(profile::CornersArgs),
    /// Linear momentum of the truncated self-similar filament
    Momentum(profile::MomentumArgs),
    /// Frame transport along the self-similar curvature-torsion field
    Frames(frames::FramesArgs),
    /// Trace system at the singular time
    Trace(frames::TraceArgs),
    /// Decay sweep of the oscillatory integral
    Oscint(spectral::OscintArgs),
    /// Fourier transform of T_x or N_x at one time
    Spectrum(spectral::SpectrumArgs),
    /// Sup-norm gap between positive and zero times
    Theorem11(spectral::Theorem11Args),
    /// Binormal flow of a closed polygon
    Bflow(flow::BflowArgs),
    /// Polygon at rational Talbot times
    Talbot(flow::TalbotArgs),
    /// Perturbed NLS evolution and final state
    Nls(nls::NlsArgs),
    /// X^gamma norm of a sampled datum
    Xnorm(nls::XnormArgs),
}

type Runner<P> = fn(&P, &mut Output, &Globals) -> Result<()>;

fn execute<A, P>(
    name: &str,
    args: &A,
    file: ConfigFile,
    globals: &Globals,
    run: Runner<P>,
) -> Result<()>
where
    A: Serialize,
    P: DeserializeOwned + Serialize,
{
    let params: P = config::resolve(file.params, args)?;
    let mut out = Output::new(globals)?;
    run(&params, &mut out, globals)?;
    out.finish(name, globals, &params)
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let threads = cli.threads.or(file.threads).unwrap_or(1);
    if !(1..=256).contains(&threads) {
        anyhow::bail!("threads must lie in 1..=256");
    }
    let globals = Globals {
        out: cli
            .out
            .clone()
            .or(file.out.clone())
            .unwrap_or_else(|| PathBuf::from("filament-out")),
        format: cli.format.or(file.format).unwrap_or(Format::Csv),
        threads,
    };
    let g = &globals;
    match &cli.command {
        Command::Profile(a) => execute("profile", a, file, g, profile::profile),
        Command::Corners(a) => execute("corners", a, file, g, profile::corners),
        Command::Momentum(a) => execute("momentum", a, file, g, profile::momentum),
        Command::Frames(a) => execute("frames", a, file, g, frames::frames),
        Command::Trace(a) => execute("trace", a, file, g, frames::trace),
        Command::Oscint(a) => execute("oscint", a, file, g, spectral::oscint),
        Command::Spectrum(a) => execute("spectrum", a, file, g, spectral::spectrum),
        Command::Theorem11(a) => execute("theorem11", a, file, g, spectral::theorem11),
        Command::Bflow(a) => execute("bflow", a, file, g, flow::bflow),
        Command::Talbot(a) => execute("talbot", a, file, g, flow::talbot),
        Command::Nls(a) => execute("nls", a, file, g, nls::nls),
        Command::Xnorm(a) => execute("xnorm", a, file, g, nls::xnorm),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        e.downcast_ref::<filament_core::Error>()
            .is_some_and(|e| e.is_numerical())
    });
    if numerical {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
