use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use graphsurf_cli::{cmd_constants, cmd_geometry, cmd_sweep, cmd_verify, default_config, RunOptions};

#[derive(Parser)]
#[command(name = "graphsurf", version, about = "Geometry and functional-inequality constants of graph hypersurfaces")]
struct Cli {
    /// Print the default JSON configuration and exit.
    #[arg(long)]
    print_default_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; falls back to GRAPHSURF_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the geometry of one surface.
    Geometry(Common),
    /// Estimate the configured constants on one surface.
    Constants(Common),
    /// Sweep the family of nearby graphs.
    Sweep(Common),
    /// Check the geometric identities at two resolutions.
    Verify(Common),
}

fn options(c: Common) -> RunOptions {
    RunOptions {
        config: c.config,
        out_dir: c.out_dir,
        threads: c.threads,
        seed: c.seed,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.print_default_config {
        println!("{}", default_config().to_json());
        return ExitCode::SUCCESS;
    }
    let code = match cli.command {
        Some(Command::Geometry(c)) => cmd_geometry(&options(c)),
        Some(Command::Constants(c)) => cmd_constants(&options(c)),
        Some(Command::Sweep(c)) => cmd_sweep(&options(c)),
        Some(Command::Verify(c)) => cmd_verify(&options(c)),
        None => {
            eprintln!("error: a subcommand is required (geometry, constants, sweep, verify)");
            2
        }
    };
    ExitCode::from(code as u8)
}
