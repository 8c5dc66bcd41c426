use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsefuse::pipeline::{exit_code, Command, Overrides, Pipeline, PipelineConfig};
use sparsefuse::reconstruction::Cutoff;

/// Sparse row-sampled hyperspectral reconstruction by curvelet fusion.
#[derive(Parser)]
#[command(name = "sparsefuse", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON pipeline config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Global seed; overrides the config's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated row factors for the sweep, e.g. 2,10,40.
    #[arg(long, global = true, value_delimiter = ',')]
    factors: Option<Vec<usize>>,
    /// Wavenumber of the full-resolution reference band in cm-1.
    #[arg(long, global = true)]
    reference_wavenumber: Option<f64>,
    /// Fusion cutoff scale: `auto` or a scale index.
    #[arg(long, global = true)]
    cutoff: Option<Cutoff>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Generate a labeled phantom cube.
    Phantom,
    /// Decimate the non-reference bands and report scan time.
    Acquire,
    /// Reconstruct decimated bands and write triptychs.
    Reconstruct,
    /// Score reconstructions over a range of row factors.
    Sweep,
    /// Train and evaluate the random forest on truth and reconstruction.
    Classify,
    /// Run every stage.
    Pipeline,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Phantom => Command::Phantom,
            Cmd::Acquire => Command::Acquire,
            Cmd::Reconstruct => Command::Reconstruct,
            Cmd::Sweep => Command::Sweep,
            Cmd::Classify => Command::Classify,
            Cmd::Pipeline => Command::Pipeline,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = Command::from(cli.command);
    let overrides = Overrides {
        seed: cli.seed,
        output_dir: cli.out,
        factors: cli.factors,
        reference_wavenumber: cli.reference_wavenumber,
        cutoff: cli.cutoff,
    };
    let prepared = cli
        .config
        .as_deref()
        .map(PipelineConfig::load)
        .transpose()
        .and_then(|base| overrides.apply(base))
        .and_then(|cfg| Pipeline::prepare(cfg, command));
    let pipeline = match prepared {
        Ok(p) => p,
        Err(e) => {
            eprintln!("sparsefuse {command}: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match pipeline.run(command) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            println!("outputs in {}", pipeline.output_dir().display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sparsefuse {command}: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
