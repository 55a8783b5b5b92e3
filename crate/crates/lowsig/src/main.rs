//! `lowsig` command line: simulate, correct, recon, metrics, repro.
//!
//! Exit codes: 0 success, 2 usage/config error, 3 data error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lowsig::commands::{self, Method};
use lowsig::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "lowsig",
    version,
    about = "Low signal correction pipeline for CT photon-count sinograms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the noise seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Project a phantom and write ideal projections, ideal counts and
    /// noisy counts.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Phantom description file (JSON).
        #[arg(long)]
        phantom: PathBuf,
    },
    /// Apply a low signal correction to a counts grid.
    Correct {
        #[command(flatten)]
        common: CommonArgs,
        /// Input counts grid.
        #[arg(long)]
        input: PathBuf,
        /// Correction method.
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Reconstruct rows of a counts or projection grid with FBP.
    Recon {
        #[command(flatten)]
        common: CommonArgs,
        /// Input grid (counts or projections).
        #[arg(long)]
        input: PathBuf,
        /// Row selection `a..b` (half-open) or a single row index;
        /// defaults to every row.
        #[arg(long)]
        rows: Option<String>,
        /// Label used in output file names.
        #[arg(long, default_value = "recon")]
        tag: String,
    },
    /// Measure ROI statistics, radial NPS and/or wire MTF on images.
    Metrics {
        #[command(flatten)]
        common: CommonArgs,
        /// Image files to measure.
        #[arg(long, required = true, num_args = 1..)]
        images: Vec<PathBuf>,
    },
    /// Run the full desk-scale comparison study and write a summary.
    Repro {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_config(common: &CommonArgs) -> lowsig::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.noise.seed = seed;
    }
    Ok(cfg)
}

fn parse_rows(spec: &str) -> lowsig::Result<std::ops::Range<usize>> {
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| lowsig::Error::config(format!("invalid row index '{s}' in --rows")))
    };
    if let Some((a, b)) = spec.split_once("..") {
        let start = parse(a)?;
        let end = parse(b)?;
        if end <= start {
            return Err(lowsig::Error::config(format!(
                "empty row range '{spec}' in --rows"
            )));
        }
        Ok(start..end)
    } else {
        let row = parse(spec)?;
        Ok(row..row + 1)
    }
}

fn run() -> lowsig::Result<()> {
    commands::init_threads_from_env();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { common, phantom } => {
            let cfg = load_config(&common)?;
            let out = commands::cmd_simulate(&phantom, &cfg, &common.out)?;
            println!("wrote {}", out.proj_ideal.display());
            println!("wrote {}", out.counts_ideal.display());
            println!("wrote {}", out.counts_noisy.display());
        }
        Command::Correct {
            common,
            input,
            method,
        } => {
            let cfg = load_config(&common)?;
            let out = commands::cmd_correct(&input, method, &cfg, &common.out)?;
            println!("wrote {}", out.display());
        }
        Command::Recon {
            common,
            input,
            rows,
            tag,
        } => {
            let cfg = load_config(&common)?;
            let rows = rows.as_deref().map(parse_rows).transpose()?;
            let outs = commands::cmd_recon(&input, &cfg, &common.out, rows, &tag)?;
            for p in outs {
                println!("wrote {}", p.display());
            }
        }
        Command::Metrics { common, images } => {
            let cfg = load_config(&common)?;
            let reports = commands::cmd_metrics(&images, &cfg.metrics, &common.out)?;
            for r in reports {
                println!("{}", serde_json::to_string(&r).expect("report serializes"));
            }
        }
        Command::Repro { common } => {
            let cfg = load_config(&common)?;
            let summary = commands::cmd_repro(&cfg, &common.out)?;
            let table = std::fs::read_to_string(common.out.join("summary.txt"))
                .unwrap_or_else(|_| format!("{summary:?}"));
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
