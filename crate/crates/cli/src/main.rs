//! The `mptv` binary: argument parsing and exit-code mapping. All command
//! logic lives in the library crate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mptv_cli::commands::{bench, deblur, demo1d, synth};
use mptv_cli::{CliError, ConfigArgs, Method, RunConfig};

#[derive(Parser)]
#[command(
    name = "mptv",
    version,
    about = "Non-blind image deconvolution via incremental gradient-support activation",
    after_help = "Set MPTV_THREADS to cap the benchmark worker pool."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Restore an image given its blur kernel
    Deblur(DeblurArgs),
    /// Generate a degraded observation bundle (observation, truth, kernel, seed)
    Synth(SynthArgs),
    /// Run a benchmark suite and write a CSV report
    Bench(BenchArgs),
    /// Three-way 1D comparison: tv-admm vs mptv vs support oracle
    Demo1d(Demo1dArgs),
}

#[derive(Args)]
struct DeblurArgs {
    /// Blurred input image (PNG or PGM; color is processed per-channel)
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Kernel: text matrix file, grayscale image, or spec like gaussian:25:1.6
    #[arg(long, value_name = "KERNEL")]
    kernel: Option<String>,
    /// Restored output image
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
    /// Optional per-iteration diagnostics CSV
    #[arg(long, value_name = "FILE")]
    diagnostics: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Clean input image to degrade (alternative to --phantom)
    #[arg(long, value_name = "FILE", conflicts_with = "phantom")]
    input: Option<PathBuf>,
    /// Phantom family to generate (available: sparse)
    #[arg(long, value_name = "FAMILY")]
    phantom: Option<String>,
    /// Phantom size as HxW or N (square)
    #[arg(long, value_name = "SIZE", default_value = "128")]
    size: String,
    /// Number of random rectangles in the sparse phantom
    #[arg(long, default_value_t = 8)]
    shapes: usize,
    /// Kernel: spec string (gaussian:25:1.6, disk:15, motion:15:45) or file
    #[arg(long, value_name = "KERNEL")]
    kernel: Option<String>,
    /// Additive Gaussian noise level (intensity units; 0.003 = 0.3%)
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Output directory for the bundle
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Phantom family (available: sparse)
    #[arg(long, default_value = "sparse")]
    suite: String,
    /// Number of random instances
    #[arg(long, default_value_t = 1)]
    instances: usize,
    /// Instance size as HxW or N (square)
    #[arg(long, value_name = "SIZE", default_value = "128")]
    size: String,
    /// Number of random rectangles per instance
    #[arg(long, default_value_t = 8)]
    shapes: usize,
    /// Comma-separated kernel specs or files
    #[arg(
        long,
        value_name = "LIST",
        default_value = "gaussian:25:1.6,disk:15,motion:15:45",
        value_delimiter = ','
    )]
    kernels: Vec<String>,
    /// Comma-separated methods to compare
    #[arg(
        long,
        value_name = "LIST",
        default_value = "mptv,tv-admm",
        value_delimiter = ',',
        value_enum
    )]
    methods: Vec<Method>,
    /// Comma-separated lambda values (default: the configured lambda)
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Linear lambda grid COUNT:MIN:MAX (e.g. 20:1e-5:9.6e-4)
    #[arg(long, value_name = "GRID", conflicts_with = "lambdas")]
    lambda_grid: Option<String>,
    /// Comma-separated kappa values to sweep (mptv only)
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    kappas: Option<Vec<usize>>,
    /// Comma-separated outer tolerances to sweep (mptv only)
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    eps_values: Option<Vec<f64>>,
    /// Additive Gaussian noise level
    #[arg(long, default_value_t = 0.003)]
    noise: f64,
    /// Report CSV path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Args)]
struct Demo1dArgs {
    /// Signal length
    #[arg(long, default_value_t = 128)]
    length: usize,
    /// Number of interior jumps in the ground truth
    #[arg(long, default_value_t = 4)]
    jumps: usize,
    /// Size of the 1D Gaussian blur (odd)
    #[arg(long, default_value_t = 13)]
    kernel_size: usize,
    /// Sigma of the 1D Gaussian blur
    #[arg(long, default_value_t = 2.0)]
    kernel_sigma: f64,
    /// Additive Gaussian noise level
    #[arg(long, default_value_t = 0.003)]
    noise: f64,
    /// Output directory for signals.csv and summary.csv
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

fn main() -> ExitCode {
    mptv_cli::init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Deblur(args) => {
            let mut cfg = RunConfig::resolve(&args.cfg)?;
            if args.input.is_some() {
                cfg.input = args.input;
            }
            if args.kernel.is_some() {
                cfg.kernel = args.kernel;
            }
            if args.output.is_some() {
                cfg.output = args.output;
            }
            if args.diagnostics.is_some() {
                cfg.diagnostics = args.diagnostics;
            }
            let outcome = deblur::run(&cfg)?;
            let iterations = outcome
                .diagnostics
                .as_ref()
                .map(|d| d.outer_iters())
                .or(outcome.baseline_iterations)
                .unwrap_or(0);
            println!(
                "restored {} ({} channel(s), {} iterations, {:.1} ms)",
                cfg.output.as_ref().expect("checked by the command").display(),
                outcome.restored.len(),
                iterations,
                outcome.elapsed_ms
            );
            Ok(())
        }
        Command::Synth(args) => {
            let cfg = RunConfig::resolve(&args.cfg)?;
            let source = match (&args.input, &args.phantom) {
                (Some(path), None) => synth::SynthSource::Input(path.clone()),
                (None, Some(family)) => {
                    synth::check_family(family)?;
                    let (height, width) = synth::parse_size(&args.size)?;
                    synth::SynthSource::Phantom {
                        height,
                        width,
                        shapes: args.shapes,
                    }
                }
                (None, None) => {
                    return Err(CliError::input(
                        "synth needs either --input or --phantom sparse",
                    ))
                }
                (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
            };
            let kernel = args
                .kernel
                .clone()
                .or_else(|| cfg.kernel.clone())
                .ok_or_else(|| CliError::input("synth requires a kernel (--kernel)"))?;
            let spec = synth::SynthSpec {
                source,
                kernel,
                noise: args.noise,
                out_dir: args.out_dir.clone(),
            };
            let outcome = synth::run(&spec, &cfg)?;
            println!(
                "bundle written to {} ({} files)",
                args.out_dir.display(),
                outcome.files().len()
            );
            Ok(())
        }
        Command::Bench(args) => {
            let cfg = RunConfig::resolve(&args.cfg)?;
            let (height, width) = synth::parse_size(&args.size)?;
            let lambdas = match (&args.lambdas, &args.lambda_grid) {
                (Some(list), _) => list.clone(),
                (None, Some(grid)) => parse_lambda_grid(grid)?,
                (None, None) => vec![cfg.lambda],
            };
            let spec = bench::BenchSpec {
                suite: args.suite.clone(),
                instances: args.instances,
                height,
                width,
                shapes: args.shapes,
                kernels: args.kernels.clone(),
                methods: args.methods.clone(),
                lambdas,
                kappas: args
                    .kappas
                    .clone()
                    .map_or_else(|| vec![cfg.kappa], |ks| ks.into_iter().map(Some).collect()),
                eps_values: args.eps_values.clone().unwrap_or_else(|| vec![cfg.eps]),
                noise: args.noise,
                out: Some(args.out.clone()),
            };
            let report = bench::run(&spec, &cfg)?;
            let failed = report.rows.iter().filter(|r| r.status != "ok").count();
            println!(
                "{} rows written to {} ({} failed)",
                report.rows.len(),
                args.out.display(),
                failed
            );
            if report.all_failed() {
                return Err(CliError::Other("every benchmark row failed".to_string()));
            }
            Ok(())
        }
        Command::Demo1d(args) => {
            let cfg = RunConfig::resolve(&args.cfg)?;
            let spec = demo1d::Demo1dSpec {
                length: args.length,
                jumps: args.jumps,
                kernel_size: args.kernel_size,
                kernel_sigma: args.kernel_sigma,
                noise: args.noise,
                out_dir: args.out_dir.clone(),
            };
            let outcome = demo1d::run(&spec, &cfg)?;
            for m in [&outcome.tv_admm, &outcome.mptv, &outcome.oracle] {
                println!(
                    "{:>8}: psnr {:6.2} dB, fit {:.4e}, {} dominant jumps",
                    m.name,
                    m.psnr,
                    m.fit,
                    m.jumps.len()
                );
            }
            println!(
                "mptv jump set {} the ground truth ({} outer iterations)",
                if outcome.jump_match { "matches" } else { "differs from" },
                outcome.diagnostics.outer_iters()
            );
            Ok(())
        }
    }
}

fn parse_lambda_grid(grid: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = grid.split(':').collect();
    let err = || CliError::input(format!("invalid lambda grid '{grid}' (expected COUNT:MIN:MAX)"));
    match parts.as_slice() {
        [count, min, max] => {
            let count: usize = count.parse().map_err(|_| err())?;
            let min: f64 = min.parse().map_err(|_| err())?;
            let max: f64 = max.parse().map_err(|_| err())?;
            bench::lambda_grid(count, min, max)
        }
        _ => Err(err()),
    }
}
