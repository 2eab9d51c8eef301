use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use varidiff_cli::restore::{self, Method, OpChoice, RestoreParams};
use varidiff_cli::surface::{self, SurfaceParams};
use varidiff_cli::synth::{self, SynthParams};
use varidiff_cli::verify::{self, VerifyOptions};
use varidiff_cli::{rerun, CliError};

/// Nonlinear diffusion solvers (variational iteration and explicit
/// stepping) with grayscale image restoration.
///
/// Exit codes: 0 success, 1 failed check or solver divergence,
/// 2 usage or I/O error.
#[derive(Parser)]
#[command(name = "varidiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver verification suite against the closed-form benchmark
    Verify(VerifyArgs),
    /// Restore a grayscale PGM image by nonlinear diffusion
    Restore(RestoreArgs),
    /// Export the order-N radial iterate surface as x,y,u CSV
    Surface(SurfaceArgs),
    /// Generate the synthetic shapes test image, optionally degraded
    Synth(SynthArgs),
    /// Re-execute a run manifest, reproducing its outputs byte for byte
    Rerun(RerunArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Emit the report as JSON
    #[arg(long)]
    json: bool,
    /// Closed-form identity tolerance (relative)
    #[arg(long, default_value_t = 1e-12)]
    tol_identity: f64,
    /// Literal-vs-simplified tolerance on the scalar surrogate
    #[arg(long, default_value_t = 1e-10)]
    tol_picard_scalar: f64,
    /// Grid-vs-oracle tolerance at the benchmark resolution
    #[arg(long, default_value_t = 5e-3)]
    tol_grid: f64,
    /// Explicit-scheme-vs-exact tolerance on the padded domain
    #[arg(long, default_value_t = 1e-3)]
    tol_fd: f64,
    /// Allowed deviation of Taylor log-log slopes from n+1
    #[arg(long, default_value_t = 0.1)]
    tol_slope: f64,
    /// Exact-solution residual tolerance
    #[arg(long, default_value_t = 1e-5)]
    tol_residual: f64,
    /// Required error-reduction factor under h and M refinement
    #[arg(long, default_value_t = 3.0)]
    min_refinement_ratio: f64,
    /// Seed for the random sample points
    #[arg(long, default_value_t = 20240801)]
    seed: u64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OpArg {
    Pm,
    Catte,
    Curvature,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Vim,
    Fd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DiffusivityArg {
    Rational,
    Exponential,
}

#[derive(Args)]
struct RestoreArgs {
    /// Input PGM image (P2 or P5, maxval 255)
    input: PathBuf,
    /// Prefix for outputs: <prefix>_t<T>.pgm, <prefix>.manifest,
    /// <prefix>_metrics.csv
    output_prefix: PathBuf,
    /// Clean reference PGM for quality metrics
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Spatial operator
    #[arg(long, value_enum, default_value_t = OpArg::Pm)]
    op: OpArg,
    /// Solver
    #[arg(long, value_enum, default_value_t = MethodArg::Vim)]
    method: MethodArg,
    /// Diffusivity form
    #[arg(long, value_enum, default_value_t = DiffusivityArg::Rational)]
    diffusivity: DiffusivityArg,
    /// Contrast parameter (unit intensity range)
    #[arg(long, default_value_t = 0.05)]
    k: f64,
    /// Gaussian pre-smoothing width in pixels (catte operator)
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Gradient-magnitude regularization
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Scale values to restore to, comma separated
    #[arg(long, default_value = "1,10,50", value_delimiter = ',')]
    t: Vec<f64>,
    /// Correction sweeps (vim method)
    #[arg(long, default_value_t = 13)]
    iterations: usize,
    /// Time-grid intervals (vim method)
    #[arg(long, default_value_t = 64)]
    time_nodes: usize,
}

#[derive(Args)]
struct SurfaceArgs {
    /// Output CSV path
    output: PathBuf,
    /// Scale value
    #[arg(long, default_value_t = 10.0)]
    t: f64,
    /// Iterate order N
    #[arg(long, default_value_t = 13)]
    iterations: usize,
    /// Evaluation grid as x0,x1,y0,y1,h
    #[arg(long, default_value = "2,4,2,4,0.02")]
    grid: String,
}

#[derive(Args)]
struct SynthArgs {
    /// Output PGM path for the clean image
    output: PathBuf,
    /// Square image size in pixels
    #[arg(long, default_value_t = 128)]
    size: usize,
    /// Gaussian noise level in unit intensity
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Noise seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Where to write the degraded image (requires --noise > 0)
    #[arg(long)]
    noisy_output: Option<PathBuf>,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest written by a previous run
    manifest: PathBuf,
    /// Redirect outputs (and the fresh manifest) into this directory
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Verify(args) => {
            let opts = VerifyOptions {
                tol_identity: args.tol_identity,
                tol_picard_scalar: args.tol_picard_scalar,
                tol_grid: args.tol_grid,
                tol_fd: args.tol_fd,
                tol_slope: args.tol_slope,
                tol_residual: args.tol_residual,
                min_refinement_ratio: args.min_refinement_ratio,
                seed: args.seed,
            };
            let report = verify::run(&opts);
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                );
            } else {
                print!("{}", report.render_text());
            }
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Restore(args) => {
            if args.t.is_empty() {
                return Err(CliError::Usage("at least one scale value required".into()));
            }
            if args.t.iter().any(|t| *t < 0.0 || !t.is_finite()) {
                return Err(CliError::Usage(
                    "scale values must be finite and non-negative".into(),
                ));
            }
            let params = RestoreParams {
                input: args.input,
                output_prefix: args.output_prefix,
                reference: args.reference,
                op: match args.op {
                    OpArg::Pm => OpChoice::Pm,
                    OpArg::Catte => OpChoice::Catte,
                    OpArg::Curvature => OpChoice::Curvature,
                },
                method: match args.method {
                    MethodArg::Vim => Method::Vim,
                    MethodArg::Fd => Method::Fd,
                },
                diffusivity: match args.diffusivity {
                    DiffusivityArg::Rational => varidiff::DiffusivityKind::Rational,
                    DiffusivityArg::Exponential => varidiff::DiffusivityKind::Exponential,
                },
                contrast: args.k,
                sigma: args.sigma,
                epsilon: args.eps,
                times: args.t,
                iterations: args.iterations,
                time_nodes: args.time_nodes,
            };
            let outcome = restore::run(&params)?;
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", outcome.metrics_path.display());
            println!("wrote {}", outcome.manifest_path.display());
            Ok(if outcome.diverged.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "divergence at t = {:?}; see manifest for residual histories",
                    outcome.diverged
                );
                ExitCode::from(1)
            })
        }
        Command::Surface(args) => {
            let grid = surface::parse_grid_spec(&args.grid).map_err(CliError::Usage)?;
            let params = SurfaceParams {
                t: args.t,
                iterations: args.iterations,
                grid,
                output: args.output,
            };
            let manifest = surface::run(&params)?;
            println!("wrote {}", params.output.display());
            println!("wrote {}", manifest.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(args) => {
            if args.noisy_output.is_some() && args.noise <= 0.0 {
                return Err(CliError::Usage(
                    "--noisy-output requires --noise > 0".into(),
                ));
            }
            let params = SynthParams {
                size: args.size,
                noise: args.noise,
                seed: args.seed,
                output: args.output,
                noisy_output: args.noisy_output,
            };
            synth::run(&params)?;
            println!("wrote {}", params.output.display());
            if let Some(p) = &params.noisy_output {
                println!("wrote {}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rerun(args) => {
            if let Some(dir) = &args.output_dir {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            }
            rerun(&args.manifest, args.output_dir.as_deref())?;
            println!("reproduced {}", args.manifest.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
