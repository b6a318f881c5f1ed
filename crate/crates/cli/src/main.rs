//! `zzbridge`: sample diffusion bridges with Zig-Zag, render paths, compute
//! diagnostics and run the sampler comparison.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zigzag_bridge::models::EstimatorVariant;
use zigzag_bridge::samplers::Algorithm;
use zigzag_bridge::Error as CoreError;
use zigzag_bridge_cli::commands::{self, DiagnoseRequest, Reference, Stat};
use zigzag_bridge_cli::compare::{self, CompareConfig};
use zigzag_bridge_cli::config::{self, ModelSpec, RunConfig, VelocitySpec};
use zigzag_bridge_cli::UsageError;

#[derive(Parser)]
#[command(name = "zzbridge", version, about = "Zig-Zag samplers for one-dimensional diffusion bridges")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sampler and write its skeleton CSV with a JSON sidecar.
    Sample(SampleArgs),
    /// Expand discretized samples into path values on a dyadic grid.
    Paths(PathsArgs),
    /// Write ESS, QQ, KS or marginal reports for a stored run.
    Diagnose(DiagnoseArgs),
    /// Compare fully local Zig-Zag variants with MALA on sine bridges.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelName {
    Linear,
    Sine,
    Logistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Standard,
    Subsampled,
    Local,
    FullyLocal,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Standard => Algorithm::Standard,
            AlgorithmArg::Subsampled => Algorithm::Subsampled,
            AlgorithmArg::Local => Algorithm::Local,
            AlgorithmArg::FullyLocal => Algorithm::FullyLocal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Single,
    V1,
    V2,
}

impl From<EstimatorArg> for EstimatorVariant {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Single => EstimatorVariant::Single,
            EstimatorArg::V1 => EstimatorVariant::V1,
            EstimatorArg::V2 => EstimatorVariant::V2,
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: ModelName,
    /// Linear intercept, or sine amplitude.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Linear slope, or logistic noise level.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Logistic growth rate.
    #[arg(long)]
    r: Option<f64>,
    /// Logistic carrying capacity.
    #[arg(long = "K")]
    capacity: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: f64,
    #[arg(long, allow_hyphen_values = true)]
    v: f64,
    #[arg(long = "T")]
    horizon: f64,
    /// Truncation level N; the basis has 2^(N+1) - 1 functions.
    #[arg(long, default_value_t = 6)]
    levels: u32,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "single")]
    estimator: EstimatorArg,
    /// Replication scale for the v1 and v2 estimators.
    #[arg(long)]
    estimator_scale: Option<f64>,
    /// Maximum number of points for the v1 and v2 estimators.
    #[arg(long)]
    estimator_cap: Option<usize>,
    /// Final clock τ_final.
    #[arg(long)]
    clock: f64,
    #[arg(long, default_value_t = 0.0)]
    burnin: f64,
    /// Clock spacing Δτ of retained samples.
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Velocity magnitude ρ^i at level i; unit velocities when omitted.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skeleton CSV path; the sidecar goes next to it with a .json extension.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, env = "ZZBRIDGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PathsArgs {
    skeleton: PathBuf,
    /// Keep every n-th discretized sample.
    #[arg(long, default_value_t = 1)]
    every: usize,
    /// Dyadic grid level g: 2^g + 1 time points. Defaults to N + 1.
    #[arg(long)]
    grid: Option<u32>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, env = "ZZBRIDGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    skeleton: PathBuf,
    #[arg(long = "stat", value_enum, required = true)]
    stats: Vec<Stat>,
    /// Coefficient index n = 2^i + j for QQ data.
    #[arg(long, default_value_t = 1)]
    coefficient: usize,
    /// Bridge time for KS and marginal reports; defaults to T/2.
    #[arg(long = "t")]
    time: Option<f64>,
    #[arg(long, value_enum, default_value = "exact-linear")]
    against: Reference,
    #[arg(long, env = "ZZBRIDGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Sine amplitudes to compare; may be empty.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    alpha: Vec<f64>,
    #[arg(long = "T", default_value_t = 50.0)]
    horizon: f64,
    #[arg(long, default_value_t = 6)]
    levels: u32,
    #[arg(long, default_value_t = 2500.0)]
    clock: f64,
    #[arg(long, default_value_t = 100.0)]
    burnin: f64,
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    #[arg(long, default_value_t = 25_000)]
    mala_iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cells run at once; timings are only comparable with 1.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, env = "ZZBRIDGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

fn require(name: &str, value: Option<f64>) -> Result<f64, UsageError> {
    value.ok_or_else(|| UsageError(format!("--{name} is required for this model")))
}

fn run_config(a: &SampleArgs) -> Result<RunConfig, UsageError> {
    let model = match a.model {
        ModelName::Linear => ModelSpec::Linear {
            alpha: require("alpha", a.alpha)?,
            beta: require("beta", a.beta)?,
        },
        ModelName::Sine => ModelSpec::Sine {
            alpha: require("alpha", a.alpha)?,
        },
        ModelName::Logistic => ModelSpec::Logistic {
            r: require("r", a.r)?,
            capacity: require("K", a.capacity)?,
            beta: require("beta", a.beta)?,
        },
    };
    let config = RunConfig {
        model,
        levels: a.levels,
        horizon: a.horizon,
        u: a.u,
        v: a.v,
        algorithm: a.algorithm.into(),
        estimator: config::estimator(a.estimator.into(), a.estimator_scale, a.estimator_cap),
        final_clock: a.clock,
        burnin: a.burnin,
        sample_step: a.step,
        velocities: a.rho.map_or(VelocitySpec::Uniform, |rho| VelocitySpec::Level { rho }),
        seed: a.seed,
    };
    config.validate()?;
    Ok(config)
}

fn in_dir(dir: &std::path::Path, explicit: &Option<PathBuf>, default: &str) -> anyhow::Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    std::fs::create_dir_all(dir)?;
    Ok(dir.join(default))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sample(a) => {
            let config = run_config(&a)?;
            let output = in_dir(&a.out_dir, &a.output, &format!("{}_{}.csv", config.model.name(), config.algorithm))?;
            let sidecar = commands::sample(&config, &output)?;
            println!(
                "wrote {} ({} proposals, {} flips, {:.3} s)",
                output.display(),
                sidecar.stats.proposals,
                sidecar.stats.flips,
                sidecar.wall_time_secs
            );
        }
        Command::Paths(a) => {
            let stem = a.skeleton.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
            let output = in_dir(&a.out_dir, &a.output, &format!("{stem}_paths.csv"))?;
            let rows = commands::paths(&a.skeleton, a.every, a.grid, &output)?;
            println!("wrote {rows} paths to {}", output.display());
        }
        Command::Diagnose(a) => {
            let req = DiagnoseRequest {
                stats: a.stats,
                coefficient: a.coefficient,
                time: a.time,
                against: a.against,
                out_dir: a.out_dir,
            };
            let (written, ks) = commands::diagnose(&a.skeleton, &req)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            if let Some(d) = ks {
                println!("ks {d}");
            }
        }
        Command::Compare(a) => {
            let cfg = CompareConfig {
                alphas: a.alpha,
                horizon: a.horizon,
                levels: a.levels,
                final_clock: a.clock,
                burnin: a.burnin,
                sample_step: a.step,
                mala_iterations: a.mala_iterations,
                seed: a.seed,
                jobs: a.jobs,
            };
            let output = in_dir(&a.out_dir, &a.output, "compare.csv")?;
            let cells = compare::compare(&cfg)?;
            let rows: Vec<_> = cells.into_iter().map(|c| c.row).collect();
            compare::write_table(&rows, std::io::BufWriter::new(std::fs::File::create(&output)?))?;
            println!("wrote {} rows to {}", rows.len(), output.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                if let Some(CoreError::BoundViolation { .. }) = e.downcast_ref::<CoreError>() {
                    eprintln!("the subsampling bound was violated; the run is invalid");
                }
                ExitCode::from(1)
            }
        }
    }
}
