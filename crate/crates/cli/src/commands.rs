//! The `sample`, `paths` and `diagnose` commands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use statrs::distribution::{ContinuousCDF, Normal};
use zigzag_bridge::basis::DyadicIndex;
use zigzag_bridge::diagnostics::{gaussian_bridge_marginal, ks_one_sample, qq_data, EssReport};
use zigzag_bridge::samplers::{discretize, FullStateRows, Record, ReflectionLog, Skeleton};
use zigzag_bridge::BasisContext;

use crate::config::{ModelSpec, RunConfig, Sidecar, SkeletonFormat};
use crate::run::execute;
use crate::UsageError;

pub fn sidecar_path(skeleton: &Path) -> PathBuf {
    skeleton.with_extension("json")
}

/// Runs the sampler and writes the skeleton CSV plus its JSON sidecar.
pub fn sample(config: &RunConfig, output: &Path) -> anyhow::Result<Sidecar> {
    config.validate()?;
    let outcome = execute(config)?;
    let format = match outcome.skeleton.record {
        Record::FullState(_) => SkeletonFormat::FullState,
        Record::Reflections(_) => SkeletonFormat::Reflections,
    };
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    let mut writer = BufWriter::new(file);
    outcome.skeleton.write_csv(&mut writer)?;
    writer.flush()?;
    let sidecar = Sidecar {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        skeleton_file: output
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        format,
        initial_velocities: outcome.initial_velocities,
        stats: outcome.skeleton.stats.clone(),
        wall_time_secs: outcome.wall_time_secs,
    };
    let meta = sidecar_path(output);
    let file = File::create(&meta).with_context(|| format!("creating {}", meta.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &sidecar)?;
    Ok(sidecar)
}

/// Reads a skeleton and its sidecar back.
pub fn load(skeleton_path: &Path) -> anyhow::Result<(Sidecar, Skeleton)> {
    let meta = sidecar_path(skeleton_path);
    let file = File::open(&meta).with_context(|| format!("opening sidecar {}", meta.display()))?;
    let sidecar: Sidecar =
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("reading {}", meta.display()))?;
    let file = File::open(skeleton_path).with_context(|| format!("opening {}", skeleton_path.display()))?;
    let reader = BufReader::new(file);
    let what = || format!("reading skeleton {}", skeleton_path.display());
    let record = match sidecar.format {
        SkeletonFormat::FullState => Record::FullState(FullStateRows::read_csv(reader).with_context(what)?),
        SkeletonFormat::Reflections => Record::Reflections(
            ReflectionLog::read_csv(reader, sidecar.initial_velocities.clone()).with_context(what)?,
        ),
    };
    let skeleton = Skeleton {
        algorithm: sidecar.config.algorithm,
        final_clock: sidecar.config.final_clock,
        stats: sidecar.stats.clone(),
        record,
        dense: None,
    };
    Ok((sidecar, skeleton))
}

/// Discretized chain of coefficient vectors for a stored run.
pub fn chain(sidecar: &Sidecar, skeleton: &Skeleton) -> anyhow::Result<Vec<Vec<f64>>> {
    let c = &sidecar.config;
    Ok(discretize(skeleton, c.burnin, c.sample_step)?)
}

/// Path values on `2^grid + 1` equally spaced times, one row per kept sample.
pub fn render_paths(ctx: &BasisContext, chain: &[Vec<f64>], every: usize, grid: u32) -> anyhow::Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if every == 0 {
        bail!(UsageError("--every must be positive".into()));
    }
    if grid > 24 {
        bail!(UsageError(format!("--grid {grid} is too fine")));
    }
    let cells = 1usize << grid;
    let times: Vec<f64> = (0..=cells).map(|m| ctx.horizon() * m as f64 / cells as f64).collect();
    let mut rows = Vec::new();
    for xi in chain.iter().step_by(every) {
        let row = times.iter().map(|&t| ctx.expand(xi, t)).collect::<zigzag_bridge::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((times, rows))
}

fn write_table<W: Write>(writer: W, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn paths(skeleton_path: &Path, every: usize, grid: Option<u32>, output: &Path) -> anyhow::Result<usize> {
    let (sidecar, skeleton) = load(skeleton_path)?;
    let ctx = sidecar.config.context()?;
    let samples = chain(&sidecar, &skeleton)?;
    let (times, rows) = render_paths(&ctx, &samples, every, grid.unwrap_or(ctx.levels() + 1))?;
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    let header: Vec<String> = times.iter().map(|t| format!("t={t}")).collect();
    let n = rows.len();
    write_table(BufWriter::new(file), &header, rows.into_iter().map(|r| r.iter().map(f64::to_string).collect()))?;
    Ok(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Stat {
    Ess,
    Qq,
    Ks,
    Marginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Reference {
    /// Exact marginal of the linear-drift bridge.
    ExactLinear,
}

#[derive(Clone, Debug)]
pub struct DiagnoseRequest {
    pub stats: Vec<Stat>,
    /// One-based coefficient index `n = 2^i + j`.
    pub coefficient: usize,
    /// Time for marginal-based statistics; defaults to `T/2`.
    pub time: Option<f64>,
    pub against: Reference,
    pub out_dir: PathBuf,
}

/// Path value at time `t` for every sample.
pub fn marginal(ctx: &BasisContext, chain: &[Vec<f64>], t: f64) -> anyhow::Result<Vec<f64>> {
    Ok(chain.iter().map(|xi| ctx.expand(xi, t)).collect::<zigzag_bridge::Result<_>>()?)
}

/// Writes one report file per requested statistic and returns their paths
/// together with the KS value when requested.
pub fn diagnose(skeleton_path: &Path, req: &DiagnoseRequest) -> anyhow::Result<(Vec<PathBuf>, Option<f64>)> {
    let (sidecar, skeleton) = load(skeleton_path)?;
    let config = &sidecar.config;
    let ctx = config.context()?;
    let samples = chain(&sidecar, &skeleton)?;
    let t = req.time.unwrap_or(0.5 * ctx.horizon());
    let stem = skeleton_path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    std::fs::create_dir_all(&req.out_dir)?;
    let mut written = Vec::new();
    let mut ks_value = None;
    for stat in &req.stats {
        match stat {
            Stat::Ess => {
                let report = EssReport::from_chain(&samples, sidecar.wall_time_secs)?;
                let path = req.out_dir.join(format!("{stem}_ess.csv"));
                let rows = report.per_coordinate.iter().enumerate().map(|(slot, &ess)| {
                    let idx = DyadicIndex::from_slot(slot);
                    vec![
                        idx.single().to_string(),
                        idx.level().to_string(),
                        idx.position().to_string(),
                        ess.to_string(),
                        (ess / sidecar.wall_time_secs).to_string(),
                        report.clamped[slot].to_string(),
                    ]
                });
                let header = ["n", "level", "position", "ess", "ess_per_sec", "clamped"].map(String::from);
                write_table(BufWriter::new(File::create(&path)?), &header, rows)?;
                written.push(path);
            }
            Stat::Qq => {
                let slot = DyadicIndex::from_single(req.coefficient)
                    .ok()
                    .map(|i| i.slot())
                    .filter(|&s| s < ctx.dim())
                    .ok_or_else(|| UsageError(format!("--coefficient {} is out of range 1..={}", req.coefficient, ctx.dim())))?;
                let column: Vec<f64> = samples.iter().map(|x| x[slot]).collect();
                let qq = qq_data(&column)?;
                let path = req.out_dir.join(format!("{stem}_qq_{}.csv", req.coefficient));
                let header = ["normal_quantile", "sample_quantile"].map(String::from);
                let rows = qq.pairs.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]);
                write_table(BufWriter::new(File::create(&path)?), &header, rows)?;
                written.push(path);
            }
            Stat::Ks => {
                let Reference::ExactLinear = req.against;
                let ModelSpec::Linear { alpha, beta } = config.model else {
                    bail!(UsageError("--against exact-linear needs a linear-model run".into()));
                };
                let (mean, var) = gaussian_bridge_marginal(alpha, beta, config.u, config.v, config.horizon, t)
                    .map_err(|e| UsageError(e.to_string()))?;
                let values = marginal(&ctx, &samples, t)?;
                let reference = Normal::new(mean, var.sqrt())?;
                let d = ks_one_sample(&values, |x| reference.cdf(x))?;
                let path = req.out_dir.join(format!("{stem}_ks.csv"));
                let header = ["t", "reference", "samples", "ks"].map(String::from);
                let row = vec![t.to_string(), "exact-linear".into(), values.len().to_string(), d.to_string()];
                write_table(BufWriter::new(File::create(&path)?), &header, [row])?;
                written.push(path);
                ks_value = Some(d);
            }
            Stat::Marginal => {
                let values = marginal(&ctx, &samples, t)?;
                let path = req.out_dir.join(format!("{stem}_marginal.csv"));
                let header = [format!("x(t={t})")];
                write_table(BufWriter::new(File::create(&path)?), &header, values.iter().map(|v| vec![v.to_string()]))?;
                written.push(path);
            }
        }
    }
    Ok((written, ks_value))
}
