//! Fully local Zig-Zag with each estimator variant against MALA on sine
//! bridges with `u = v = 0`, reported as ESS per second.

use std::io::Write;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use zigzag_bridge::diagnostics::{mala_baseline, EssReport, MalaConfig};
use zigzag_bridge::models::{EstimatorConfig, EstimatorVariant, SineDrift};
use zigzag_bridge::samplers::{discretize, Algorithm};
use zigzag_bridge::BasisContext;

use crate::config::{ModelSpec, RunConfig, VelocitySpec};
use crate::run::execute;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub alphas: Vec<f64>,
    pub horizon: f64,
    pub levels: u32,
    pub final_clock: f64,
    pub burnin: f64,
    pub sample_step: f64,
    pub mala_iterations: usize,
    pub seed: u64,
    /// Number of cells run at once. Timings are only comparable with 1.
    pub jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ZzSingle,
    ZzV1,
    ZzV2,
    Mala,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ZzSingle, Method::ZzV1, Method::ZzV2, Method::Mala];

    pub fn name(self) -> &'static str {
        match self {
            Method::ZzSingle => "zz-single",
            Method::ZzV1 => "zz-v1",
            Method::ZzV2 => "zz-v2",
            Method::Mala => "mala",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub alpha: f64,
    pub method: Method,
    /// `ok` or `failed: <reason>`.
    pub status: String,
    pub samples: usize,
    pub wall_secs: f64,
    /// ESS of the level-0 coefficient.
    pub ess_root: f64,
    pub ess_median: f64,
    pub ess_min: f64,
}

impl CompareRow {
    fn failed(alpha: f64, method: Method, reason: String) -> Self {
        Self {
            alpha,
            method,
            status: format!("failed: {reason}"),
            samples: 0,
            wall_secs: f64::NAN,
            ess_root: f64::NAN,
            ess_median: f64::NAN,
            ess_min: f64::NAN,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareCell {
    pub row: CompareRow,
    /// Path values at `T/2`, one per retained sample.
    pub midpoint: Vec<f64>,
}

/// Seed of grid cell `index`, a function of the master seed and the index only.
pub fn cell_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64 + 1);
    rng.next_u64()
}

fn run_cell(cfg: &CompareConfig, alpha: f64, method: Method, seed: u64) -> anyhow::Result<CompareCell> {
    let ctx = BasisContext::new(cfg.levels, cfg.horizon, 0.0, 0.0)?;
    let (chain, wall) = match method {
        Method::Mala => {
            let drift = SineDrift::new(alpha)?;
            let start = Instant::now();
            let res = mala_baseline(&ctx, &drift, &vec![0.0; ctx.dim()], &MalaConfig::new(cfg.mala_iterations, seed))?;
            (res.chain, start.elapsed().as_secs_f64())
        }
        zz => {
            let variant = match zz {
                Method::ZzSingle => EstimatorVariant::Single,
                Method::ZzV1 => EstimatorVariant::V1,
                _ => EstimatorVariant::V2,
            };
            let config = RunConfig {
                model: ModelSpec::Sine { alpha },
                levels: cfg.levels,
                horizon: cfg.horizon,
                u: 0.0,
                v: 0.0,
                algorithm: Algorithm::FullyLocal,
                estimator: EstimatorConfig::new(variant),
                final_clock: cfg.final_clock,
                burnin: cfg.burnin,
                sample_step: cfg.sample_step,
                velocities: VelocitySpec::Uniform,
                seed,
            };
            config.validate()?;
            let outcome = execute(&config)?;
            let chain = discretize(&outcome.skeleton, cfg.burnin, cfg.sample_step)?;
            (chain, outcome.wall_time_secs)
        }
    };
    let report = EssReport::from_chain(&chain, wall)?;
    let midpoint = chain
        .iter()
        .map(|xi| ctx.expand(xi, 0.5 * cfg.horizon))
        .collect::<zigzag_bridge::Result<Vec<f64>>>()?;
    Ok(CompareCell {
        row: CompareRow {
            alpha,
            method,
            status: "ok".into(),
            samples: chain.len(),
            wall_secs: wall,
            ess_root: report.per_coordinate[0],
            ess_median: report.median,
            ess_min: report.min,
        },
        midpoint,
    })
}

/// Runs every `(α, method)` cell. A failing cell yields a `failed` row and
/// the remaining cells still run.
pub fn compare(cfg: &CompareConfig) -> anyhow::Result<Vec<CompareCell>> {
    let cells: Vec<(f64, Method)> = cfg
        .alphas
        .iter()
        .flat_map(|&a| Method::ALL.map(|m| (a, m)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs.max(1)).build()?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, &(alpha, method))| {
                run_cell(cfg, alpha, method, cell_seed(cfg.seed, i)).unwrap_or_else(|e| CompareCell {
                    row: CompareRow::failed(alpha, method, format!("{e:#}")),
                    midpoint: Vec::new(),
                })
            })
            .collect()
    }))
}

pub fn write_table<W: Write>(rows: &[CompareRow], writer: W) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record([
        "alpha",
        "method",
        "status",
        "samples",
        "wall_secs",
        "ess_root",
        "ess_median",
        "ess_min",
        "ess_root_per_sec",
        "ess_median_per_sec",
        "ess_min_per_sec",
    ])?;
    for r in rows {
        let per_sec = |x: f64| (x / r.wall_secs).to_string();
        w.write_record([
            r.alpha.to_string(),
            r.method.name().to_string(),
            r.status.clone(),
            r.samples.to_string(),
            r.wall_secs.to_string(),
            r.ess_root.to_string(),
            r.ess_median.to_string(),
            r.ess_min.to_string(),
            per_sec(r.ess_root),
            per_sec(r.ess_median),
            per_sec(r.ess_min),
        ])?;
    }
    w.flush()?;
    Ok(())
}
