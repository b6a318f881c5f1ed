//! Sampler diagnostics and reference samplers: batch-means ESS, forward
//! Euler oracle, exact linear-bridge marginals, KS distances, normal QQ data
//! and a MALA baseline.

mod distance;
mod ess;
mod euler;
mod mala;
mod marginal;

pub use distance::{ks_one_sample, ks_two_sample, qq_data, QqData};
pub use ess::{default_batches, ess_batch_means, EssReport};
pub use euler::{euler_eball, EulerOracleConfig, EulerOracleResult};
pub use mala::{mala, mala_baseline, MalaConfig, MalaResult};
pub use marginal::gaussian_bridge_marginal;
