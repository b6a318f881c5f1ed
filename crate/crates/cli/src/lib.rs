//! Library side of the `zzbridge` command-line driver: run configuration,
//! skeleton persistence, path rendering, diagnostics reports and the
//! sampler comparison harness.

pub mod commands;
pub mod compare;
pub mod config;
pub mod run;

/// A configuration error detected before any sampling; reported with exit
/// code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
