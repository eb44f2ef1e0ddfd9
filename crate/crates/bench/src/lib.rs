//! Experiment harness for `sdg-core`: JSON configs, LIBSVM input, a
//! parallel suite runner, performance profiles and CSV/SVG reports.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod checks;
pub mod config;
pub mod libsvm;
pub mod profile;
pub mod report;
pub mod suite;
pub mod synth;
pub mod table1;

pub use config::{ExperimentConfig, Statistic};
pub use profile::{performance_profile, same_solution_filter, ProfileCurve, RecordRow};
pub use report::emit_reports;
pub use suite::{run_suite, SuiteRecord};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "SDG_OUT_DIR";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: libsvm::ParseError },
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.to_path_buf(), source }
    }
}
