//! Verification runs: configuration, the on-disk cache, the individual
//! checks, external eigenvalue oracles and the JSON report.

mod cache;
mod checks;
mod config;
mod oracle;
mod report;
mod run;

pub use cache::{Cache, CacheKind, CacheStats, CODE_VERSION};
pub use checks::{check_control_with, structure_counts, StructureCounts};
pub use config::{CheckName, Instance, VerificationConfig, DEFAULT_PRECISION};
pub use oracle::{load_oracle, parse_oracle, OracleTable};
pub use report::{CheckEntry, InstanceReport, VerificationReport, SCHEMA_VERSION};
pub use run::{build, run, BuildSummary, LevelPipeline, PacketExport};

use std::path::PathBuf;

use thiserror::Error;

use crate::exactlin::LinAlgError;
use crate::hecke::HeckeError;
use crate::iwasawa::IwasawaError;
use crate::modsym::ModSymError;
use crate::ordinary::OrdinaryError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("oracle file: {0}")]
    Oracle(String),
    #[error(transparent)]
    ModSym(#[from] ModSymError),
    #[error(transparent)]
    Hecke(#[from] HeckeError),
    #[error(transparent)]
    Ordinary(#[from] OrdinaryError),
    #[error(transparent)]
    Iwasawa(#[from] IwasawaError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
