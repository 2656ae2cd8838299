use std::path::PathBuf;

use thiserror::Error;

use crate::pipeline::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported grid resolution {0} (supported range is 6..=10)")]
    UnsupportedResolution(u8),

    #[error("cell at resolution {0} has no parent: coarsest supported level")]
    CoarsestResolution(u8),

    #[error("cell at resolution {0} has no children: finest supported level")]
    FinestResolution(u8),

    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    #[error("zone {zone_id}: no road nodes fall inside the zone polygon")]
    EmptyClip { zone_id: String },

    #[error("feature matrix has {got} columns, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged: loss not finite at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("empty score set")]
    EmptyScores,

    #[error("unknown POI class {0:?}")]
    UnknownPoiClass(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outage rate {rate} leaves no effective capacity (must be < 1)")]
    OutageInfeasible { rate: f64 },

    #[error(
        "no feasible port count: {required} ports needed to satisfy the utilisation cap, \
         at most {limit} allowed"
    )]
    PortsInfeasible { required: u32, limit: u32 },

    #[error(
        "coverage target {alpha} unreachable: candidate union covers only {achievable:.6} \
         of total demand"
    )]
    CoverageInfeasible { alpha: f64, achievable: f64 },

    #[error("no hubs supplied")]
    NoHubs,

    #[error("no cells supplied")]
    NoCells,

    #[error("total population is zero")]
    ZeroPopulation,

    #[error("hourly profile incomplete: missing hours {0:?}")]
    MissingHours(Vec<usize>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("input validation failed\n{0}")]
    Validation(ValidationReport),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn stage(stage: &'static str, source: Error) -> Self {
        Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Process exit code: 2 validation, 3 infeasible optimization, 4 I/O, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Config { .. }
            | Error::InvalidParameter(_)
            | Error::UnknownPoiClass(_)
            | Error::MissingHours(_)
            | Error::Csv { .. }
            | Error::Format { .. } => 2,
            Error::PortsInfeasible { .. }
            | Error::CoverageInfeasible { .. }
            | Error::OutageInfeasible { .. } => 3,
            Error::Io { .. } => 4,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}
