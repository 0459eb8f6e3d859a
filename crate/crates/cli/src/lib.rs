//! Command-line driver: argument model, verification suites and report
//! emission for `hopflab`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod grid;
pub mod output;
pub mod records;
pub mod verify;

use std::fmt;

use hopflab::GeometryError;

pub const SCHEMA_VERSION: u32 = 1;

/// Failures surfaced by the driver, each mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Geometry(GeometryError),
    Io(std::io::Error),
    Csv(csv::Error),
    Json(serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Geometry(GeometryError::InvalidEpsilon(_) | GeometryError::InvalidDimension(_)) => 2,
            CliError::Geometry(GeometryError::PreconditionViolated(_)) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Geometry(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Csv(e) => write!(f, "csv error: {e}"),
            CliError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Geometry(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Outcome of a command: whether every check passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }
}
