//! Crate-wide error type.
//!
//! Variants are grouped by how the CLI maps them to exit codes: input and
//! configuration problems (exit 2), fit degeneracy (exit 3), and I/O
//! failures (exit 4).

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem-level failure (missing file, unwritable directory, ...).
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file content (CSV structure, JSON syntax, bad numbers).
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// An individual is missing one or more grid times.
    #[error("incomplete panel: {id}")]
    IncompletePanel { id: String },

    /// The same (id, time) cell appears more than once.
    #[error("duplicate cell: id {id} at time {time}")]
    DuplicateCell { id: String, time: f64 },

    /// A score falls outside the dataset bounds.
    #[error("score {score} for id {id} at time {time} outside bounds [{lo}, {hi}]")]
    ScoreOutOfRange {
        id: String,
        time: f64,
        score: f64,
        lo: f64,
        hi: f64,
    },

    /// Grid construction failed (too short, non-increasing, non-finite).
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    /// Dataset construction failed (length mismatch, duplicate ids, ...).
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// Scenario specification violates its invariants.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Model file carries an unsupported schema version.
    #[error("unsupported model schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    /// Model file is structurally broken or violates model invariants.
    #[error("malformed model: {0}")]
    MalformedModel(String),

    /// Polynomial degree outside the supported range 0..=3.
    #[error("unsupported polynomial degree {0} (max 3)")]
    InvalidDegree(usize),

    /// Model and dataset disagree on the measurement grid.
    #[error("grid mismatch between model and dataset")]
    GridMismatch,

    /// Group count must be at least 1.
    #[error("group count must be >= 1")]
    InvalidGroupCount,

    /// Too few individuals for the requested number of groups.
    #[error("need more individuals than groups: n = {n}, k = {k}")]
    TooFewIndividuals { n: usize, k: usize },

    /// Every EM start collapsed (singular weighted design or non-finite
    /// likelihood).
    #[error("degenerate fit: all {n_starts} starts failed")]
    DegenerateFit { n_starts: usize },

    /// A group has no modally assigned members, so its APPA is undefined.
    #[error("empty group: no modal members in group {group}")]
    EmptyGroup { group: usize },

    /// Unknown individual id.
    #[error("unknown individual id: {0}")]
    UnknownId(String),

    /// Group index outside 1..=K.
    #[error("group index {index} out of range 1..={k}")]
    GroupIndexOutOfRange { index: usize, k: usize },

    /// A curve evaluated to a non-finite value during quadrature.
    #[error("non-finite curve value at t = {t}")]
    NonFiniteCurve { t: f64 },

    /// Quadrature interval or segmentation is invalid.
    #[error("invalid quadrature request: {0}")]
    InvalidQuadrature(String),

    /// Invalid CLI or scan configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Process exit code for the CLI: 2 config/content, 3 fit degeneracy,
    /// 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 4,
            Error::TooFewIndividuals { .. }
            | Error::DegenerateFit { .. }
            | Error::EmptyGroup { .. } => 3,
            _ => 2,
        }
    }
}
