//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, validation, and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A column has no label satisfying the hard constraints.
    #[error("empty feasible set at slice {slice}, column {column}")]
    EmptyFeasibleSet { slice: usize, column: usize },

    /// No labeling with finite energy exists; names the first pixel where
    /// constraint propagation emptied the label set (or where decoding got stuck).
    #[error("infeasible instance: no finite-cost label at slice {slice}, column {column}")]
    Infeasible { slice: usize, column: usize },

    /// Training data does not cover the quantity being estimated.
    #[error("insufficient training data: {0}")]
    InsufficientData(String),

    /// Two objects that must share dimensions do not.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// A synthetic-data configuration cannot host the requested margins.
    #[error("synthesis config infeasible: {0}")]
    ConfigInfeasible(String),

    /// A parameter value violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Errors produced by the on-disk container and file formats.
#[derive(Debug, Error)]
pub enum DataError {
    /// Manifest unreadable or structurally invalid.
    #[error("corrupt manifest at {path}: {reason}")]
    CorruptManifest { path: String, reason: String },

    /// A required input file does not exist.
    #[error("missing file: {path}")]
    MissingFile { path: String },

    /// A payload file's size disagrees with the manifest dimensions.
    #[error("size mismatch in {file}: expected {expected} bytes, found {found}")]
    SizeMismatch {
        file: String,
        expected: u64,
        found: u64,
    },

    /// Stored checksum does not match the payload bytes.
    #[error("checksum mismatch in {file}")]
    ChecksumMismatch { file: String },

    /// Container format version is not supported by this build.
    #[error("unsupported container version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    /// A text file failed to parse.
    #[error("parse error in {file} line {line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },

    /// Underlying filesystem failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The loaded data violates a model invariant.
    #[error(transparent)]
    Model(#[from] ModelError),
}
