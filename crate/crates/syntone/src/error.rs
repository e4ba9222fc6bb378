//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by dataset synthesis, feature extraction, metric
/// evaluation, model training, and the pipeline commands.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration is internally inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Tensor or batch shapes do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// The evaluation set cannot support the requested metric.
    #[error("degenerate representation: {0}")]
    DegenerateRepresentation(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: loss = {loss}")]
    Diverged { step: usize, loss: f64 },

    /// A referenced artifact is missing.
    #[error("missing artifact `{id}`: {path}")]
    MissingArtifact { id: String, path: PathBuf },

    /// Malformed on-disk data (tensor files, manifests, checkpoints).
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
