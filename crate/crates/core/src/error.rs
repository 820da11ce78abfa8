use std::path::PathBuf;

use thiserror::Error;

use crate::imaging::Rect;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: cannot decode image: {message}", path.display())]
    Decode { path: PathBuf, message: String },

    #[error("{}: cannot encode image: {message}", path.display())]
    Encode { path: PathBuf, message: String },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("rectangle {rect} does not fit in {width}x{height} image")]
    RectOutOfBounds { rect: Rect, width: u32, height: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} index {index} out of range (valid: {valid})")]
    Index {
        what: &'static str,
        index: usize,
        valid: String,
    },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("exhaustive search over 2^{k} replacements refused (limit is k <= {limit})")]
    SearchTooLarge { k: usize, limit: usize },

    #[error(
        "digest mismatch for {source_path} pass {pass_index}: expected {expected:016x}, got {actual:016x}"
    )]
    DigestMismatch {
        source_path: String,
        pass_index: u32,
        expected: u64,
        actual: u64,
    },

    #[error("writing {} failed after {completed} of {total} outputs: {source}", path.display())]
    PartialWrite {
        path: PathBuf,
        completed: usize,
        total: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("manifest: {0}")]
    Manifest(String),
}
