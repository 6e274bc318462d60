use std::path::PathBuf;

/// Errors raised anywhere in the detection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt data: {0}")]
    CorruptData(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid value: {0}")]
    Invalid(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("rectangle out of bounds: {0}")]
    OutOfBounds(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tile {width}x{height} exceeds backend limit {max_width}x{max_height}")]
    TileTooLarge {
        width: u32,
        height: u32,
        max_width: u32,
        max_height: u32,
    },
    #[error("segmentation backend failure: {0}")]
    BackendFailure(String),
    #[error("ground truth box {0} has no occlusion annotation")]
    MissingAnnotation(usize),
    #[error("invalid scene spec: {0}")]
    InvalidSpec(String),
    #[error("unreachable degradation target: {0}")]
    Unreachable(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
