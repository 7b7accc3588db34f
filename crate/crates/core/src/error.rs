use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A document did not match the expected schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// Room geometry violates an invariant (e.g. a source outside the box).
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },

    /// The requested RT60 would need an absorption coefficient outside (0, 1).
    #[error("rt60 of {rt60} s is unreachable for V = {volume} m^3, S = {area} m^2")]
    UnreachableRt60 { rt60: f64, volume: f64, area: f64 },

    #[error("degenerate geometry: receiver is {distance:e} m from an image source")]
    DegenerateGeometry { distance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("band count mismatch: expected {expected}, got {actual}")]
    BandMismatch { expected: usize, actual: usize },

    #[error("sample rate mismatch: {context} is {found} Hz but the room uses {expected} Hz")]
    SampleRateMismatch {
        context: String,
        found: u32,
        expected: u32,
    },

    #[error("empty audio: {0}")]
    EmptyAudio(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
