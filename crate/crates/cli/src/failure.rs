use railgen::dataset::{DatasetError, ManifestError};
use railgen::kinksim::KinkError;
use railgen::vegsim::VegetationError;
use railgen::{DetectError, ImageError};

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, bad config, or an operation that could not complete on
    /// valid input (no rails found, simulation rejected).
    Usage(String),
    Io(String),
    NoInputs(String),
}

impl Failure {
    pub const USAGE: u8 = 1;
    pub const IO: u8 = 2;
    pub const NO_INPUTS: u8 = 3;

    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => Self::USAGE,
            Failure::Io(_) => Self::IO,
            Failure::NoInputs(_) => Self::NO_INPUTS,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Io(_) => "io",
            Failure::NoInputs(_) => "no_inputs",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::NoInputs(m) => m,
        }
    }
}

impl From<ImageError> for Failure {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::Unreadable { .. }
            | ImageError::Unwritable { .. }
            | ImageError::MalformedHeader(_)
            | ImageError::TruncatedData { .. }
            | ImageError::Png(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Self {
        match e {
            DetectError::Image(e) => e.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<VegetationError> for Failure {
    fn from(e: VegetationError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<KinkError> for Failure {
    fn from(e: KinkError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } | DatasetError::Manifest(ManifestError::Io { .. }) => Failure::Io(e.to_string()),
            DatasetError::NoUsableInputs(_) => Failure::NoInputs(e.to_string()),
            DatasetError::Image(e) => e.into(),
            e => Failure::Usage(e.to_string()),
        }
    }
}
