use std::path::Path;

use ndcwt::NdcwtError;
use thiserror::Error;

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for {flag}: {msg}")]
    Validation { flag: &'static str, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn validation(flag: &'static str, msg: String) -> Self {
        Self::Validation { flag, msg }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Attributes a library error to the flag that controls it.
    pub fn from_lib(err: NdcwtError) -> Self {
        if let NdcwtError::Io(source) = err {
            return Self::Io {
                path: String::from("<input>"),
                source,
            };
        }
        let flag = match &err {
            NdcwtError::UnknownFilter { .. } => "--wavelet",
            NdcwtError::InvalidFilter { .. } => "--filter-file",
            NdcwtError::DepthTooLarge { .. } | NdcwtError::DepthTooSmall => "--depth",
            NdcwtError::SignalTooShort { .. } | NdcwtError::LengthMismatch { .. } => "--input",
            NdcwtError::ShapeMismatch { .. } | NdcwtError::SizeLimit { .. } => "--shape",
            NdcwtError::ShiftOutOfRange { .. } => "--shift",
            NdcwtError::InsufficientLevels { .. } => "--levels",
            NdcwtError::InvalidHurst(_) => "--hurst",
            NdcwtError::EmbeddingFailed { .. } => "--hurst",
            NdcwtError::EmptyClass(_) | NdcwtError::InvalidDesign(_) => "--manifest",
            NdcwtError::InvalidInput(_) | NdcwtError::Parse { .. } => "--input",
            NdcwtError::Io(_) => unreachable!("handled above"),
        };
        Self::Validation {
            flag,
            msg: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation { .. } => EXIT_VALIDATION,
            Self::Io { .. } => EXIT_IO,
        }
    }
}

impl From<NdcwtError> for CliError {
    fn from(err: NdcwtError) -> Self {
        Self::from_lib(err)
    }
}
