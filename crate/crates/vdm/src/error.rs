use std::path::PathBuf;

use vdm_core::{DensityError, DivergenceError, SaddleError, TrainError};

#[derive(Debug, thiserror::Error)]
pub enum VdmError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Divergence(#[from] DivergenceError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Saddle(#[from] SaddleError),
}

impl VdmError {
    /// 2 for bad input or unusable files, 3 for numerical failures at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            VdmError::Train(TrainError::Diverged { .. }) => 3,
            VdmError::Density(DensityError::NoConvergence(_) | DensityError::QuadratureBudget(_) | DensityError::NonFinite(_)) => 3,
            VdmError::Saddle(SaddleError::RateViolation { .. } | SaddleError::NotMonotone { .. }) => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VdmError::Io {
            path: path.into(),
            source,
        }
    }
}
