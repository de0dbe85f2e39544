use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed files.
    #[error("{0}")]
    Input(String),

    /// The estimation itself failed.
    #[error("{0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) | Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl From<modal_core::Error> for CliError {
    fn from(e: modal_core::Error) -> Self {
        use modal_core::Error as E;
        match e {
            E::ZeroSpectrum
            | E::RankDeficient { .. }
            | E::SingularBasis(_)
            | E::UnstableFilter(_)
            | E::Decomposition(_)
            | E::NonFiniteCost => Self::Numerical(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}
