use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signal must contain at least one sample")]
    EmptySignal,

    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),

    #[error("sample {0} is not finite")]
    NonFiniteSample(usize),

    #[error("partial {index} at {freq_hz} Hz is outside [0, {nyquist_hz}) Hz")]
    AboveNyquist {
        index: usize,
        freq_hz: f64,
        nyquist_hz: f64,
    },

    #[error("signal lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("sample rates differ: {0} Hz vs {1} Hz")]
    RateMismatch(f64, f64),

    #[error("reference signal has zero energy")]
    ZeroEnergy,

    #[error("need at least {required} samples, got {available}")]
    InsufficientSamples { required: usize, available: usize },

    #[error("all singular values are zero")]
    ZeroSpectrum,

    #[error("requested order {requested} but singular value {index} is zero")]
    RankDeficient { requested: usize, index: usize },

    #[error("least-squares basis is singular; colliding modes {0:?}")]
    SingularBasis(Vec<usize>),

    #[error("invalid mode {index}: {reason}")]
    InvalidMode { index: usize, reason: String },

    #[error("modes {0} and {1} share the same frequency and damping")]
    DuplicateMode(usize, usize),

    #[error("designed filter is unstable (pole radius {0})")]
    UnstableFilter(f64),

    #[error("{0} failed to converge")]
    Decomposition(&'static str),

    #[error("cost is not finite at the initial point")]
    NonFiniteCost,

    #[error("expected a real signal")]
    ComplexSignal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
