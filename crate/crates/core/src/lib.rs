//! Modal parameter estimation for measured impulse responses.
//!
//! An impulse response is modeled as a sum of exponentially damped sinusoids
//! (modes), each described by a frequency `omega` (rad/sample), a decay rate
//! `alpha` (nepers/sample) and a complex amplitude. This crate estimates those
//! parameters and resynthesizes the response:
//!
//! * [`esprit`]: Hankel matrix pencil estimation with singular-value based
//!   model-order selection and least-squares amplitude fitting.
//! * [`warp`]: allpass frequency warping, used to spread closely spaced
//!   low-frequency modes apart before estimation, merged with a plain
//!   estimate for the high-frequency region.
//! * [`subband`]: frequency-zoomed estimation: heterodyne, lowpass, decimate
//!   and estimate per band, then map back to the full-rate axis.
//! * [`optimize`]: box-constrained time-domain refinement of frequencies and
//!   dampings with per-step amplitude refits.
//! * [`synth`]: resynthesis as a parallel bank of second-order resonators.
//!
//! The crate is `no_std` compatible (it needs `alloc`). The default `std`
//! feature enables runtime SIMD dispatch in the dense linear algebra, which
//! is several times faster for large Hankel matrices.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod diagnostics;
pub mod error;
pub mod esprit;
pub mod linalg;
pub mod metrics;
pub mod mode;
pub mod optimize;
pub mod signal;
pub mod subband;
pub mod synth;
pub mod synthetic;
pub mod warp;

pub use diagnostics::{BandReport, Diagnostics};
pub use error::{Error, Result};
pub use esprit::{esprit, Estimate, OrderMethod};
pub use metrics::mse_db;
pub use mode::{Mode, ModeSet, Source};
pub use signal::Signal;
pub use synthetic::{generate, Partial, PartialFrequency, SyntheticSpec};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
