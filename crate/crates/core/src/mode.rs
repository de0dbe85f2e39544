//! Modes and ordered mode collections.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result, C64};

/// Decay rates below `-ALPHA_TOL` are rejected as unstable.
pub const ALPHA_TOL: f64 = 1e-9;

/// Two modes closer than this in both frequency and damping are duplicates.
pub const DUPLICATE_TOL: f64 = 1e-12;

/// One exponentially damped real sinusoid,
/// `e^{-alpha t} (gamma_s sin(omega t) + gamma_c cos(omega t))`.
///
/// The equivalent complex amplitude is `gamma = gamma_c - j gamma_s`, so the
/// mode's contribution is `Re(gamma * e^{(j omega - alpha) t})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    omega: f64,
    alpha: f64,
    gamma_s: f64,
    gamma_c: f64,
}

impl Mode {
    pub fn new(omega: f64, alpha: f64, gamma_s: f64, gamma_c: f64) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidMode {
            index: 0,
            reason: reason.into(),
        };
        if !(omega.is_finite() && alpha.is_finite() && gamma_s.is_finite() && gamma_c.is_finite())
        {
            return Err(invalid("non-finite parameter"));
        }
        if !(0.0..=PI).contains(&omega) {
            return Err(invalid(&format!("omega {omega} outside [0, pi]")));
        }
        if alpha < -ALPHA_TOL {
            return Err(invalid(&format!("alpha {alpha} below -{ALPHA_TOL}")));
        }
        Ok(Self {
            omega,
            alpha,
            gamma_s,
            gamma_c,
        })
    }

    /// Mode with amplitudes taken from a complex `gamma = gamma_c - j gamma_s`.
    pub fn from_complex(omega: f64, alpha: f64, gamma: C64) -> Result<Self> {
        Self::new(omega, alpha, -gamma.im, gamma.re)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma_s(&self) -> f64 {
        self.gamma_s
    }

    pub fn gamma_c(&self) -> f64 {
        self.gamma_c
    }

    pub fn gamma(&self) -> C64 {
        C64::new(self.gamma_c, -self.gamma_s)
    }

    /// `e^{j omega - alpha}`.
    pub fn pole(&self) -> C64 {
        C64::from_polar((-self.alpha).exp(), self.omega)
    }

    /// DC and Nyquist modes are single real poles with no sine component.
    pub fn is_real_pole(&self) -> bool {
        self.omega == 0.0 || self.omega == PI
    }

    pub fn frequency_hz(&self, sample_rate: f64) -> f64 {
        self.omega * sample_rate / (2.0 * PI)
    }

    /// Time for the envelope to fall by 60 dB; infinite for undamped modes.
    pub fn t60_seconds(&self, sample_rate: f64) -> f64 {
        if self.alpha <= 0.0 {
            f64::INFINITY
        } else {
            1000f64.ln() / self.alpha / sample_rate
        }
    }

    pub fn with_amplitudes(self, gamma_s: f64, gamma_c: f64) -> Self {
        Self {
            gamma_s: if self.is_real_pole() { 0.0 } else { gamma_s },
            gamma_c,
            ..self
        }
    }

    /// Value of the mode at integer time `t`.
    pub fn eval(&self, t: usize) -> f64 {
        let t = t as f64;
        let (s, c) = (self.omega * t).sin_cos();
        (-self.alpha * t).exp() * (self.gamma_s * s + self.gamma_c * c)
    }
}

/// Which estimator produced a [`ModeSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Plain,
    Warped,
    Merged,
    Subband,
    Optimized,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Plain => "plain",
            Source::Warped => "warped",
            Source::Merged => "merged",
            Source::Subband => "subband",
            Source::Optimized => "optimized",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "plain" => Source::Plain,
            "warped" => Source::Warped,
            "merged" => Source::Merged,
            "subband" => Source::Subband,
            "optimized" => Source::Optimized,
            _ => return None,
        })
    }
}

/// Modes sorted by ascending frequency (then damping), with their origin.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    modes: Vec<Mode>,
    source: Source,
    sample_rate: f64,
}

impl ModeSet {
    /// Sorts `modes` and rejects duplicated (omega, alpha) pairs.
    pub fn new(mut modes: Vec<Mode>, source: Source, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSampleRate(sample_rate));
        }
        sort_modes(&mut modes);
        for (i, pair) in modes.windows(2).enumerate() {
            if is_duplicate(&pair[0], &pair[1]) {
                return Err(Error::DuplicateMode(i, i + 1));
            }
        }
        Ok(Self {
            modes,
            source,
            sample_rate,
        })
    }

    pub fn empty(source: Source, sample_rate: f64) -> Self {
        Self {
            modes: Vec::new(),
            source,
            sample_rate,
        }
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn into_modes(self) -> Vec<Mode> {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Mode> {
        self.modes.iter()
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn with_source(self, source: Source) -> Self {
        Self { source, ..self }
    }

    /// `(omega, alpha)` pairs in order.
    pub fn parameters(&self) -> Vec<(f64, f64)> {
        self.modes.iter().map(|m| (m.omega, m.alpha)).collect()
    }

    /// Union of two sets at the same rate.
    pub fn union(&self, other: &ModeSet, source: Source) -> Result<Self> {
        if self.sample_rate != other.sample_rate {
            return Err(Error::RateMismatch(self.sample_rate, other.sample_rate));
        }
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        Self::new(modes, source, self.sample_rate)
    }
}

impl<'a> IntoIterator for &'a ModeSet {
    type Item = &'a Mode;
    type IntoIter = core::slice::Iter<'a, Mode>;

    fn into_iter(self) -> Self::IntoIter {
        self.modes.iter()
    }
}

pub(crate) fn sort_modes(modes: &mut [Mode]) {
    modes.sort_by(|a, b| {
        a.omega
            .total_cmp(&b.omega)
            .then(a.alpha.total_cmp(&b.alpha))
    });
}

pub(crate) fn is_duplicate(a: &Mode, b: &Mode) -> bool {
    (a.omega - b.omega).abs() <= DUPLICATE_TOL && (a.alpha - b.alpha).abs() <= DUPLICATE_TOL
}
