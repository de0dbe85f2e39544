//! Uniformly sampled time series.

use alloc::vec::Vec;

use crate::{Error, Result, C64};

/// A uniformly sampled real or complex time series.
///
/// Real signals are stored with zero imaginary parts and flagged so that
/// estimators can exploit conjugate symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<C64>,
    sample_rate: f64,
    real: bool,
}

impl Signal {
    pub fn from_real(samples: &[f64], sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            samples: samples.iter().map(|&x| C64::new(x, 0.0)).collect(),
            sample_rate,
            real: true,
        })
    }

    pub fn from_complex(samples: Vec<C64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if samples.is_empty() {
            return Err(Error::EmptySignal);
        }
        if let Some(i) = samples.iter().position(|x| !(x.re.is_finite() && x.im.is_finite())) {
            return Err(Error::NonFiniteSample(i));
        }
        Ok(Self {
            samples,
            sample_rate,
            real: false,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false: a `Signal` holds at least one sample.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    /// Real parts of the samples.
    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|x| x.re).collect()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Copy of the samples in `range`, at the same rate.
    pub fn slice(&self, range: core::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.len() {
            return Err(Error::InsufficientSamples {
                required: range.end,
                available: self.len(),
            });
        }
        Ok(Self {
            samples: self.samples[range].to_vec(),
            sample_rate: self.sample_rate,
            real: self.real,
        })
    }

    /// Truncates or zero-pads to exactly `len` samples.
    pub fn resized(&self, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptySignal);
        }
        let mut samples = self.samples.clone();
        samples.resize(len, C64::new(0.0, 0.0));
        Ok(Self {
            samples,
            sample_rate: self.sample_rate,
            real: self.real,
        })
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * gain).collect(),
            sample_rate: self.sample_rate,
            real: self.real,
        }
    }
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if sample_rate.is_finite() && sample_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSampleRate(sample_rate))
    }
}
