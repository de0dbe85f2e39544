//! IIR lowpass design and multi-stage decimation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result, Signal, C64};

/// Highest order the elliptic-like design will raise a filter to.
pub const MAX_ORDER: usize = 40;
/// Largest factor handled by a single decimation stage.
pub const MAX_STAGE_FACTOR: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterFamily {
    Butterworth,
    /// Butterworth with its order raised until the stopband attenuation is
    /// met at the first frequency that aliases onto the passband edge.
    EllipticLike,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub family: FilterFamily,
    pub order: usize,
    pub cutoff_hz: f64,
    pub stopband_db: Option<f64>,
    pub passband_ripple_db: Option<f64>,
}

impl FilterSpec {
    pub fn butterworth(order: usize, cutoff_hz: f64) -> Self {
        Self {
            family: FilterFamily::Butterworth,
            order,
            cutoff_hz,
            stopband_db: None,
            passband_ripple_db: None,
        }
    }

    pub fn elliptic_like(order: usize, cutoff_hz: f64, stopband_db: f64) -> Self {
        Self {
            family: FilterFamily::EllipticLike,
            order,
            cutoff_hz,
            stopband_db: Some(stopband_db),
            passband_ripple_db: None,
        }
    }

    pub fn with_cutoff(self, cutoff_hz: f64) -> Self {
        Self { cutoff_hz, ..self }
    }

    /// Order actually designed at rate `fs` given the stopband edge.
    pub fn effective_order(&self, fs: f64, stop_edge_hz: f64) -> usize {
        match self.family {
            FilterFamily::Butterworth => self.order,
            FilterFamily::EllipticLike => {
                let atten = self.stopband_db.unwrap_or(80.0);
                let edge = stop_edge_hz.min(0.499 * fs);
                if edge <= self.cutoff_hz {
                    return MAX_ORDER.max(self.order);
                }
                let ratio = (PI * edge / fs).tan() / (PI * self.cutoff_hz / fs).tan();
                let needed = ((10f64.powf(atten / 10.0) - 1.0).log10() / (2.0 * ratio.log10())).ceil();
                (needed as usize).clamp(self.order, MAX_ORDER.max(self.order))
            }
        }
    }

    /// Second-order sections at rate `fs`.
    pub fn design(&self, fs: f64, stop_edge_hz: f64) -> Result<Vec<Sos>> {
        butterworth_lowpass(self.effective_order(fs, stop_edge_hz), self.cutoff_hz, fs)
    }
}

/// One section `(b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Sos {
    /// Largest pole radius.
    pub fn pole_radius(&self) -> f64 {
        let (a1, a2) = (self.a[1], self.a[2]);
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            a2.sqrt()
        } else {
            let s = disc.sqrt();
            ((-a1 + s) / 2.0).abs().max(((-a1 - s) / 2.0).abs())
        }
    }

    pub fn response(&self, omega: f64) -> C64 {
        let z1 = C64::from_polar(1.0, -omega);
        let num = self.b[0] + z1 * (self.b[1] + z1 * self.b[2]);
        let den = self.a[0] + z1 * (self.a[1] + z1 * self.a[2]);
        num / den
    }
}

/// Butterworth lowpass by bilinear transform of the analog prototype, with
/// the cutoff prewarped and unit gain at DC.
pub fn butterworth_lowpass(order: usize, cutoff_hz: f64, fs: f64) -> Result<Vec<Sos>> {
    if order == 0 {
        return Err(Error::InvalidParameter("filter order must be at least 1".into()));
    }
    if !(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "cutoff {cutoff_hz} Hz outside (0, {}) Hz",
            fs / 2.0
        )));
    }
    let k = 2.0 * fs;
    let wc = k * (PI * cutoff_hz / fs).tan();
    let bilinear = |s: C64| (k + s) / (k - s);
    let n = order as f64;
    let mut sections = Vec::with_capacity(order.div_ceil(2));
    for i in 0..order / 2 {
        let theta = PI * (2.0 * i as f64 + n + 1.0) / (2.0 * n);
        let z = bilinear(C64::from_polar(wc, theta));
        let (a1, a2) = (-2.0 * z.re, z.norm_sqr());
        let g = (1.0 + a1 + a2) / 4.0;
        sections.push(Sos {
            b: [g, 2.0 * g, g],
            a: [1.0, a1, a2],
        });
    }
    if order % 2 == 1 {
        let z = bilinear(C64::new(-wc, 0.0)).re;
        let g = (1.0 - z) / 2.0;
        sections.push(Sos {
            b: [g, g, 0.0],
            a: [1.0, -z, 0.0],
        });
    }
    if let Some(r) = sections.iter().map(Sos::pole_radius).find(|&r| !(r < 1.0)) {
        return Err(Error::UnstableFilter(r));
    }
    Ok(sections)
}

/// Transposed direct form II, in place.
pub fn sos_filter(sections: &[Sos], x: &mut [f64]) {
    for s in sections {
        let (mut z1, mut z2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = s.b[0] * input + z1;
            z1 = s.b[1] * input - s.a[1] * y + z2;
            z2 = s.b[2] * input - s.a[2] * y;
            *v = y;
        }
    }
}

/// Filters real and imaginary parts independently (the filter is real).
pub fn sos_filter_complex(sections: &[Sos], x: &mut [C64]) {
    let mut re: Vec<f64> = x.iter().map(|v| v.re).collect();
    let mut im: Vec<f64> = x.iter().map(|v| v.im).collect();
    sos_filter(sections, &mut re);
    sos_filter(sections, &mut im);
    for (v, (r, i)) in x.iter_mut().zip(re.into_iter().zip(im)) {
        *v = C64::new(r, i);
    }
}

/// Samples needed for the slowest pole of `sections` to decay below `tol`.
pub fn settle_samples(sections: &[Sos], tol: f64) -> usize {
    let r = sections.iter().map(Sos::pole_radius).fold(0.0, f64::max);
    if r <= 0.0 {
        return 1;
    }
    (tol.ln() / r.ln()).ceil() as usize
}

/// Splits `r` into stage factors no larger than [`MAX_STAGE_FACTOR`] where
/// possible, largest first. `5000` becomes `[25, 25, 8]`.
pub fn decimation_stages(r: usize) -> Vec<usize> {
    if r <= 1 {
        return vec![1];
    }
    let mut primes = Vec::new();
    let mut n = r;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        primes.push(n);
    }
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let mut stages: Vec<usize> = Vec::new();
    for q in primes {
        match stages.iter_mut().find(|s| **s * q <= MAX_STAGE_FACTOR) {
            Some(s) => *s *= q,
            None => stages.push(q),
        }
    }
    stages.sort_unstable_by(|a, b| b.cmp(a));
    stages
}

/// A decimated signal and the number of its leading samples still affected
/// by the filter transients.
#[derive(Debug, Clone)]
pub struct Decimated {
    pub signal: Signal,
    pub settle: usize,
}

/// Lowpass filters and keeps every `r`-th sample, in stages.
pub fn lowpass_decimate(signal: &Signal, spec: &FilterSpec, r: usize) -> Result<Signal> {
    lowpass_decimate_settled(signal, spec, r, 1e-10).map(|d| d.signal)
}

/// [`lowpass_decimate`] that also reports how many output samples to skip
/// before the transients of all stages fall below `settle_tol`.
pub fn lowpass_decimate_settled(
    signal: &Signal,
    spec: &FilterSpec,
    r: usize,
    settle_tol: f64,
) -> Result<Decimated> {
    if r == 0 {
        return Err(Error::InvalidParameter("decimation factor must be at least 1".into()));
    }
    let fs = signal.sample_rate();
    let fs_out = fs / r as f64;
    if !(spec.cutoff_hz < fs_out / 2.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "cutoff {} Hz not below decimated Nyquist {} Hz",
            spec.cutoff_hz,
            fs_out / 2.0
        )));
    }
    let mut x: Vec<C64> = signal.samples().to_vec();
    let mut rate = fs;
    let mut settle_seconds = 0.0;
    for stage in decimation_stages(r) {
        let next = rate / stage as f64;
        let sections = spec.design(rate, next - spec.cutoff_hz)?;
        sos_filter_complex(&sections, &mut x);
        settle_seconds += settle_samples(&sections, settle_tol) as f64 / rate;
        x = x.into_iter().step_by(stage).collect();
        rate = next;
    }
    let out = if signal.is_real() {
        let re: Vec<f64> = x.iter().map(|v| v.re).collect();
        Signal::from_real(&re, fs_out)?
    } else {
        Signal::from_complex(x, fs_out)?
    };
    Ok(Decimated {
        signal: out,
        settle: (settle_seconds * fs_out).ceil() as usize,
    })
}
