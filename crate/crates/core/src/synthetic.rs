//! Synthetic impulse responses with known modes, for verification.
//!
//! Partials may be placed at stiff-string positions
//! `f_n = n f0 sqrt(1 + B n^2)` and split into clusters of up to three
//! detuned members, which reproduces the beating and two-stage decay of
//! coupled strings.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Mode, ModeSet, Result, Signal, Source};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartialFrequency {
    /// `n`-th stiff-string partial of `SyntheticSpec::f0`.
    Harmonic(u32),
    /// Explicit frequency; inharmonicity is not applied.
    Hz(f64),
}

/// One partial, optionally split into a cluster of detuned modes.
///
/// Cluster member `k` of `size` sits at `f + detune_hz * (k - (size - 1) / 2)`.
/// `alphas` and `amplitudes` hold one entry per member, or a single entry
/// shared by all members.
#[derive(Debug, Clone, PartialEq)]
pub struct Partial {
    pub frequency: PartialFrequency,
    pub cluster_size: usize,
    pub detune_hz: f64,
    /// Decay rates, nepers/sample.
    pub alphas: Vec<f64>,
    /// `(gamma_s, gamma_c)` pairs.
    pub amplitudes: Vec<(f64, f64)>,
}

impl Partial {
    /// A single cosine-phase mode.
    pub fn tone(freq_hz: f64, alpha: f64, amplitude: f64) -> Self {
        Self {
            frequency: PartialFrequency::Hz(freq_hz),
            cluster_size: 1,
            detune_hz: 0.0,
            alphas: vec![alpha],
            amplitudes: vec![(0.0, amplitude)],
        }
    }

    /// `size` equal-amplitude cosine-phase modes spaced by `detune_hz`.
    pub fn cluster(freq_hz: f64, size: usize, detune_hz: f64, alpha: f64, amplitude: f64) -> Self {
        Self {
            frequency: PartialFrequency::Hz(freq_hz),
            cluster_size: size,
            detune_hz,
            alphas: vec![alpha],
            amplitudes: vec![(0.0, amplitude)],
        }
    }
}

/// Additive white Gaussian noise at a given SNR relative to the clean signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub snr_db: f64,
    pub seed: u64,
}

/// `(partial index, freq_hz, alpha, gamma_s, gamma_c)`.
type Member = (usize, f64, f64, f64, f64);

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SyntheticSpec {
    /// Fundamental for [`PartialFrequency::Harmonic`] partials, Hz.
    pub f0: f64,
    /// String stiffness coefficient `B`.
    pub inharmonicity: f64,
    pub partials: Vec<Partial>,
    pub noise: Option<Noise>,
}

impl SyntheticSpec {
    pub fn new(partials: Vec<Partial>) -> Self {
        Self {
            partials,
            ..Self::default()
        }
    }

    /// Center frequency of partial `index` before cluster detuning.
    pub fn partial_frequency(&self, index: usize) -> f64 {
        match self.partials[index].frequency {
            PartialFrequency::Hz(f) => f,
            PartialFrequency::Harmonic(n) => {
                let n = f64::from(n);
                n * self.f0 * (1.0 + self.inharmonicity * n * n).sqrt()
            }
        }
    }

    /// Every mode of every partial.
    fn members(&self) -> Result<Vec<Member>> {
        let mut out = Vec::new();
        for (index, p) in self.partials.iter().enumerate() {
            let invalid = |what: &str| {
                Error::InvalidParameter(alloc::format!("partial {index}: {what}"))
            };
            if !(1..=3).contains(&p.cluster_size) {
                return Err(invalid("cluster size must be 1, 2 or 3"));
            }
            let size = p.cluster_size;
            let pick = |len: usize, k: usize| if len == 1 { 0 } else { k };
            if !(p.alphas.len() == 1 || p.alphas.len() == size) {
                return Err(invalid("need one alpha or one per cluster member"));
            }
            if !(p.amplitudes.len() == 1 || p.amplitudes.len() == size) {
                return Err(invalid("need one amplitude or one per cluster member"));
            }
            let center = self.partial_frequency(index);
            for k in 0..size {
                let offset = k as f64 - (size - 1) as f64 / 2.0;
                let freq = center + p.detune_hz * offset;
                let alpha = p.alphas[pick(p.alphas.len(), k)];
                let (gs, gc) = p.amplitudes[pick(p.amplitudes.len(), k)];
                if !(alpha.is_finite() && alpha >= 0.0 && gs.is_finite() && gc.is_finite()) {
                    return Err(invalid("alpha must be finite and nonnegative"));
                }
                out.push((index, freq, alpha, gs, gc));
            }
        }
        Ok(out)
    }

    fn validated(&self, sample_rate: f64) -> Result<Vec<(f64, f64, f64, f64)>> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSampleRate(sample_rate));
        }
        let nyquist = sample_rate / 2.0;
        self.members()?
            .into_iter()
            .map(|(index, freq, alpha, gs, gc)| {
                if !(freq.is_finite() && freq >= 0.0 && freq < nyquist) {
                    return Err(Error::AboveNyquist {
                        index,
                        freq_hz: freq,
                        nyquist_hz: nyquist,
                    });
                }
                Ok((2.0 * PI * freq / sample_rate, alpha, gs, gc))
            })
            .collect()
    }

    /// The ground-truth modes of this spec at `sample_rate`.
    pub fn modes(&self, sample_rate: f64) -> Result<ModeSet> {
        let modes = self
            .validated(sample_rate)?
            .into_iter()
            .map(|(w, a, gs, gc)| Ok(Mode::new(w, a, gs, gc)?.with_amplitudes(gs, gc)))
            .collect::<Result<Vec<_>>>()?;
        ModeSet::new(modes, Source::Plain, sample_rate)
    }
}

/// Evaluates `sum_m e^{-alpha_m t} (gamma_s sin(omega_m t) + gamma_c cos(omega_m t))`
/// for `t = 0..duration`, plus noise when `noise` is set.
pub fn generate(spec: &SyntheticSpec, duration: usize, sample_rate: f64) -> Result<Signal> {
    if duration == 0 {
        return Err(Error::EmptySignal);
    }
    let params = spec.validated(sample_rate)?;
    let mut samples = vec![0.0; duration];
    for &(omega, alpha, gs, gc) in &params {
        for (t, x) in samples.iter_mut().enumerate() {
            let t = t as f64;
            let (s, c) = (omega * t).sin_cos();
            *x += (-alpha * t).exp() * (gs * s + gc * c);
        }
    }
    if let Some(noise) = spec.noise {
        let power = samples.iter().map(|x| x * x).sum::<f64>() / duration as f64;
        let sigma = (power / 10f64.powf(noise.snr_db / 10.0)).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for x in &mut samples {
            let n: f64 = StandardNormal.sample(&mut rng);
            *x += sigma * n;
        }
    }
    Signal::from_real(&samples, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn pure_cosine_at_quarter_rate() {
        // omega = pi/2 at fs = 4 Hz is 1 Hz.
        let spec = SyntheticSpec::new(vec![Partial::tone(1.0, 0.0, 1.0)]);
        let h = generate(&spec, 4, 4.0).unwrap().real_part();
        assert!(close(&h, &[1.0, 0.0, -1.0, 0.0], 1e-15));
    }

    #[test]
    fn pure_decay() {
        let spec = SyntheticSpec::new(vec![Partial::tone(0.0, 0.1, 1.0)]);
        let h = generate(&spec, 10, 1000.0).unwrap().real_part();
        for (t, x) in h.iter().enumerate() {
            assert!((x - (-0.1 * t as f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_partials_at_or_above_nyquist() {
        let spec = SyntheticSpec::new(vec![
            Partial::tone(100.0, 0.0, 1.0),
            Partial::tone(500.0, 0.0, 1.0),
        ]);
        assert_eq!(
            generate(&spec, 8, 1000.0),
            Err(Error::AboveNyquist {
                index: 1,
                freq_hz: 500.0,
                nyquist_hz: 500.0
            })
        );
    }

    #[test]
    fn cluster_members_are_symmetric_about_center() {
        let spec = SyntheticSpec::new(vec![Partial::cluster(220.0, 3, 0.3, 1e-4, 1.0)]);
        let modes = spec.modes(44100.0).unwrap();
        let hz: Vec<f64> = modes.iter().map(|m| m.frequency_hz(44100.0)).collect();
        assert!(close(&hz, &[219.7, 220.0, 220.3], 1e-9));
    }

    #[test]
    fn stiff_string_partials() {
        let spec = SyntheticSpec {
            f0: 220.0,
            inharmonicity: 1e-4,
            partials: vec![Partial {
                frequency: PartialFrequency::Harmonic(10),
                ..Partial::tone(0.0, 0.0, 1.0)
            }],
            noise: None,
        };
        assert!((spec.partial_frequency(0) - 2210.9726366465957).abs() < 1e-9);
    }

    #[test]
    fn noise_is_seeded_and_scaled() {
        let mut spec = SyntheticSpec::new(vec![Partial::tone(1000.0, 0.0, 1.0)]);
        let clean = generate(&spec, 4096, 48000.0).unwrap().real_part();
        spec.noise = Some(Noise {
            snr_db: 20.0,
            seed: 7,
        });
        let a = generate(&spec, 4096, 48000.0).unwrap().real_part();
        let b = generate(&spec, 4096, 48000.0).unwrap().real_part();
        assert_eq!(a, b);
        let noise: f64 = a.iter().zip(&clean).map(|(x, y)| (x - y).powi(2)).sum();
        let signal: f64 = clean.iter().map(|x| x * x).sum();
        let snr = 10.0 * (signal / noise).log10();
        assert!((snr - 20.0).abs() < 0.5, "snr {snr}");
    }
}
