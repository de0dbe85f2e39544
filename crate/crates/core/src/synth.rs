//! Resynthesis as a parallel bank of second-order resonators.
//!
//! Mode `m` contributes `Re(gamma psi^t)`, whose transfer function is
//! `(b0 + b1 z^-1) / (1 + a1 z^-1 + a2 z^-2)`. Modes at DC or Nyquist have a
//! real pole and reduce to a first-order section.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::metrics::to_db;
use crate::{Error, Mode, ModeSet, Result, Signal, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiquadCoeffs {
    pub b0: f64,
    pub b1: f64,
    pub a1: f64,
    pub a2: f64,
}

impl BiquadCoeffs {
    /// Inside the stability triangle `a2 <= 1`, `|a1| <= 1 + a2`, up to `tol`.
    pub fn is_stable(&self, tol: f64) -> bool {
        self.a2 <= 1.0 + tol && self.a1.abs() <= 1.0 + self.a2 + tol
    }

    /// Direct form I filtering of `input`.
    pub fn filter(&self, input: &[f64]) -> Vec<f64> {
        let (mut x1, mut y1, mut y2) = (0.0, 0.0, 0.0);
        input
            .iter()
            .map(|&x| {
                let y = self.b0 * x + self.b1 * x1 - self.a1 * y1 - self.a2 * y2;
                x1 = x;
                y2 = y1;
                y1 = y;
                y
            })
            .collect()
    }

    pub fn impulse_response(&self, len: usize) -> Vec<f64> {
        let mut x = vec![0.0; len];
        if let Some(first) = x.first_mut() {
            *first = 1.0;
        }
        self.filter(&x)
    }

    /// Transfer function at `e^{j omega}`.
    pub fn response(&self, omega: f64) -> C64 {
        let z1 = C64::from_polar(1.0, -omega);
        let num = self.b0 + z1 * self.b1;
        let den = C64::new(1.0, 0.0) + z1 * self.a1 + z1 * z1 * self.a2;
        num / den
    }
}

pub fn biquad_coeffs(mode: &Mode) -> BiquadCoeffs {
    let r = (-mode.alpha()).exp();
    let gamma = mode.gamma();
    if mode.is_real_pole() {
        BiquadCoeffs {
            b0: gamma.re,
            b1: 0.0,
            a1: -r * mode.omega().cos(),
            a2: 0.0,
        }
    } else {
        BiquadCoeffs {
            b0: gamma.re,
            b1: -r * (gamma * C64::from_polar(1.0, -mode.omega())).re,
            a1: -2.0 * r * mode.omega().cos(),
            a2: r * r,
        }
    }
}

/// Sum of closed-form mode responses for `t = 0..len`.
///
/// Modes are summed pairwise (recursive halving) so rounding error grows with
/// `log M` rather than `M`.
pub fn render(modes: &ModeSet, len: usize) -> Result<Signal> {
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    let out = if modes.is_empty() {
        vec![0.0; len]
    } else {
        pairwise(modes.modes(), len, |m, out| {
            for (t, y) in out.iter_mut().enumerate() {
                *y = m.eval(t);
            }
        })
    };
    Signal::from_real(&out, modes.sample_rate())
}

/// Sum of biquad impulse responses computed by recursion.
pub fn render_recursive(modes: &ModeSet, len: usize) -> Result<Signal> {
    if len == 0 {
        return Err(Error::EmptySignal);
    }
    let out = if modes.is_empty() {
        vec![0.0; len]
    } else {
        pairwise(modes.modes(), len, |m, out| {
            out.copy_from_slice(&biquad_coeffs(m).impulse_response(out.len()));
        })
    };
    Signal::from_real(&out, modes.sample_rate())
}

fn pairwise(modes: &[Mode], len: usize, fill: impl Fn(&Mode, &mut [f64]) + Copy) -> Vec<f64> {
    if modes.len() == 1 {
        let mut out = vec![0.0; len];
        fill(&modes[0], &mut out);
        return out;
    }
    let (lo, hi) = modes.split_at(modes.len() / 2);
    let mut a = pairwise(lo, len, fill);
    let b = pairwise(hi, len, fill);
    for (x, y) in a.iter_mut().zip(&b) {
        *x += y;
    }
    a
}

/// `(Hz, dB)` of the summed biquad bank on `n_points` uniformly spaced
/// frequencies from DC to Nyquist, floored at -300 dB.
pub fn magnitude_response(modes: &ModeSet, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(
            "magnitude response needs at least two points".into(),
        ));
    }
    let fs = modes.sample_rate();
    let bank: Vec<BiquadCoeffs> = modes.iter().map(biquad_coeffs).collect();
    Ok((0..n_points)
        .map(|k| {
            let omega = PI * k as f64 / (n_points - 1) as f64;
            let h: C64 = bank.iter().map(|b| b.response(omega)).sum();
            (omega * fs / (2.0 * PI), to_db(h.norm_sqr()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::DB_FLOOR;
    use crate::synthetic::{generate, Partial, SyntheticSpec};
    use crate::Source;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(modes: Vec<Mode>, fs: f64) -> ModeSet {
        ModeSet::new(modes, Source::Plain, fs).unwrap()
    }

    #[test]
    fn quarter_rate_cosine() {
        let m = Mode::new(PI / 2.0, 0.0, 0.0, 1.0).unwrap();
        let c = biquad_coeffs(&m);
        assert_eq!((c.b0, c.a2), (1.0, 1.0));
        assert!(c.b1.abs() < 1e-15 && c.a1.abs() < 1e-15);
        let h = c.impulse_response(8);
        let expected = [1.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0];
        for (a, b) in h.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn dc_mode_is_first_order() {
        let m = Mode::new(0.0, 0.1, 0.0, 1.0).unwrap();
        let c = biquad_coeffs(&m);
        assert_eq!(c.a2, 0.0);
        for (t, y) in c.impulse_response(50).iter().enumerate() {
            assert!((y - (-0.1 * t as f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn nyquist_mode_is_first_order() {
        let m = Mode::new(PI, 0.05, 0.0, 2.0).unwrap();
        let c = biquad_coeffs(&m);
        assert_eq!(c.a2, 0.0);
        for (t, y) in c.impulse_response(50).iter().enumerate() {
            let expected = 2.0 * (-1f64).powi(t as i32) * (-0.05 * t as f64).exp();
            assert!((y - expected).abs() < 1e-13);
        }
    }

    fn random_mode(rng: &mut ChaCha8Rng) -> Mode {
        Mode::new(
            rng.random_range(0.01..PI - 0.01),
            rng.random_range(0.0..0.01),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .unwrap()
    }

    #[test]
    fn recursion_matches_complex_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_mode(&mut rng);
            let h = biquad_coeffs(&m).impulse_response(1000);
            for (t, y) in h.iter().enumerate() {
                let direct = (m.gamma() * C64::new(-m.alpha(), m.omega()).scale(t as f64).exp()).re;
                assert!((y - direct).abs() < 1e-10, "t={t}");
            }
        }
    }

    #[test]
    fn render_empty_and_single() {
        let empty = ModeSet::empty(Source::Plain, 100.0);
        assert!(render(&empty, 5).unwrap().real_part().iter().all(|&x| x == 0.0));
        let m = Mode::new(0.4, 0.01, 0.3, -0.7).unwrap();
        let r = render(&set(vec![m], 100.0), 64).unwrap().real_part();
        for (a, b) in r.iter().zip(biquad_coeffs(&m).impulse_response(64)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn render_matches_generator() {
        let fs = 44100.0;
        let spec = SyntheticSpec::new(vec![
            Partial {
                amplitudes: vec![(0.2, 1.0)],
                ..Partial::tone(440.0, 1e-4, 0.0)
            },
            Partial::cluster(1000.0, 3, 0.5, 2e-4, 0.5),
            Partial::tone(0.0, 1e-3, 0.1),
        ]);
        let a = render(&spec.modes(fs).unwrap(), 2000).unwrap().real_part();
        let b = generate(&spec, 2000, fs).unwrap().real_part();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn hundred_modes_against_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let modes: Vec<Mode> = (0..100).map(|_| random_mode(&mut rng)).collect();
        let ms = set(modes.clone(), 1.0);
        let r = render(&ms, 2048).unwrap().real_part();
        let rec = render_recursive(&ms, 2048).unwrap().real_part();
        let scale = r.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for t in 0..2048 {
            let direct: f64 = modes
                .iter()
                .map(|m| (m.gamma() * C64::new(-m.alpha(), m.omega()).scale(t as f64).exp()).re)
                .sum();
            assert!((r[t] - direct).abs() < 1e-9 * scale);
            assert!((rec[t] - direct).abs() < 1e-9 * scale);
        }
        assert!(ms.iter().all(|m| biquad_coeffs(m).is_stable(1e-9)));
    }

    #[test]
    fn magnitude_response_peaks() {
        let fs = 8000.0;
        let m = Mode::new(2.0 * PI * 1000.0 / fs, 0.0, 0.0, 1.0).unwrap();
        let resp = magnitude_response(&set(vec![m], fs), 401).unwrap();
        let peak = resp
            .iter()
            .filter(|(_, db)| db.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((peak.0 - 1000.0).abs() <= 10.0);

        let empty = magnitude_response(&ModeSet::empty(Source::Plain, fs), 4).unwrap();
        assert!(empty.iter().all(|&(_, db)| db == DB_FLOOR));
        assert!(magnitude_response(&ModeSet::empty(Source::Plain, fs), 1).is_err());
    }

    #[test]
    fn response_peaks_agree_with_fft() {
        use rustfft::FftPlanner;
        let fs = 8000.0;
        let modes = set(
            vec![
                Mode::new(2.0 * PI * 700.0 / fs, 2e-3, 0.0, 1.0).unwrap(),
                Mode::new(2.0 * PI * 2300.0 / fs, 1e-3, 0.5, 0.0).unwrap(),
            ],
            fs,
        );
        let len = 4096;
        let h = render(&modes, len).unwrap().real_part();
        let mut buf: Vec<C64> = h.iter().map(|&x| C64::new(x, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let fft_db: Vec<f64> = buf[..=len / 2].iter().map(|x| to_db(x.norm_sqr())).collect();
        let resp = magnitude_response(&modes, len / 2 + 1).unwrap();
        let local_maxima = |v: &[f64]| -> Vec<usize> {
            (1..v.len() - 1).filter(|&i| v[i] > v[i - 1] && v[i] > v[i + 1]).collect()
        };
        let a = local_maxima(&fft_db);
        let b = local_maxima(&resp.iter().map(|x| x.1).collect::<Vec<_>>());
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.abs_diff(*y) <= 1);
        }
    }

    proptest! {
        #[test]
        fn biquads_are_stable(w in 0.0f64..=PI, a in 0.0f64..2.0, gs in -5.0f64..5.0, gc in -5.0f64..5.0) {
            let m = Mode::new(w, a, gs, gc).unwrap();
            prop_assert!(biquad_coeffs(&m).is_stable(1e-9));
        }

        #[test]
        fn render_is_linear(seed in 0u64..1000, split in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let modes: Vec<Mode> = (0..10).map(|_| random_mode(&mut rng)).collect();
            let all = render(&set(modes.clone(), 1.0), 256).unwrap().real_part();
            let a = render(&set(modes[..split].to_vec(), 1.0), 256).unwrap().real_part();
            let b = render(&set(modes[split..].to_vec(), 1.0), 256).unwrap().real_part();
            for t in 0..256 {
                prop_assert!((all[t] - a[t] - b[t]).abs() < 1e-12);
            }
        }
    }
}
