//! Allpass frequency warping.
//!
//! Replacing every unit delay by the allpass `D(z) = (z^-1 + rho) / (1 + rho z^-1)`
//! maps a pole `psi` to `(psi - rho) / (1 - rho psi)`. For `rho > 0` this
//! stretches the low end of the frequency axis by `(1 + rho) / (1 - rho)` and
//! squeezes the high end, so closely spaced low-frequency modes become easier
//! to separate. Poles found on the warped signal are mapped back with the
//! inverse Moebius map.
//!
//! Warping one pole produces `(1 + rho z^-1) / ((1 - rho psi)(1 - psi~ z^-1))`:
//! a pure exponential from sample 1 on, plus an extra term at sample 0. The
//! estimator therefore skips the first warped sample.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::diagnostics::Diagnostics;
use crate::esprit::{
    estimate_amplitudes, estimate_signal_poles, poles_to_modes, EspritConfig, Estimate,
    OrderMethod,
};
use crate::mode::ALPHA_TOL;
use crate::{Error, Mode, ModeSet, Result, Signal, Source, C64};

/// Poles pushed this far outside the unit circle by unwarping or undamping
/// are dropped.
pub const UNSTABLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpConfig {
    pub rho: f64,
    /// Merge cutoff, rad/sample: warped estimates below, plain estimates above.
    pub omega_c: f64,
    /// Exponential pre-damping of the plain branch, nepers/second.
    pub pre_damp_sigma: f64,
}

impl WarpConfig {
    /// `omega_c = arccos(|rho|)`, where the warping map has unit slope.
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho.abs() < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "warping factor {rho} outside (-1, 1)"
            )));
        }
        Ok(Self {
            rho,
            omega_c: rho.abs().acos(),
            pre_damp_sigma: 0.0,
        })
    }

    /// Bark-scale warping for the given sample rate.
    pub fn bark(sample_rate: f64) -> Result<Self> {
        Self::new(bark_rho(sample_rate))
    }

    pub fn with_pre_damp(mut self, sigma: f64) -> Self {
        self.pre_damp_sigma = sigma;
        self
    }
}

/// Warping factor approximating the Bark scale (Smith and Abel).
pub fn bark_rho(sample_rate: f64) -> f64 {
    let khz = sample_rate / 1000.0;
    1.0674 * ((2.0 / PI) * (0.06583 * khz).atan()).sqrt() - 0.1916
}

/// Warping factor whose low-frequency magnification equals `zoom`.
pub fn rho_for_zoom(zoom: f64) -> Result<f64> {
    if !(zoom >= 1.0 && zoom.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "zoom factor {zoom} must be at least 1"
        )));
    }
    Ok((zoom - 1.0) / (zoom + 1.0))
}

/// Frequency `omega` (rad/sample) on the warped axis.
pub fn warp_frequency(omega: f64, rho: f64) -> f64 {
    // arg((e^{jw} - rho) / (1 - rho e^{jw})), written so the angle stays in
    // [0, pi] for w in [0, pi] and |rho| < 1.
    let (s, c) = omega.sin_cos();
    let num = (1.0 - rho * rho) * s;
    let den = (1.0 + rho * rho) * c - 2.0 * rho;
    num.atan2(den)
}

/// Pole `psi` as seen on the warped axis.
pub fn warp_pole(psi: C64, rho: f64) -> C64 {
    (psi - rho) / (C64::new(1.0, 0.0) - psi * rho)
}

/// Inverse of [`warp_pole`].
pub fn unwarp_pole(psi_tilde: C64, rho: f64) -> C64 {
    (psi_tilde + rho) / (C64::new(1.0, 0.0) + psi_tilde * rho)
}

/// `y(k) = sum_t h(t) a_t(k)` for `k < out_len`, where `a_t` is the impulse
/// response of `t` cascaded allpass sections.
///
/// The sections are applied by propagating one state vector of length
/// `out_len` per input sample, `O(len * out_len)` in total.
///
/// Input sample `t` reaches the output no earlier than about
/// `t (1 - |rho|) / (1 + |rho|)`, so input beyond twice the matching length
/// is ignored. Conversely, an input shorter than
/// `out_len (1 + |rho|) / (1 - |rho|)` leaves its truncation transient inside
/// the output window.
pub fn warp_signal(signal: &Signal, rho: f64, out_len: usize) -> Result<Signal> {
    if out_len == 0 {
        return Err(Error::InvalidParameter("warped length must be at least 1".into()));
    }
    if !(rho.abs() < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "warping factor {rho} outside (-1, 1)"
        )));
    }
    let fs = signal.sample_rate();
    let used = signal.len().min(input_horizon(rho, out_len));
    let samples = &signal.samples()[..used];
    if signal.is_real() {
        let h: Vec<f64> = samples.iter().map(|x| x.re).collect();
        Signal::from_real(&warp_chain(&h, rho, out_len), fs)
    } else {
        let re: Vec<f64> = samples.iter().map(|x| x.re).collect();
        let im: Vec<f64> = samples.iter().map(|x| x.im).collect();
        let (yr, yi) = (warp_chain(&re, rho, out_len), warp_chain(&im, rho, out_len));
        Signal::from_complex(
            yr.into_iter().zip(yi).map(|(a, b)| C64::new(a, b)).collect(),
            fs,
        )
    }
}

/// Input length beyond which samples no longer reach the first `out_len`
/// warped samples.
pub fn input_horizon(rho: f64, out_len: usize) -> usize {
    let stretch = (1.0 + rho.abs()) / (1.0 - rho.abs());
    (2.0 * stretch * out_len as f64).ceil() as usize + 64
}

fn warp_chain(h: &[f64], rho: f64, out_len: usize) -> Vec<f64> {
    let mut y = vec![0.0; out_len];
    let mut a = vec![0.0; out_len];
    a[0] = 1.0;
    for (t, &x) in h.iter().enumerate() {
        if t > 0 {
            // a <- D * a, in place: a'(k) = rho a(k) + a(k-1) - rho a'(k-1).
            let mut prev_in = 0.0;
            let mut prev_out = 0.0;
            for v in a.iter_mut() {
                let cur = *v;
                let out = rho * cur + prev_in - rho * prev_out;
                prev_in = cur;
                prev_out = out;
                *v = out;
            }
        }
        if x != 0.0 {
            for (yk, ak) in y.iter_mut().zip(&a) {
                *yk += x * ak;
            }
        }
    }
    y
}

/// Warped modes below `omega_c` and plain modes at or above it.
///
/// Amplitudes are carried over unchanged; callers re-fit them on the
/// original signal since the merged basis differs from either branch.
pub fn merge_modes(warped: &ModeSet, plain: &ModeSet, omega_c: f64) -> Result<ModeSet> {
    if warped.sample_rate() != plain.sample_rate() {
        return Err(Error::RateMismatch(warped.sample_rate(), plain.sample_rate()));
    }
    let modes = warped
        .iter()
        .filter(|m| m.omega() < omega_c)
        .chain(plain.iter().filter(|m| m.omega() >= omega_c))
        .copied()
        .collect();
    ModeSet::new(modes, Source::Merged, warped.sample_rate())
}

/// Multiplies sample `n` by `exp(-sigma n / fs)`.
pub fn pre_damp(signal: &Signal, sigma: f64) -> Result<Signal> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(alloc::format!(
            "pre-damping {sigma} must be nonnegative"
        )));
    }
    if sigma == 0.0 {
        return Ok(signal.clone());
    }
    let step = (-sigma / signal.sample_rate()).exp();
    let fs = signal.sample_rate();
    let mut gain = 1.0;
    let mut out = Vec::with_capacity(signal.len());
    for x in signal.samples() {
        out.push(x * gain);
        gain *= step;
    }
    if signal.is_real() {
        let re: Vec<f64> = out.iter().map(|x| x.re).collect();
        Signal::from_real(&re, fs)
    } else {
        Signal::from_complex(out, fs)
    }
}

/// Undoes [`pre_damp`] on estimated poles. Returns the surviving poles and
/// the number dropped for leaving the unit disk.
pub fn undamp_poles(poles: &[C64], sigma: f64, sample_rate: f64) -> (Vec<C64>, usize) {
    let gain = (sigma / sample_rate).exp();
    let mut dropped = 0;
    let out = poles
        .iter()
        .map(|p| p * gain)
        .filter(|p| {
            let keep = p.norm() <= 1.0 + UNSTABLE_TOL;
            dropped += usize::from(!keep);
            keep
        })
        .collect();
    (out, dropped)
}

/// Modes with zero amplitude, for sets whose amplitudes are fitted later.
pub(crate) fn bare_modes(params: &[(f64, f64)], source: Source, fs: f64) -> Result<ModeSet> {
    let modes = params
        .iter()
        .enumerate()
        .map(|(index, &(w, a))| {
            Mode::new(w, a.max(-ALPHA_TOL), 0.0, 0.0).map_err(|e| match e {
                Error::InvalidMode { reason, .. } => Error::InvalidMode { index, reason },
                e => e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ModeSet::new(modes, source, fs)
}

/// Branch results of [`fw_esprit_with`], before merging.
#[derive(Debug, Clone)]
pub struct FwBranches {
    pub warped: ModeSet,
    pub plain: ModeSet,
}

/// Frequency-warped ESPRIT with Hankel size `n`.
pub fn fw_esprit(signal: &Signal, cfg: &WarpConfig, n: usize, order: OrderMethod) -> Result<Estimate> {
    fw_esprit_with(signal, cfg, &EspritConfig::new(n, order)).map(|(e, _)| e)
}

/// Estimates on the warped and on the (optionally pre-damped) plain signal,
/// merges at `omega_c` and re-fits all amplitudes on the original signal.
pub fn fw_esprit_with(
    signal: &Signal,
    cfg: &WarpConfig,
    esprit_cfg: &EspritConfig,
) -> Result<(Estimate, FwBranches)> {
    if !signal.is_real() {
        return Err(Error::ComplexSignal);
    }
    let fs = signal.sample_rate();
    let n = esprit_cfg.hankel_size;
    let ceiling = esprit_cfg.alpha_ceiling();
    let mut diag = Diagnostics::default();

    let warped_signal = warp_signal(signal, cfg.rho, 2 * n + 1)?.slice(1..2 * n + 1)?;
    let warped = estimate_signal_poles(&warped_signal, esprit_cfg)?;
    let mut unwarped = Vec::with_capacity(warped.poles.len());
    for p in &warped.poles {
        let q = unwarp_pole(*p, cfg.rho);
        if q.norm() > 1.0 + UNSTABLE_TOL {
            diag.dropped_unstable += 1;
        } else {
            unwarped.push(q);
        }
    }
    let (warped_params, d) = poles_to_modes(&unwarped, true, ceiling);
    diag.absorb(d);
    diag.selected_order = Some(warped.selection.order);
    diag.singular_values = warped.selection.singular_values;

    let damped = pre_damp(signal, cfg.pre_damp_sigma)?;
    let plain = estimate_signal_poles(&damped, esprit_cfg)?;
    let (undamped, unstable) = undamp_poles(&plain.poles, cfg.pre_damp_sigma, fs);
    diag.dropped_unstable += unstable;
    let (plain_params, d) = poles_to_modes(&undamped, true, ceiling);
    diag.absorb(d);
    diag.notes.push(alloc::format!(
        "warped order {}, plain order {}",
        warped.selection.order,
        plain.selection.order
    ));

    let branches = FwBranches {
        warped: bare_modes(&warped_params, Source::Warped, fs)?,
        plain: bare_modes(&plain_params, Source::Plain, fs)?,
    };
    let merged = merge_modes(&branches.warped, &branches.plain, cfg.omega_c)?;
    diag.dropped_out_of_band += branches.warped.len() + branches.plain.len() - merged.len();
    let modes = if merged.is_empty() {
        merged
    } else {
        estimate_amplitudes(signal, &merged.parameters())?.with_source(Source::Merged)
    };
    Ok((
        Estimate {
            modes,
            diagnostics: diag,
        },
        branches,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::esprit::{build_hankel, estimate_poles};
    use crate::synthetic::{generate, SyntheticSpec};
    use crate::Partial;
    use proptest::prelude::*;

    #[test]
    fn bark_factor_values() {
        assert!((bark_rho(44100.0) - 0.7564).abs() < 1e-4);
        assert!((bark_rho(48000.0) - 0.7660).abs() < 1e-4);
        assert!((bark_rho(1e-12) + 0.1916).abs() < 1e-6);
    }

    #[test]
    fn zoom_factors() {
        assert_eq!(rho_for_zoom(1.0).unwrap(), 0.0);
        assert_eq!(rho_for_zoom(7.0).unwrap(), 0.75);
        assert_eq!(rho_for_zoom(3.0).unwrap(), 0.5);
        assert!(rho_for_zoom(0.5).is_err());
    }

    #[test]
    fn cutoff_is_unit_slope_point() {
        let cfg = WarpConfig::new(0.75).unwrap();
        assert!((cfg.omega_c - 0.7227342478134157).abs() < 1e-12);
        let h = 1e-6;
        let slope = (warp_frequency(cfg.omega_c + h, 0.75) - warp_frequency(cfg.omega_c - h, 0.75))
            / (2.0 * h);
        assert!((slope - 1.0).abs() < 1e-6);
    }

    #[test]
    fn frequency_map_values() {
        for rho in [-0.5, 0.0, 0.75] {
            assert_eq!(warp_frequency(0.0, rho), 0.0);
            assert!((warp_frequency(PI, rho) - PI).abs() < 1e-15);
        }
        assert!((warp_frequency(0.01, 0.75) - 0.0699).abs() < 1e-4);
        for w in [0.1, 1.0, 2.0, 3.0] {
            assert!((warp_frequency(w, 0.0) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_circle_is_preserved() {
        for k in 0..100 {
            let p = C64::from_polar(1.0, 0.0628 * k as f64);
            assert!((unwarp_pole(p, 0.7564).norm() - 1.0).abs() < 1e-12);
            assert!((warp_pole(p, 0.7564).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_map_agrees_with_frequency_map() {
        let w = 0.37;
        let p = warp_pole(C64::from_polar(1.0, w), 0.6);
        assert!((p.arg() - warp_frequency(w, 0.6)).abs() < 1e-12);
    }

    #[test]
    fn identity_at_zero_rho() {
        let s = Signal::from_real(&[1.0, -2.0, 0.5, 3.0], 10.0).unwrap();
        assert_eq!(warp_signal(&s, 0.0, 4).unwrap().real_part(), [1.0, -2.0, 0.5, 3.0]);
        assert_eq!(warp_signal(&s, 0.0, 6).unwrap().real_part(), [1.0, -2.0, 0.5, 3.0, 0.0, 0.0]);
        assert_eq!(warp_signal(&s, 0.0, 2).unwrap().real_part(), [1.0, -2.0]);
        let p = C64::new(0.3, 0.4);
        assert_eq!(unwarp_pole(p, 0.0), p);
    }

    /// Impulse response of one allpass section, by its closed form:
    /// `rho` at k = 0, then `(1 - rho^2)(-rho)^(k-1)`.
    fn section(rho: f64, len: usize) -> Vec<f64> {
        (0..len)
            .map(|k| {
                if k == 0 {
                    rho
                } else {
                    (1.0 - rho * rho) * (-rho).powi(k as i32 - 1)
                }
            })
            .collect()
    }

    fn convolve(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
        (0..len)
            .map(|k| (0..=k).map(|i| a.get(i).unwrap_or(&0.0) * b.get(k - i).unwrap_or(&0.0)).sum())
            .collect()
    }

    #[test]
    fn chain_matches_cascade_convolution() {
        let rho = 0.75;
        let len = 12;
        let h = [0.3, -1.0, 0.5, 2.0, 0.25];
        let mut tap = vec![0.0; len];
        tap[0] = 1.0;
        let mut expected = vec![0.0; len];
        for &x in &h {
            for (e, a) in expected.iter_mut().zip(&tap) {
                *e += x * a;
            }
            tap = convolve(&tap, &section(rho, len), len);
        }
        let got = warp_signal(&Signal::from_real(&h, 1.0).unwrap(), rho, len)
            .unwrap()
            .real_part();
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {expected:?}");
        }
    }

    #[test]
    fn input_past_horizon_is_ignored() {
        let h: Vec<f64> = (0..4000).map(|t| (0.01 * t as f64).cos()).collect();
        let s = Signal::from_real(&h, 1.0).unwrap();
        let horizon = input_horizon(0.75, 64);
        assert!(horizon < 4000);
        let full = warp_chain(&h, 0.75, 64);
        let cut = warp_signal(&s, 0.75, 64).unwrap().real_part();
        for (a, b) in full.iter().zip(&cut) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn delayed_impulse_gives_first_section() {
        let y = warp_signal(&Signal::from_real(&[0.0, 1.0], 1.0).unwrap(), 0.75, 4)
            .unwrap()
            .real_part();
        let s = section(0.75, 4);
        for (a, b) in y.iter().zip(&s) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn warped_tone_peak_moves() {
        use rustfft::FftPlanner;
        let fs = 44100.0;
        let rho = bark_rho(fs);
        let spec = SyntheticSpec::new(vec![Partial::tone(100.0, 2e-5, 1.0)]);
        let s = generate(&spec, 16384, fs).unwrap();
        let len = 16384;
        let y = warp_signal(&s, rho, len).unwrap().real_part();
        let mut buf: Vec<C64> = y.iter().map(|&v| C64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        let peak = (0..len / 2)
            .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
            .unwrap();
        let bin = fs / len as f64;
        let expected = warp_frequency(2.0 * PI * 100.0 / fs, rho) / (2.0 * PI) * fs;
        assert!((peak as f64 * bin - expected).abs() <= bin, "{} vs {expected}", peak as f64 * bin);
        assert!((expected - 720.44).abs() < 0.1);
    }

    #[test]
    fn warped_pole_appears_after_first_sample() {
        let psi = C64::new(-0.001, 0.3).exp();
        let h: Vec<C64> = (0..400).map(|t| psi.powu(t)).collect();
        let y = warp_signal(&Signal::from_complex(h, 1.0).unwrap(), 0.5, 41).unwrap();
        let tail = y.slice(1..41).unwrap();
        let p = estimate_poles(&build_hankel(&tail, 20).unwrap(), 1).unwrap();
        assert!((p[0] - warp_pole(psi, 0.5)).norm() < 1e-6);
        assert!((unwarp_pole(p[0], 0.5) - psi).norm() < 1e-6);
    }

    #[test]
    fn merge_rule() {
        let set = |ws: &[f64]| {
            bare_modes(&ws.iter().map(|&w| (w, 0.01)).collect::<Vec<_>>(), Source::Plain, 1.0)
                .unwrap()
        };
        let wc = 0.75f64.acos();
        let m = merge_modes(&set(&[0.1, 0.5, 1.0]), &set(&[0.6, 1.2]), wc).unwrap();
        let ws: Vec<f64> = m.iter().map(|m| m.omega()).collect();
        assert_eq!(ws, [0.1, 0.5, 1.2]);
        assert_eq!(m.source(), Source::Merged);
        let m = merge_modes(&set(&[0.1, 0.5, 1.0]), &set(&[0.6, 1.2]), PI + 1e-9).unwrap();
        assert_eq!(m.len(), 3);
    }

    #[test]
    fn damping_round_trip() {
        let s = Signal::from_real(&[1.0, 2.0], 48000.0).unwrap();
        assert_eq!(pre_damp(&s, 0.0).unwrap(), s);
        let p = [C64::new(0.3, 0.2)];
        assert_eq!(undamp_poles(&p, 0.0, 48000.0).0, p);

        let (q, _) = undamp_poles(&[C64::new(-0.001, 0.0).exp()], 1.5, 48000.0);
        let alpha = -q[0].norm().ln();
        assert!((alpha - (0.001 - 1.5 / 48000.0)).abs() < 1e-15);

        let (q, dropped) = undamp_poles(&[C64::new(1.0, 0.0)], 1.5, 48000.0);
        assert!(q.is_empty() && dropped == 1);
    }

    #[test]
    fn pre_damp_estimate_undamp() {
        let fs = 48000.0;
        let spec = SyntheticSpec::new(vec![Partial::tone(1000.0, 2e-4, 1.0)]);
        let s = generate(&spec, 512, fs).unwrap();
        let d = pre_damp(&s, 1.5).unwrap();
        let p = estimate_poles(&build_hankel(&d, 128).unwrap(), 2).unwrap();
        let (p, _) = undamp_poles(&p, 1.5, fs);
        for q in p {
            assert!((-q.norm().ln() - 2e-4).abs() < 1e-8);
        }
    }

    #[test]
    fn fw_high_mode_appears_once() {
        let fs = 44100.0;
        let spec = SyntheticSpec::new(vec![Partial::tone(10000.0, 1e-4, 1.0)]);
        let s = generate(&spec, 8192, fs).unwrap();
        let cfg = WarpConfig::bark(fs).unwrap();
        let est = fw_esprit(&s, &cfg, 256, OrderMethod::KneePoint).unwrap();
        assert_eq!(est.modes.len(), 1);
        assert!((est.modes.modes()[0].frequency_hz(fs) - 10000.0).abs() < 1e-6);
    }

    #[test]
    fn fw_dc_decay_comes_from_warped_branch() {
        let fs = 44100.0;
        let spec = SyntheticSpec::new(vec![Partial::tone(0.0, 1e-3, 1.0)]);
        let s = generate(&spec, 8192, fs).unwrap();
        let cfg = WarpConfig::bark(fs).unwrap();
        let (est, branches) =
            fw_esprit_with(&s, &cfg, &EspritConfig::new(256, OrderMethod::KneePoint)).unwrap();
        assert_eq!(est.modes.len(), 1, "{:?} {:?}", est.modes, est.diagnostics.singular_values.get(..6));
        let m = est.modes.modes()[0];
        assert_eq!(m.omega(), 0.0);
        assert!((m.alpha() - 1e-3).abs() < 1e-8);
        assert!(branches.warped.iter().any(|w| w.omega() == 0.0));
    }

    #[test]
    fn fw_resolves_beating_pair() {
        let fs = 44100.0;
        let spec = SyntheticSpec::new(vec![
            Partial::tone(100.0, 5e-5, 1.0),
            Partial::tone(101.0, 5e-5, 1.0),
        ]);
        let s = generate(&spec, 16384, fs).unwrap();
        let cfg = WarpConfig::bark(fs).unwrap();
        let est = fw_esprit(&s, &cfg, 512, OrderMethod::KneePoint).unwrap();
        let hz: Vec<f64> = est.modes.iter().map(|m| m.frequency_hz(fs)).collect();
        assert_eq!(hz.len(), 2, "{hz:?}");
        assert!((hz[0] - 100.0).abs() < 0.1 && (hz[1] - 101.0).abs() < 0.1, "{hz:?}");
    }

    proptest! {
        #[test]
        fn warp_unwarp_identity(r in 0.0f64..0.999, th in -PI..PI, rho in -0.95f64..0.95) {
            let p = C64::from_polar(r, th);
            prop_assert!((unwarp_pole(warp_pole(p, rho), rho) - p).norm() < 1e-12);
        }

        #[test]
        fn frequency_map_is_increasing(w in 0.0f64..3.13, dw in 1e-6f64..0.01, rho in -0.95f64..0.95) {
            prop_assert!(warp_frequency(w + dw, rho) > warp_frequency(w, rho));
        }

        #[test]
        fn dc_slope(rho in -0.9f64..0.9) {
            let h = 1e-7;
            let slope = (warp_frequency(h, rho) - warp_frequency(-h, rho)) / (2.0 * h);
            prop_assert!((slope - (1.0 + rho) / (1.0 - rho)).abs() < 1e-6);
        }

        #[test]
        fn zero_rho_is_identity(x in prop::collection::vec(-1.0f64..1.0, 1..32), extra in 0usize..8) {
            let s = Signal::from_real(&x, 1.0).unwrap();
            let y = warp_signal(&s, 0.0, x.len() + extra).unwrap().real_part();
            prop_assert_eq!(&y[..x.len()], &x[..]);
            prop_assert!(y[x.len()..].iter().all(|&v| v == 0.0));
        }
    }
}
